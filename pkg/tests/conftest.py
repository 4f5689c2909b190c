import sys
from pathlib import Path

import pytest

from vulnsev.corpus import load_dataset

FIXTURES = Path(__file__).parent / "fixtures"

# Make the oracle helpers importable as plain modules.
sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def fixture_records():
    return load_dataset(FIXTURES / "fixture_corpus.jsonl")


@pytest.fixture(scope="session")
def fixture_by_id(fixture_records):
    return {record.id: record for record in fixture_records}
