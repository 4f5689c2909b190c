"""Vulnerability dataset: records, severity binning, splitting, statistics.

Datasets are UTF-8 JSON-lines files, one record per line, with keys
``id``, ``cve_id``, ``code``, ``description``, ``cvss_score`` and the
optional keys ``severity`` and ``collected_at`` (ISO-8601 date).
"""

from __future__ import annotations

import json
import random
import statistics
from dataclasses import dataclass
from datetime import date
from enum import Enum
from functools import total_ordering
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import DatasetError, NoSeverityError, ScoreRangeError, UsageError

RATIO_TOLERANCE = 1e-9


@total_ordering
class SeverityLevel(Enum):
    """The four CVSS v3 base-severity levels, ordered Critical > ... > Low."""

    CRITICAL = "Critical"
    HIGH = "High"
    MEDIUM = "Medium"
    LOW = "Low"

    @property
    def rank(self) -> int:
        return _SEVERITY_RANK[self]

    def __lt__(self, other: "SeverityLevel") -> bool:
        if not isinstance(other, SeverityLevel):
            return NotImplemented
        return self.rank < other.rank

    @classmethod
    def from_label(cls, label: str) -> "SeverityLevel":
        try:
            return _SEVERITY_BY_LABEL[label.strip().lower()]
        except KeyError:
            raise DatasetError(f"unknown severity label: {label!r}") from None


_SEVERITY_RANK = {
    SeverityLevel.LOW: 0,
    SeverityLevel.MEDIUM: 1,
    SeverityLevel.HIGH: 2,
    SeverityLevel.CRITICAL: 3,
}
_SEVERITY_BY_LABEL = {level.value.lower(): level for level in SeverityLevel}

# Canonical display/report order (most to least severe).
SEVERITY_ORDER: Tuple[SeverityLevel, ...] = (
    SeverityLevel.CRITICAL,
    SeverityLevel.HIGH,
    SeverityLevel.MEDIUM,
    SeverityLevel.LOW,
)


def severity_from_score(score: float) -> SeverityLevel:
    """Map a CVSS v3 base score onto its severity level.

    Bins: Critical [9.0, 10.0], High [7.0, 9.0), Medium [4.0, 7.0),
    Low [0.1, 4.0). Scores in [0.0, 0.1) fall in the CVSS "None" band and
    are rejected; scores outside [0.0, 10.0] are rejected.
    """
    if score < 0.0 or score > 10.0:
        raise ScoreRangeError(f"cvss_score {score} outside [0.0, 10.0]")
    if score < 0.1:
        raise NoSeverityError(
            f"cvss_score {score} is in the 'None' band [0.0, 0.1), below the Low level"
        )
    if score < 4.0:
        return SeverityLevel.LOW
    if score < 7.0:
        return SeverityLevel.MEDIUM
    if score < 9.0:
        return SeverityLevel.HIGH
    return SeverityLevel.CRITICAL


@dataclass(frozen=True, slots=True)
class VulnerabilityRecord:
    """One CVE entry: function source, description and its CVSS v3 rating.

    The severity is always re-derivable from the score; constructing a
    record with a mismatched pair is rejected.
    """

    id: str
    cve_id: str
    code: str
    description: str
    cvss_score: float
    severity: SeverityLevel
    collected_at: Optional[date] = None

    def __post_init__(self):
        derived = severity_from_score(self.cvss_score)
        if derived is not self.severity:
            raise DatasetError(
                f"record {self.id!r}: severity {self.severity.value!r} inconsistent "
                f"with cvss_score {self.cvss_score} ({derived.value})"
            )

    def to_json_dict(self) -> dict:
        payload = {
            "id": self.id,
            "cve_id": self.cve_id,
            "code": self.code,
            "description": self.description,
            "cvss_score": self.cvss_score,
            "severity": self.severity.value,
        }
        if self.collected_at is not None:
            payload["collected_at"] = self.collected_at.isoformat()
        return payload

    @classmethod
    def from_json_dict(cls, raw: dict) -> "VulnerabilityRecord":
        for key in ("id", "cve_id", "code", "description", "cvss_score"):
            if key not in raw:
                raise DatasetError(f"record missing required key {key!r}")
        rid = str(raw["id"])
        code = raw["code"]
        description = raw["description"]
        if not isinstance(code, str) or not code.strip():
            raise DatasetError(f"record {rid!r}: code must be non-empty text")
        if not isinstance(description, str) or not description.strip():
            raise DatasetError(f"record {rid!r}: description must be non-empty text")
        try:
            score = float(raw["cvss_score"])
        except (TypeError, ValueError):
            raise DatasetError(f"record {rid!r}: cvss_score is not a number") from None
        try:
            derived = severity_from_score(score)
        except (ScoreRangeError, NoSeverityError) as exc:
            raise type(exc)(f"record {rid!r}: {exc}") from None
        stored = raw.get("severity")
        if stored is not None:
            stored_level = SeverityLevel.from_label(str(stored))
            if stored_level is not derived:
                raise DatasetError(
                    f"record {rid!r}: stored severity {stored_level.value!r} "
                    f"inconsistent with cvss_score {score} ({derived.value})"
                )
        collected = raw.get("collected_at")
        collected_at = None
        if collected is not None:
            try:
                collected_at = date.fromisoformat(str(collected))
            except ValueError:
                raise DatasetError(
                    f"record {rid!r}: collected_at {collected!r} is not an ISO-8601 date"
                ) from None
        return cls(
            id=rid,
            cve_id=str(raw["cve_id"]),
            code=code,
            description=description,
            cvss_score=score,
            severity=derived,
            collected_at=collected_at,
        )


# Record-level validation errors that get wrapped with file/line context.
_RECORD_ERRORS = (DatasetError, ScoreRangeError, NoSeverityError)


def load_dataset(path: Path | str) -> List[VulnerabilityRecord]:
    """Load and validate a JSON-lines dataset.

    Fails on the first malformed line (naming the line number), duplicate id,
    or stored severity label inconsistent with the score.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"dataset not found: {path}")
    records: List[VulnerabilityRecord] = []
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path}:{lineno}: malformed record: {exc}") from None
            try:
                record = VulnerabilityRecord.from_json_dict(raw)
            except _RECORD_ERRORS as exc:
                raise type(exc)(f"{path}:{lineno}: {exc}") from None
            if record.id in seen:
                raise DatasetError(f"{path}:{lineno}: duplicate id {record.id!r}")
            seen.add(record.id)
            records.append(record)
    return records


def save_dataset(records: Iterable[VulnerabilityRecord], path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record.to_json_dict(), ensure_ascii=False))
            handle.write("\n")


@dataclass(frozen=True, slots=True)
class CorpusSplit:
    """Stratified train/validation/test partition of a record list."""

    train: Tuple[VulnerabilityRecord, ...]
    validation: Tuple[VulnerabilityRecord, ...]
    test: Tuple[VulnerabilityRecord, ...]
    seed: int
    ratios: Tuple[float, float, float]

    @property
    def parts(self) -> Dict[str, Tuple[VulnerabilityRecord, ...]]:
        return {"train": self.train, "validation": self.validation, "test": self.test}


def apportion(count: int, ratios: Sequence[float]) -> List[int]:
    """Split ``count`` items into integer part sizes following ``ratios``.

    Every part except the last is rounded half-up from its exact quota; the
    last part receives the remainder. Each part deviates from its exact quota
    by at most one item. If rounding overshoots, earlier parts give items
    back, last-but-one first.
    """
    sizes = [int(count * r + 0.5) for r in ratios[:-1]]
    last = count - sum(sizes)
    i = len(sizes) - 1
    while last < 0 and i >= 0:
        give = min(sizes[i], -last)
        sizes[i] -= give
        last += give
        i -= 1
    sizes.append(last)
    return sizes


def stratified_split(
    records: Sequence[VulnerabilityRecord],
    ratios: Tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 42,
) -> CorpusSplit:
    """Partition records into train/validation/test preserving class shares.

    Within each severity class the records are sorted by id, shuffled by a
    per-class Mersenne-Twister generator seeded with ``"{seed}:{label}"``,
    and cut into the three parts per :func:`apportion`. Deterministic for a
    given (records, ratios, seed).
    """
    if not records:
        raise DatasetError("cannot split an empty corpus")
    if len(ratios) != 3:
        raise UsageError("ratios must have exactly three entries")
    if any(r < 0 for r in ratios):
        raise UsageError(f"ratios must be non-negative, got {ratios}")
    if abs(sum(ratios) - 1.0) > RATIO_TOLERANCE:
        raise UsageError(f"ratios must sum to 1, got {ratios}")

    by_class: Dict[SeverityLevel, List[VulnerabilityRecord]] = {
        level: [] for level in SEVERITY_ORDER
    }
    for record in records:
        by_class[record.severity].append(record)

    train: List[VulnerabilityRecord] = []
    validation: List[VulnerabilityRecord] = []
    test: List[VulnerabilityRecord] = []
    for level in SEVERITY_ORDER:
        members = sorted(by_class[level], key=lambda r: r.id)
        if not members:
            continue
        rng = random.Random(f"{seed}:{level.value}")
        rng.shuffle(members)
        n_train, n_val, _ = apportion(len(members), ratios)
        train.extend(members[:n_train])
        validation.extend(members[n_train : n_train + n_val])
        test.extend(members[n_train + n_val :])

    return CorpusSplit(
        train=tuple(train),
        validation=tuple(validation),
        test=tuple(test),
        seed=seed,
        ratios=tuple(ratios),
    )


@dataclass(frozen=True, slots=True)
class StatsReport:
    """Per-class counts and token statistics for one record list."""

    total: int
    counts: Dict[SeverityLevel, int]
    code_tokens_mean: float
    code_tokens_median: float
    description_tokens_mean: float
    description_tokens_median: float

    def to_json_dict(self) -> dict:
        return {
            "total": self.total,
            "counts": {level.value: self.counts[level] for level in SEVERITY_ORDER},
            "code_tokens_mean": self.code_tokens_mean,
            "code_tokens_median": self.code_tokens_median,
            "description_tokens_mean": self.description_tokens_mean,
            "description_tokens_median": self.description_tokens_median,
        }


def corpus_stats(records: Sequence[VulnerabilityRecord]) -> StatsReport:
    """Severity counts plus mean/median whitespace-token counts."""
    if not records:
        raise DatasetError("cannot compute statistics for an empty record list")
    counts = {level: 0 for level in SEVERITY_ORDER}
    for record in records:
        counts[record.severity] += 1
    code_tokens = [len(record.code.split()) for record in records]
    desc_tokens = [len(record.description.split()) for record in records]
    return StatsReport(
        total=len(records),
        counts=counts,
        code_tokens_mean=float(statistics.mean(code_tokens)),
        code_tokens_median=float(statistics.median(code_tokens)),
        description_tokens_mean=float(statistics.mean(desc_tokens)),
        description_tokens_median=float(statistics.median(desc_tokens)),
    )


def filter_by_date(
    records: Sequence[VulnerabilityRecord], cutoff: date
) -> Tuple[List[VulnerabilityRecord], int]:
    """Keep records collected strictly after ``cutoff``.

    Records without a collection date cannot be placed and are excluded;
    the count of such records is returned alongside the kept list.
    """
    kept: List[VulnerabilityRecord] = []
    undated = 0
    for record in records:
        if record.collected_at is None:
            undated += 1
        elif record.collected_at > cutoff:
            kept.append(record)
    return kept, undated
