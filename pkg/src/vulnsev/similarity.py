"""Similarity measures and the three-stage demonstration selection.

Stage 1 filters the historical repository down to the top-n candidates by
semantic distance between whitened code embeddings. Stage 2 scores each
candidate's syntactic (edit-distance over serialized syntax trees) and
lexical (token-set Jaccard) similarity and blends them with weight
``lam``. Stage 3 blends that code similarity with the cosine similarity
of the description embeddings using weight ``phi`` and keeps the top-k.

Distances and similarities never mix: the semantic measure is a squared
L2 distance used only for filtering, the fused score combines only the
three [0, 1]-ish similarities.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from .codeparse import AstSequence, parse_to_ast_sequence, tokenize_code
from .corpus import VulnerabilityRecord
from .embedstore import VectorStore, WhiteningModel, apply_whitening
from .errors import DataError, UsageError

DEFAULT_TOP_N = 10
DEFAULT_SHOTS = 4
DEFAULT_LAMBDA = 0.4
DEFAULT_PHI = 0.7


def sem_dist(a: np.ndarray, b: np.ndarray) -> float:
    """Squared L2 distance between two whitened vectors; lower is closer."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise UsageError(f"vector shapes differ: {a.shape} vs {b.shape}")
    diff = a - b
    return float(diff @ diff)


def levenshtein(a: Sequence[str], b: Sequence[str]) -> int:
    """Item-level edit distance over two label sequences."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, item_a in enumerate(a, start=1):
        current = [i]
        for j, item_b in enumerate(b, start=1):
            cost = 0 if item_a == item_b else 1
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost)
            )
        previous = current
    return previous[-1]


def syn_sim(a: AstSequence | Sequence[str], b: AstSequence | Sequence[str]) -> float:
    """Normalized edit similarity between two node-kind sequences."""
    items_a = tuple(a.items if isinstance(a, AstSequence) else a)
    items_b = tuple(b.items if isinstance(b, AstSequence) else b)
    if not items_a or not items_b:
        raise DataError("syntactic similarity needs non-empty sequences")
    total = len(items_a) + len(items_b)
    return (total - levenshtein(items_a, items_b)) / total


def lex_sim(a: FrozenSet[str], b: FrozenSet[str]) -> float:
    """Jaccard similarity of two token sets; two empty sets count as 1."""
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def _check_unit(name: str, value: float) -> float:
    if not 0.0 <= value <= 1.0:
        raise UsageError(f"{name} must be in [0, 1], got {value}")
    return value


def code_sim(syn: float, lexical: float, lam: float = DEFAULT_LAMBDA) -> float:
    """Blend syntactic and lexical similarity: lam*syn + (1-lam)*lexical."""
    _check_unit("lambda", lam)
    return lam * syn + (1.0 - lam) * lexical


def text_sim(da: np.ndarray, db: np.ndarray) -> float:
    """Cosine similarity of two description embeddings, clamped to [-1, 1]."""
    da = np.asarray(da, dtype=np.float64)
    db = np.asarray(db, dtype=np.float64)
    if da.shape != db.shape:
        raise UsageError(f"vector shapes differ: {da.shape} vs {db.shape}")
    norm_a = float(np.linalg.norm(da))
    norm_b = float(np.linalg.norm(db))
    if norm_a == 0.0 or norm_b == 0.0:
        raise DataError("cannot take cosine similarity of a zero vector")
    value = float(da @ db) / (norm_a * norm_b)
    return max(-1.0, min(1.0, value))


def fused_sim(code: float, text: float, phi: float = DEFAULT_PHI) -> float:
    """Blend code and description similarity: phi*code + (1-phi)*text."""
    _check_unit("phi", phi)
    return phi * code + (1.0 - phi) * text


@dataclass(frozen=True, slots=True)
class SimilarityBreakdown:
    """Every score computed for one candidate against one target."""

    candidate_id: str
    sem_dist: float
    syn_sim: float
    lex_sim: float
    code_sim: float
    text_sim: float
    fused: float

    def to_json_dict(self) -> dict:
        return {
            "candidate_id": self.candidate_id,
            "sem_dist": self.sem_dist,
            "syn_sim": self.syn_sim,
            "lex_sim": self.lex_sim,
            "code_sim": self.code_sim,
            "text_sim": self.text_sim,
            "fused": self.fused,
        }


@dataclass(frozen=True, slots=True)
class DemonstrationSet:
    """Top-k demonstrations for one target, sorted by fused score descending."""

    target_id: str
    demos: Tuple[Tuple[VulnerabilityRecord, SimilarityBreakdown], ...]
    k: int
    n: int

    def demo_ids(self) -> List[str]:
        return [record.id for record, _ in self.demos]

    def fused_scores(self) -> List[float]:
        return [breakdown.fused for _, breakdown in self.demos]

    def mean_fused(self) -> Optional[float]:
        if not self.demos:
            return None
        return sum(self.fused_scores()) / len(self.demos)


class DemoRepository:
    """Historical records plus everything needed to score them.

    Owns lazy caches for whitened code embeddings, syntax-tree sequences
    and token sets. All cached values are immutable, so a repository can be
    shared read-only across worker threads once warmed; cache dicts are
    only ever appended to.
    """

    def __init__(
        self,
        records: Sequence[VulnerabilityRecord],
        code_vectors: VectorStore,
        desc_vectors: VectorStore,
        whitening: WhiteningModel,
        language: str = "auto",
        ast_cap: int = 2000,
    ):
        self.records: Dict[str, VulnerabilityRecord] = {r.id: r for r in records}
        if len(self.records) != len(records):
            raise DataError("repository records contain duplicate ids")
        self.code_vectors = code_vectors
        self.desc_vectors = desc_vectors
        self.whitening = whitening
        self.language = language
        self.ast_cap = ast_cap
        self._whitened: Dict[str, np.ndarray] = {}
        self._sequences: Dict[str, AstSequence] = {}
        self._token_sets: Dict[str, FrozenSet[str]] = {}

    def __len__(self) -> int:
        return len(self.records)

    def candidate_ids(self, exclude: str) -> List[str]:
        return [rid for rid in self.records if rid != exclude]

    def whitened_code(self, record: VulnerabilityRecord) -> np.ndarray:
        cached = self._whitened.get(record.id)
        if cached is None:
            raw = self.code_vectors.vector(record.id)
            cached = apply_whitening(self.whitening, raw)
            self._whitened[record.id] = cached
        return cached

    def description_vector(self, record: VulnerabilityRecord) -> np.ndarray:
        return self.desc_vectors.vector(record.id)

    def ast_sequence(self, record: VulnerabilityRecord) -> AstSequence:
        cached = self._sequences.get(record.id)
        if cached is None:
            cached = parse_to_ast_sequence(
                record.code, cap=self.ast_cap, language=self.language
            )
            self._sequences[record.id] = cached
        return cached

    def token_set(self, record: VulnerabilityRecord) -> FrozenSet[str]:
        cached = self._token_sets.get(record.id)
        if cached is None:
            cached = tokenize_code(record.code)
            self._token_sets[record.id] = cached
        return cached


def semantic_shortlist(
    target_vec: np.ndarray,
    vectors_by_id: Dict[str, np.ndarray],
    n: int,
) -> List[Tuple[float, str]]:
    """Stage-1 filter: exact top-n scan by squared L2 distance.

    No approximation: every candidate is scored and sorted by
    (distance, id), so results are deterministic under ties.
    """
    ranked = sorted(
        ((sem_dist(target_vec, vec), rid) for rid, vec in vectors_by_id.items()),
        key=lambda pair: (pair[0], pair[1]),
    )
    return ranked[:n]


def score_candidate(
    target: VulnerabilityRecord,
    candidate: VulnerabilityRecord,
    repo: DemoRepository,
    lam: float,
    phi: float,
) -> SimilarityBreakdown:
    """Compute the full breakdown of one candidate against the target."""
    distance = sem_dist(repo.whitened_code(target), repo.whitened_code(candidate))
    syntactic = syn_sim(repo.ast_sequence(target), repo.ast_sequence(candidate))
    lexical = lex_sim(repo.token_set(target), repo.token_set(candidate))
    code = code_sim(syntactic, lexical, lam)
    textual = text_sim(
        repo.description_vector(target), repo.description_vector(candidate)
    )
    return SimilarityBreakdown(
        candidate_id=candidate.id,
        sem_dist=distance,
        syn_sim=syntactic,
        lex_sim=lexical,
        code_sim=code,
        text_sim=textual,
        fused=fused_sim(code, textual, phi),
    )


def select_demonstrations(
    target: VulnerabilityRecord,
    repo: DemoRepository,
    n: int = DEFAULT_TOP_N,
    k: int = DEFAULT_SHOTS,
    lam: float = DEFAULT_LAMBDA,
    phi: float = DEFAULT_PHI,
) -> DemonstrationSet:
    """Run the three-stage selection for one target.

    Ties are broken deterministically: stage 1 by (distance, id); the final
    ranking by (fused descending, distance ascending, id ascending). The
    target never appears among its own demonstrations.
    """
    if n < 1:
        raise UsageError(f"top-n must be >= 1, got {n}")
    if k < 0 or k > n:
        raise UsageError(f"shots must be in [0, {n}], got {k}")
    _check_unit("lambda", lam)
    _check_unit("phi", phi)
    candidates = repo.candidate_ids(exclude=target.id)
    if not candidates:
        raise DataError("repository holds no candidates besides the target")
    if k == 0:
        return DemonstrationSet(target_id=target.id, demos=(), k=0, n=n)

    target_vec = repo.whitened_code(target)
    candidate_vecs = {
        rid: repo.whitened_code(repo.records[rid]) for rid in candidates
    }
    shortlist = semantic_shortlist(target_vec, candidate_vecs, n)

    scored: List[Tuple[VulnerabilityRecord, SimilarityBreakdown]] = []
    for distance, rid in shortlist:
        candidate = repo.records[rid]
        breakdown = score_candidate(target, candidate, repo, lam, phi)
        scored.append((candidate, breakdown))
    scored.sort(key=lambda item: (-item[1].fused, item[1].sem_dist, item[0].id))
    return DemonstrationSet(
        target_id=target.id, demos=tuple(scored[:k]), k=k, n=n
    )


def select_random_demonstrations(
    target: VulnerabilityRecord,
    repo: DemoRepository,
    k: int,
    seed: int,
    lam: float = DEFAULT_LAMBDA,
    phi: float = DEFAULT_PHI,
) -> DemonstrationSet:
    """Baseline selection: k uniformly drawn candidates, scores still logged.

    The draw is seeded per target (``"{seed}:{target_id}"``) so a fixed seed
    yields a reproducible baseline run. Returned demos are sorted like the
    relevance-based selector so downstream ordering behaves identically.
    """
    candidates = repo.candidate_ids(exclude=target.id)
    if not candidates:
        raise DataError("repository holds no candidates besides the target")
    if k == 0:
        return DemonstrationSet(target_id=target.id, demos=(), k=0, n=0)
    rng = random.Random(f"{seed}:{target.id}")
    chosen = rng.sample(sorted(candidates), min(k, len(candidates)))
    scored = [
        (repo.records[rid], score_candidate(target, repo.records[rid], repo, lam, phi))
        for rid in chosen
    ]
    scored.sort(key=lambda item: (-item[1].fused, item[1].sem_dist, item[0].id))
    return DemonstrationSet(
        target_id=target.id, demos=tuple(scored), k=k, n=len(chosen)
    )
