"""Scoring, experiment runs, ablation sweeps and result analyses.

Predictions are scored as a four-class problem: accuracy, macro F1 over
the four severity levels, and the multiclass Matthews correlation
coefficient. Responses that named zero or several levels ("invalid")
count toward the instance total and their truth class, but toward no
predicted class: refusing to answer is never rewarded.

All run artifacts (metrics report, per-instance log) contain only
deterministic fields, so a rerun against a warm response cache writes
byte-identical files.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import date
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .corpus import (
    SEVERITY_ORDER,
    CorpusSplit,
    SeverityLevel,
    VulnerabilityRecord,
    filter_by_date,
    load_dataset,
    stratified_split,
)
from .embedstore import default_whitening_dim, fit_whitening, load_vectors
from .errors import DataError, UsageError, VulnsevError
from .llmclient import AssessmentResult, LlmClient, ProviderConfig, ResponseCache
from .prompting import (
    DEFAULT_BUDGET,
    DEFAULT_INSTRUCTION,
    OrderingStrategy,
    build_prompt,
    order_demos,
)
from .similarity import (
    DEFAULT_LAMBDA,
    DEFAULT_PHI,
    DEFAULT_SHOTS,
    DEFAULT_TOP_N,
    DemoRepository,
    select_demonstrations,
    select_random_demonstrations,
)

__all__ = [
    "ConfusionMatrix",
    "MetricsReport",
    "compute_metrics",
    "metrics_from_labels",
    "RunConfig",
    "InstanceRecord",
    "ExperimentOutcome",
    "run_experiment",
    "run_ablation",
    "AblationRow",
    "ablation_table",
    "bucket_by_similarity",
    "BucketReport",
    "filter_by_date",
    "write_report",
    "write_instances",
    "report_table",
]

_LABELS: Tuple[SeverityLevel, ...] = SEVERITY_ORDER
_INDEX = {level: i for i, level in enumerate(_LABELS)}

LabelPair = Tuple[SeverityLevel, Optional[SeverityLevel]]


@dataclass(slots=True)
class ConfusionMatrix:
    """4x4 (truth, predicted) counts plus per-truth-class invalid counts.

    Invalid predictions need their own per-truth column because the truth
    totals that feed recall and the correlation coefficient must include
    every instance, not only the validly predicted ones.
    """

    counts: List[List[int]] = field(
        default_factory=lambda: [[0] * len(_LABELS) for _ in _LABELS]
    )
    invalid: List[int] = field(default_factory=lambda: [0] * len(_LABELS))

    def add(self, truth: SeverityLevel, predicted: Optional[SeverityLevel]) -> None:
        if predicted is None:
            self.invalid[_INDEX[truth]] += 1
        else:
            self.counts[_INDEX[truth]][_INDEX[predicted]] += 1

    @property
    def invalid_count(self) -> int:
        return sum(self.invalid)

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts) + self.invalid_count

    def truth_totals(self) -> List[int]:
        return [sum(row) + inv for row, inv in zip(self.counts, self.invalid)]

    def predicted_totals(self) -> List[int]:
        return [sum(row[j] for row in self.counts) for j in range(len(_LABELS))]

    def to_json_dict(self) -> dict:
        return {
            "labels": [level.value for level in _LABELS],
            "counts": [list(row) for row in self.counts],
            "invalid": list(self.invalid),
        }

    @classmethod
    def from_pairs(cls, pairs: Sequence[LabelPair]) -> "ConfusionMatrix":
        matrix = cls()
        for truth, predicted in pairs:
            matrix.add(truth, predicted)
        return matrix


@dataclass(frozen=True, slots=True)
class MetricsReport:
    """Accuracy, macro F1 and MCC plus per-class detail for one run."""

    accuracy: float
    macro_f1: float
    mcc: float
    mcc_defined: bool
    per_class: Dict[str, Dict[str, float]]
    confusion: ConfusionMatrix
    n: int
    metadata: Dict[str, object] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "mcc": self.mcc,
            "mcc_defined": self.mcc_defined,
            "per_class": self.per_class,
            "confusion": self.confusion.to_json_dict(),
            "n": self.n,
            "metadata": self.metadata,
        }


def metrics_from_matrix(
    matrix: ConfusionMatrix, metadata: Optional[Dict[str, object]] = None
) -> MetricsReport:
    s = matrix.total
    if s == 0:
        raise DataError("cannot compute metrics with zero instances")
    correct = sum(matrix.counts[i][i] for i in range(len(_LABELS)))
    truth_totals = matrix.truth_totals()
    predicted_totals = matrix.predicted_totals()

    per_class: Dict[str, Dict[str, float]] = {}
    f1_values: List[float] = []
    for i, level in enumerate(_LABELS):
        tp = matrix.counts[i][i]
        precision = tp / predicted_totals[i] if predicted_totals[i] else 0.0
        recall = tp / truth_totals[i] if truth_totals[i] else 0.0
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall > 0
            else 0.0
        )
        f1_values.append(f1)
        per_class[level.value] = {
            "precision": precision,
            "recall": recall,
            "f1": f1,
            "support": truth_totals[i],
        }

    # Multiclass correlation (Gorodkin form) over exact integer sums.
    numerator = correct * s - sum(
        p * t for p, t in zip(predicted_totals, truth_totals)
    )
    den_pred = s * s - sum(p * p for p in predicted_totals)
    den_truth = s * s - sum(t * t for t in truth_totals)
    if den_pred <= 0 or den_truth <= 0:
        mcc, mcc_defined = 0.0, False
    else:
        mcc, mcc_defined = numerator / math.sqrt(den_pred * den_truth), True

    return MetricsReport(
        accuracy=correct / s,
        macro_f1=sum(f1_values) / len(f1_values),
        mcc=mcc,
        mcc_defined=mcc_defined,
        per_class=per_class,
        confusion=matrix,
        n=s,
        metadata=dict(metadata or {}),
    )


def metrics_from_labels(
    pairs: Sequence[LabelPair], metadata: Optional[Dict[str, object]] = None
) -> MetricsReport:
    if not pairs:
        raise DataError("cannot compute metrics for an empty result list")
    return metrics_from_matrix(ConfusionMatrix.from_pairs(pairs), metadata)


def compute_metrics(
    results: Sequence[AssessmentResult],
    metadata: Optional[Dict[str, object]] = None,
) -> MetricsReport:
    return metrics_from_labels(
        [(r.truth, r.predicted) for r in results], metadata
    )


# ---------------------------------------------------------------------------
# Experiment runner
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class RunConfig:
    """Everything one evaluation run needs, resolvable before any request."""

    code_vectors: str
    desc_vectors: str
    dataset: Optional[str] = None
    splits_dir: Optional[str] = None
    cache_dir: str = ".vulnsev-cache"
    lam: float = DEFAULT_LAMBDA
    phi: float = DEFAULT_PHI
    top_n: int = DEFAULT_TOP_N
    shots: int = DEFAULT_SHOTS
    ordering: str = "similarity"
    seed: int = 42
    ratios: Tuple[float, float, float] = (0.8, 0.1, 0.1)
    whitening_dim: Optional[int] = None
    budget: int = DEFAULT_BUDGET
    language: str = "auto"
    ast_cap: int = 2000
    selection: str = "relevance"
    instruction: str = DEFAULT_INSTRUCTION
    workers: int = 1
    after_date: Optional[str] = None
    provider: ProviderConfig = field(default_factory=ProviderConfig)

    def ordering_strategy(self) -> OrderingStrategy:
        if self.ordering == "random":
            return OrderingStrategy.random(self.seed)
        return OrderingStrategy(self.ordering)

    def metadata(self) -> Dict[str, object]:
        return {
            "lambda": self.lam,
            "phi": self.phi,
            "top_n": self.top_n,
            "shots": self.shots,
            "ordering": self.ordering_strategy().describe(),
            "seed": self.seed,
            "model": self.provider.model,
            "provider": self.provider.kind,
            "selection": self.selection,
            "budget": self.budget,
        }


@dataclass(frozen=True, slots=True)
class InstanceRecord:
    """One line of the per-instance log; deterministic fields only."""

    target_id: str
    truth: str
    predicted: Optional[str]
    demo_ids: Tuple[str, ...]
    fused_scores: Tuple[float, ...]
    mean_fused: Optional[float]
    prompt_hash: str

    def to_json_dict(self) -> dict:
        return {
            "target_id": self.target_id,
            "truth": self.truth,
            "predicted": self.predicted,
            "demo_ids": list(self.demo_ids),
            "fused_scores": list(self.fused_scores),
            "mean_fused": self.mean_fused,
            "prompt_hash": self.prompt_hash,
        }

    @classmethod
    def from_json_dict(cls, raw: dict) -> "InstanceRecord":
        try:
            return cls(
                target_id=str(raw["target_id"]),
                truth=str(raw["truth"]),
                predicted=None if raw["predicted"] is None else str(raw["predicted"]),
                demo_ids=tuple(raw["demo_ids"]),
                fused_scores=tuple(float(x) for x in raw["fused_scores"]),
                mean_fused=None if raw["mean_fused"] is None else float(raw["mean_fused"]),
                prompt_hash=str(raw["prompt_hash"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed instance record: {exc}") from None

    def label_pair(self) -> LabelPair:
        truth = SeverityLevel.from_label(self.truth)
        predicted = (
            None if self.predicted is None else SeverityLevel.from_label(self.predicted)
        )
        return truth, predicted


@dataclass(frozen=True, slots=True)
class ExperimentOutcome:
    report: MetricsReport
    instances: Tuple[InstanceRecord, ...]
    results: Tuple[AssessmentResult, ...]


def load_split(config: RunConfig) -> CorpusSplit:
    if config.splits_dir:
        base = Path(config.splits_dir)
        return CorpusSplit(
            train=tuple(load_dataset(base / "train.jsonl")),
            validation=tuple(load_dataset(base / "validation.jsonl")),
            test=tuple(load_dataset(base / "test.jsonl")),
            seed=config.seed,
            ratios=config.ratios,
        )
    if not config.dataset:
        raise UsageError("run config needs either a dataset or a splits directory")
    records = load_dataset(config.dataset)
    return stratified_split(records, ratios=config.ratios, seed=config.seed)


def prepare_repository(
    config: RunConfig, split: CorpusSplit
) -> Tuple[DemoRepository, object, object]:
    """Load stores, fit whitening on the training split, wire the repository.

    Whitening is fit on the historical (train) vectors only, never on
    validation or test, so the transform cannot leak evaluation data.
    """
    code_store = load_vectors(config.code_vectors, kind="code")
    desc_store = load_vectors(config.desc_vectors, kind="description")
    train_ids = [record.id for record in split.train]
    target_dim = (
        default_whitening_dim(code_store.dim)
        if config.whitening_dim is None
        else config.whitening_dim
    )
    whitening = fit_whitening(code_store.restrict(train_ids), target_dim=target_dim)
    repo = DemoRepository(
        records=split.train,
        code_vectors=code_store,
        desc_vectors=desc_store,
        whitening=whitening,
        language=config.language,
        ast_cap=config.ast_cap,
    )
    return repo, code_store, desc_store


def _check_coverage(split: CorpusSplit, code_store, desc_store) -> None:
    for part in (split.train, split.test):
        for record in part:
            code_store.vector(record.id)
            desc_store.vector(record.id)


def _assess_one(
    target: VulnerabilityRecord,
    config: RunConfig,
    repo: DemoRepository,
    client: LlmClient,
) -> Tuple[InstanceRecord, AssessmentResult]:
    if config.selection == "random":
        demos = select_random_demonstrations(
            target, repo, k=config.shots, seed=config.seed, lam=config.lam, phi=config.phi
        )
    else:
        demos = select_demonstrations(
            target, repo, n=config.top_n, k=config.shots, lam=config.lam, phi=config.phi
        )
    ordered = order_demos(demos.demos, config.ordering_strategy())
    bundle = build_prompt(
        [record for record, _ in ordered],
        target,
        budget=config.budget,
        instruction=config.instruction,
    )
    result = client.assess(bundle, target_id=target.id, truth=target.severity)
    instance = InstanceRecord(
        target_id=target.id,
        truth=target.severity.value,
        predicted=None if result.predicted is None else result.predicted.value,
        demo_ids=tuple(demos.demo_ids()),
        fused_scores=tuple(demos.fused_scores()),
        mean_fused=demos.mean_fused(),
        prompt_hash=result.prompt_hash,
    )
    return instance, result


def run_experiment(config: RunConfig) -> ExperimentOutcome:
    """Assess every test record and score the predictions.

    All inputs (splits, vector coverage, whitening) are resolved and
    validated before the first provider call.
    """
    if config.selection not in ("relevance", "random"):
        raise UsageError(f"unknown selection strategy {config.selection!r}")
    split = load_split(config)
    if not split.test:
        raise DataError("test split is empty")
    if not split.train:
        raise DataError("train split is empty")

    targets = list(split.test)
    date_excluded = 0
    metadata = config.metadata()
    if config.after_date is not None:
        try:
            cutoff = date.fromisoformat(config.after_date)
        except ValueError:
            raise UsageError(
                f"after_date must be an ISO-8601 date, got {config.after_date!r}"
            ) from None
        kept, undated = filter_by_date(targets, cutoff)
        date_excluded = len(targets) - len(kept)
        targets = kept
        metadata["after_date"] = config.after_date
        metadata["date_excluded"] = date_excluded
        metadata["date_undated"] = undated
        if not targets:
            raise DataError(f"no test records collected after {config.after_date}")
        split = replace(split, test=tuple(targets))

    repo, code_store, desc_store = prepare_repository(config, split)
    if config.shots > 0:
        _check_coverage(split, code_store, desc_store)
    client = LlmClient(config.provider, ResponseCache(config.cache_dir))
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(
                pool.map(lambda t: _assess_one(t, config, repo, client), targets)
            )
    else:
        outcomes = [_assess_one(target, config, repo, client) for target in targets]

    instances = tuple(instance for instance, _ in outcomes)
    results = tuple(result for _, result in outcomes)
    report = compute_metrics(results, metadata=metadata)
    return ExperimentOutcome(report=report, instances=instances, results=results)


# ---------------------------------------------------------------------------
# Ablation sweeps
# ---------------------------------------------------------------------------

_GRID_PARAMS = {
    "phi", "lambda", "shots", "ordering", "top_n", "selection",
    "split_seed", "budget",
}


@dataclass(frozen=True, slots=True)
class AblationRow:
    params: Dict[str, object]
    report: Optional[MetricsReport]
    instances: Tuple[InstanceRecord, ...] = ()
    error: Optional[str] = None

    def to_json_dict(self) -> dict:
        payload: dict = {"params": self.params}
        if self.report is not None:
            payload["report"] = self.report.to_json_dict()
        if self.error is not None:
            payload["error"] = self.error
        return payload


def _apply_param(config: RunConfig, name: str, value: object) -> RunConfig:
    if name == "phi":
        return replace(config, phi=float(value))
    if name == "lambda":
        return replace(config, lam=float(value))
    if name == "shots":
        return replace(config, shots=int(value))
    if name == "ordering":
        return replace(config, ordering=str(value))
    if name == "top_n":
        return replace(config, top_n=int(value))
    if name == "selection":
        return replace(config, selection=str(value))
    if name == "split_seed":
        return replace(config, seed=int(value))
    if name == "budget":
        return replace(config, budget=int(value))
    raise UsageError(f"unknown grid parameter {name!r}; expected one of {sorted(_GRID_PARAMS)}")


def parse_grid_axis(spec: str) -> Tuple[str, List[object]]:
    """Parse one grid axis: ``phi=0:1:0.1`` (range) or ``shots=0,1,4,5`` (list)."""
    name, sep, body = spec.partition("=")
    name = name.strip()
    if not sep or not body:
        raise UsageError(f"grid axis {spec!r} must look like name=values")
    if name not in _GRID_PARAMS:
        raise UsageError(f"unknown grid parameter {name!r}; expected one of {sorted(_GRID_PARAMS)}")
    if ":" in body:
        pieces = body.split(":")
        if len(pieces) != 3:
            raise UsageError(f"grid range {body!r} must be start:stop:step")
        try:
            start, stop, step = (float(p) for p in pieces)
        except ValueError:
            raise UsageError(f"grid range {body!r} has non-numeric parts") from None
        if step <= 0 or stop < start:
            raise UsageError(f"grid range {body!r} must increase")
        steps = int(round((stop - start) / step))
        decimals = max(_decimals(p) for p in pieces)
        values: List[object] = [round(start + i * step, decimals) for i in range(steps + 1)]
        return name, values
    values = []
    for part in body.split(","):
        part = part.strip()
        try:
            values.append(float(part) if "." in part else int(part))
        except ValueError:
            values.append(part)
    return name, values


def _decimals(text: str) -> int:
    _, sep, frac = text.partition(".")
    return len(frac) if sep else 0


def run_ablation(
    base: RunConfig, grid: Dict[str, Sequence[object]]
) -> List[AblationRow]:
    """One run per grid cell (cartesian product over the axes).

    A failing cell is recorded with its error message and the sweep
    continues.
    """
    if not grid:
        raise UsageError("ablation grid is empty")
    names = list(grid)
    rows: List[AblationRow] = []
    for combo in itertools.product(*(grid[name] for name in names)):
        params = dict(zip(names, combo))
        config = base
        for name, value in params.items():
            config = _apply_param(config, name, value)
        try:
            outcome = run_experiment(config)
            rows.append(
                AblationRow(params=params, report=outcome.report, instances=outcome.instances)
            )
        except VulnsevError as exc:
            rows.append(AblationRow(params=params, report=None, error=str(exc)))
    return rows


def _percent(value: float) -> str:
    return f"{100.0 * value:.2f}"


def ablation_table(rows: Sequence[AblationRow]) -> str:
    """Render sweep results with the familiar two-ratio / setting columns."""
    if not rows:
        return ""
    names = list(rows[0].params)
    header: List[str]
    if names == ["phi"]:
        header = ["CodeSim", "TextSim"]
    elif names == ["lambda"]:
        header = ["SynSim", "LexSim"]
    elif names == ["shots"]:
        header = ["Setting"]
    elif names == ["ordering"]:
        header = ["Strategy"]
    else:
        header = names
    columns = header + ["Accuracy (%)", "F1-score (%)", "MCC (%)"]
    lines = ["\t".join(columns)]
    for row in rows:
        if names == ["phi"]:
            ratio = float(row.params["phi"])
            cells = [f"{ratio * 100:.0f}%", f"{(1 - ratio) * 100:.0f}%"]
        elif names == ["lambda"]:
            ratio = float(row.params["lambda"])
            cells = [f"{ratio * 100:.0f}%", f"{(1 - ratio) * 100:.0f}%"]
        elif names == ["shots"]:
            cells = [f"{row.params['shots']}-shot"]
        elif names == ["ordering"]:
            cells = [str(row.params["ordering"])]
        else:
            cells = [str(row.params[name]) for name in names]
        if row.report is None:
            cells += ["error", "error", row.error or "error"]
        else:
            cells += [
                _percent(row.report.accuracy),
                _percent(row.report.macro_f1),
                _percent(row.report.mcc),
            ]
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Similarity buckets
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class BucketReport:
    label: str
    size: int
    report: Optional[MetricsReport]

    def to_json_dict(self) -> dict:
        return {
            "label": self.label,
            "size": self.size,
            "report": None if self.report is None else self.report.to_json_dict(),
        }


def bucket_by_similarity(
    instances: Sequence[InstanceRecord],
    bounds: Tuple[float, float] = (0.2, 0.5),
) -> List[BucketReport]:
    """Partition instances by mean fused similarity and score each bucket.

    Buckets are [0, b0), [b0, b1), [b1, 1]; values outside [0, 1] land in
    the nearest end bucket. Buckets whose instances cover fewer than two
    classes get a metrics report flagged ``mcc_defined=False`` rather than
    being dropped; empty buckets are reported with size 0.
    """
    low, high = bounds
    if not 0.0 < low < high < 1.0:
        raise UsageError(f"bucket bounds must satisfy 0 < b0 < b1 < 1, got {bounds}")
    labels = [f"[0.0,{low})", f"[{low},{high})", f"[{high},1.0]"]
    groups: List[List[InstanceRecord]] = [[], [], []]
    for instance in instances:
        if instance.mean_fused is None:
            raise DataError(
                f"instance {instance.target_id!r} has no mean similarity (zero-shot run?)"
            )
        value = instance.mean_fused
        index = 0 if value < low else (1 if value < high else 2)
        groups[index].append(instance)
    reports: List[BucketReport] = []
    for label, group in zip(labels, groups):
        if not group:
            reports.append(BucketReport(label=label, size=0, report=None))
            continue
        report = metrics_from_labels(
            [instance.label_pair() for instance in group],
            metadata={"bucket": label},
        )
        reports.append(BucketReport(label=label, size=len(group), report=report))
    return reports


# ---------------------------------------------------------------------------
# Artifact writers (shared by the CLI and the test suite)
# ---------------------------------------------------------------------------


def write_report(report: MetricsReport, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(report.to_json_dict(), sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def write_instances(instances: Sequence[InstanceRecord], path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for instance in instances:
            handle.write(json.dumps(instance.to_json_dict(), sort_keys=True))
            handle.write("\n")


def read_instances(path: Path | str) -> List[InstanceRecord]:
    records: List[InstanceRecord] = []
    with Path(path).open("r", encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                records.append(InstanceRecord.from_json_dict(json.loads(line)))
    return records


def report_table(report: MetricsReport) -> str:
    """Human-readable summary mirroring the three-measure layout."""
    lines = [
        "Accuracy (%)\tF1-score (%)\tMCC (%)",
        f"{_percent(report.accuracy)}\t{_percent(report.macro_f1)}\t{_percent(report.mcc)}",
        "",
        "Class\tPrecision\tRecall\tF1\tSupport",
    ]
    for level in _LABELS:
        stats = report.per_class[level.value]
        lines.append(
            f"{level.value}\t{stats['precision']:.4f}\t{stats['recall']:.4f}"
            f"\t{stats['f1']:.4f}\t{int(stats['support'])}"
        )
    lines.append("")
    lines.append("Confusion (rows = truth, columns = predicted, last = invalid)")
    header = "\t".join(level.value for level in _LABELS) + "\tInvalid"
    lines.append("\t" + header)
    for i, level in enumerate(_LABELS):
        row = "\t".join(str(c) for c in report.confusion.counts[i])
        lines.append(f"{level.value}\t{row}\t{report.confusion.invalid[i]}")
    return "\n".join(lines) + "\n"
