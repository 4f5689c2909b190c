"""Command-line entry point.

Subcommands cover the whole pipeline: ``ingest`` (validate and clean raw
data), ``stats``, ``split``, ``whiten``, ``index`` (store/coverage
checks), ``retrieve`` (inspect demonstration rankings), ``prompt``,
``assess`` (single target), ``evaluate`` (full test split), ``ablate``
(parameter sweeps) and ``buckets`` (similarity-range analysis).

Settings resolve with CLI flags over config-file values over built-in
defaults. Exit codes: 0 success, 2 usage, 3 data error, 4 provider
error, 5 internal error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import evaluation
from .codeparse import parse_to_ast_sequence
from .corpus import (
    SEVERITY_ORDER,
    StatsReport,
    VulnerabilityRecord,
    corpus_stats,
    load_dataset,
    save_dataset,
    stratified_split,
)
from .embedstore import (
    default_whitening_dim,
    fit_whitening,
    load_vectors,
    save_whitening,
)
from .errors import (
    DataError,
    DatasetError,
    NoSeverityError,
    ParseFailure,
    ProviderError,
    ScoreRangeError,
    UsageError,
    VulnsevError,
)
from .evaluation import (
    RunConfig,
    ablation_table,
    bucket_by_similarity,
    parse_grid_axis,
    read_instances,
    report_table,
    run_ablation,
    run_experiment,
    write_instances,
    write_report,
)
from .llmclient import LlmClient, ProviderConfig, ResponseCache
from .prompting import build_prompt, order_demos
from .similarity import DemoRepository, select_demonstrations

_RUN_CONFIG_KEYS = {
    "dataset", "splits_dir", "code_vectors", "desc_vectors", "cache_dir",
    "lambda", "phi", "top_n", "shots", "ordering", "seed", "ratios",
    "whitening_dim", "budget", "language", "ast_cap", "selection",
    "instruction", "workers", "after_date", "provider",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vulnsev",
        description="Few-shot vulnerability severity assessment pipeline",
    )
    parser.add_argument("--config", help="JSON config file (flags still win)")
    parser.add_argument("--out", help="output directory", default=None)
    parser.add_argument("--cache-dir", help="response cache directory", default=None)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True)

    def add_data_flags(p, need_vectors=True):
        p.add_argument("--dataset", help="dataset JSONL file")
        p.add_argument("--splits", dest="splits_dir", help="directory with train/validation/test.jsonl")
        if need_vectors:
            p.add_argument("--code-vectors", help="VEC1 file of code embeddings")
            p.add_argument("--desc-vectors", help="VEC1 file of description embeddings")
            p.add_argument("--whitening-dim", type=int, default=None)
        p.add_argument("--language", choices=["c", "cpp", "auto"], default=None)

    def add_knob_flags(p):
        p.add_argument("--lambda", dest="lam", type=float, default=None,
                       help="syntactic weight inside code similarity")
        p.add_argument("--phi", type=float, default=None,
                       help="code weight in the code/text fusion")
        p.add_argument("--top-n", type=int, default=None, help="stage-1 candidate count")
        p.add_argument("--shots", type=int, default=None, help="demonstrations per prompt")

    def add_prompt_flags(p):
        p.add_argument("--ordering", choices=["similarity", "reverse", "random"], default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--budget", type=int, default=None, help="prompt token budget")

    def add_provider_flags(p):
        p.add_argument("--provider", default=None,
                       help="http | mock-fixed:<answer> | mock-copy-nearest")
        p.add_argument("--base-url", default=None)
        p.add_argument("--model", default=None)
        p.add_argument("--api-key-env", default=None)
        p.add_argument("--max-retries", type=int, default=None)
        p.add_argument("--timeout", type=float, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--retry-invalid", choices=["never", "once"], default=None)

    p = sub.add_parser("ingest", help="validate raw records, write clean dataset + exclusions")
    p.add_argument("--dataset", required=True)
    p.add_argument("--language", choices=["c", "cpp", "auto"], default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="per-class counts and token statistics")
    add_data_flags(p, need_vectors=False)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("split", help="stratified train/validation/test split")
    p.add_argument("--dataset", required=True)
    p.add_argument("--ratios", default=None, help="three comma-separated fractions")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("whiten", help="fit a whitening model from a vector store")
    p.add_argument("--vectors", required=True)
    p.add_argument("--dim", type=int, default=None, help="target dimension (default: source)")
    p.add_argument("--ids-from", help="restrict fitting to ids in this dataset file")
    p.set_defaults(func=cmd_whiten)

    p = sub.add_parser("index", help="check vector stores against a dataset")
    p.add_argument("--dataset")
    p.add_argument("--code-vectors")
    p.add_argument("--desc-vectors")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("retrieve", help="rank demonstrations for one target")
    p.add_argument("--target", required=True, help="record id")
    add_data_flags(p)
    add_knob_flags(p)
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("prompt", help="render the prompt for one target")
    p.add_argument("--target", required=True, help="record id")
    add_data_flags(p)
    add_knob_flags(p)
    add_prompt_flags(p)
    p.set_defaults(func=cmd_prompt)

    p = sub.add_parser("assess", help="assess one target through the provider")
    p.add_argument("--target", required=True, help="record id")
    add_data_flags(p)
    add_knob_flags(p)
    add_prompt_flags(p)
    add_provider_flags(p)
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("evaluate", help="assess the whole test split and score it")
    add_data_flags(p)
    add_knob_flags(p)
    add_prompt_flags(p)
    add_provider_flags(p)
    p.add_argument("--selection", choices=["relevance", "random"], default=None)
    p.add_argument("--after-date", dest="after_date", default=None,
                   help="keep only test records collected strictly after this date")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="sweep parameters over a grid")
    add_data_flags(p)
    add_knob_flags(p)
    add_prompt_flags(p)
    add_provider_flags(p)
    p.add_argument("--selection", choices=["relevance", "random"], default=None)
    p.add_argument("--grid", action="append", required=True,
                   help="axis spec, e.g. phi=0:1:0.1 or shots=0,1,4,5 (repeatable)")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("buckets", help="per-similarity-range metrics from an instance log")
    p.add_argument("--instances", required=True, help="instances.jsonl from evaluate")
    p.add_argument("--bounds", default=None, help="two comma-separated bounds (default 0.2,0.5)")
    p.set_defaults(func=cmd_buckets)

    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)


# ---------------------------------------------------------------------------
# Settings resolution
# ---------------------------------------------------------------------------


def _load_config_file(path: Optional[str]) -> Dict[str, object]:
    if not path:
        return {}
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    unknown = set(raw) - _RUN_CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return raw


def _resolve_provider(args, file_cfg: Dict[str, object]) -> ProviderConfig:
    spec = getattr(args, "provider", None)
    if spec:
        provider = ProviderConfig.from_spec(spec)
    elif isinstance(file_cfg.get("provider"), dict):
        provider = ProviderConfig.from_json_dict(file_cfg["provider"])
    else:
        provider = ProviderConfig()
    overrides = {}
    for attr, key in (
        ("base_url", "base_url"),
        ("model", "model"),
        ("api_key_env", "api_key_env"),
        ("max_retries", "max_retries"),
        ("timeout", "timeout"),
    ):
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = value
    retry = getattr(args, "retry_invalid", None)
    if retry is not None:
        overrides["retry_invalid"] = retry == "once"
    if overrides:
        provider = dataclasses.replace(provider, **overrides)
    return provider


def _parse_ratios(text: str) -> Tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError(f"--ratios needs three comma-separated fractions, got {text!r}")
    try:
        a, b, c = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"--ratios has non-numeric parts: {text!r}") from None
    return a, b, c


def resolve_run_config(args) -> RunConfig:
    """Merge CLI flags over config-file values over RunConfig defaults."""
    file_cfg = _load_config_file(getattr(args, "config", None))
    values: Dict[str, object] = {}

    def pick(field: str, *sources):
        for value in sources:
            if value is not None:
                values[field] = value
                return

    pick("dataset", getattr(args, "dataset", None), file_cfg.get("dataset"))
    pick("splits_dir", getattr(args, "splits_dir", None), file_cfg.get("splits_dir"))
    pick("code_vectors", getattr(args, "code_vectors", None), file_cfg.get("code_vectors"))
    pick("desc_vectors", getattr(args, "desc_vectors", None), file_cfg.get("desc_vectors"))
    pick("cache_dir", getattr(args, "cache_dir", None), file_cfg.get("cache_dir"))
    pick("lam", getattr(args, "lam", None), file_cfg.get("lambda"))
    pick("phi", getattr(args, "phi", None), file_cfg.get("phi"))
    pick("top_n", getattr(args, "top_n", None), file_cfg.get("top_n"))
    pick("shots", getattr(args, "shots", None), file_cfg.get("shots"))
    pick("ordering", getattr(args, "ordering", None), file_cfg.get("ordering"))
    pick("seed", getattr(args, "seed", None), file_cfg.get("seed"))
    pick("whitening_dim", getattr(args, "whitening_dim", None), file_cfg.get("whitening_dim"))
    pick("budget", getattr(args, "budget", None), file_cfg.get("budget"))
    pick("language", getattr(args, "language", None), file_cfg.get("language"))
    pick("ast_cap", None, file_cfg.get("ast_cap"))
    pick("selection", getattr(args, "selection", None), file_cfg.get("selection"))
    pick("instruction", None, file_cfg.get("instruction"))
    pick("workers", getattr(args, "workers", None), file_cfg.get("workers"))
    pick("after_date", getattr(args, "after_date", None), file_cfg.get("after_date"))

    ratios = getattr(args, "ratios", None)
    if ratios is not None:
        values["ratios"] = _parse_ratios(ratios)
    elif file_cfg.get("ratios") is not None:
        raw = file_cfg["ratios"]
        if not isinstance(raw, (list, tuple)) or len(raw) != 3:
            raise UsageError("config ratios must be a list of three fractions")
        values["ratios"] = tuple(float(r) for r in raw)

    if not values.get("code_vectors") or not values.get("desc_vectors"):
        raise UsageError("both --code-vectors and --desc-vectors are required")
    values["provider"] = _resolve_provider(args, file_cfg)
    return RunConfig(**values)


def _out_dir(args) -> Path:
    out = Path(getattr(args, "out", None) or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_ingest(args) -> int:
    """Tolerant load of raw records; writes the clean set plus an
    exclusions report instead of guessing a silent filter order."""
    out = _out_dir(args)
    language = args.language or "auto"
    kept: List[VulnerabilityRecord] = []
    exclusions: List[dict] = []
    seen: set[str] = set()
    path = Path(args.dataset)
    if not path.exists():
        raise DatasetError(f"dataset not found: {path}")
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                exclusions.append({"line": lineno, "reason": f"malformed-json: {exc}"})
                continue
            rid = str(raw.get("id", f"line-{lineno}"))
            try:
                record = VulnerabilityRecord.from_json_dict(raw)
            except (DatasetError, ScoreRangeError, NoSeverityError) as exc:
                exclusions.append({"line": lineno, "id": rid, "reason": str(exc)})
                continue
            if record.id in seen:
                exclusions.append({"line": lineno, "id": rid, "reason": "duplicate-id"})
                continue
            try:
                parse_to_ast_sequence(record.code, language=language)
            except ParseFailure as exc:
                exclusions.append({"line": lineno, "id": rid, "reason": f"unparseable-code: {exc}"})
                continue
            seen.add(record.id)
            kept.append(record)
    save_dataset(kept, out / "dataset.jsonl")
    with (out / "exclusions.jsonl").open("w", encoding="utf-8") as handle:
        for entry in exclusions:
            handle.write(json.dumps(entry, sort_keys=True) + "\n")
    print(f"kept {len(kept)} records, excluded {len(exclusions)}")
    print(f"wrote {out / 'dataset.jsonl'} and {out / 'exclusions.jsonl'}")
    return 0


_STAT_ROWS = [
    ("Number", lambda s: str(s.total)),
    ("Number of Critical severity", lambda s: str(s.counts[SEVERITY_ORDER[0]])),
    ("Number of High severity", lambda s: str(s.counts[SEVERITY_ORDER[1]])),
    ("Number of Medium severity", lambda s: str(s.counts[SEVERITY_ORDER[2]])),
    ("Number of Low severity", lambda s: str(s.counts[SEVERITY_ORDER[3]])),
    ("Average tokens in codes", lambda s: f"{s.code_tokens_mean:.0f}"),
    ("Average tokens in descriptions", lambda s: f"{s.description_tokens_mean:.0f}"),
    ("Median tokens in codes", lambda s: f"{s.code_tokens_median:.0f}"),
    ("Median tokens in descriptions", lambda s: f"{s.description_tokens_median:.0f}"),
]


def stats_table(reports: Dict[str, StatsReport]) -> str:
    lines = ["Statistic\t" + "\t".join(reports)]
    for label, cell in _STAT_ROWS:
        lines.append(label + "\t" + "\t".join(cell(report) for report in reports.values()))
    return "\n".join(lines) + "\n"


def cmd_stats(args) -> int:
    if args.splits_dir:
        base = Path(args.splits_dir)
        reports = {
            name.capitalize(): corpus_stats(load_dataset(base / f"{name}.jsonl"))
            for name in ("train", "validation", "test")
        }
    elif args.dataset:
        reports = {"All": corpus_stats(load_dataset(args.dataset))}
    else:
        raise UsageError("stats needs --dataset or --splits")
    table = stats_table(reports)
    print(table, end="")
    if args.out:
        out = _out_dir(args)
        (out / "stats.txt").write_text(table, encoding="utf-8")
    return 0


def cmd_split(args) -> int:
    out = _out_dir(args)
    records = load_dataset(args.dataset)
    ratios = _parse_ratios(args.ratios) if args.ratios else (0.8, 0.1, 0.1)
    seed = args.seed if args.seed is not None else 42
    split = stratified_split(records, ratios=ratios, seed=seed)
    for name, part in split.parts.items():
        save_dataset(part, out / f"{name}.jsonl")
    manifest = {
        "seed": split.seed,
        "ratios": list(split.ratios),
        "counts": {name: len(part) for name, part in split.parts.items()},
    }
    (out / "split.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    print(
        f"train={len(split.train)} validation={len(split.validation)} test={len(split.test)}"
    )
    return 0


def cmd_whiten(args) -> int:
    out = _out_dir(args)
    store = load_vectors(args.vectors)
    if args.ids_from:
        ids = [record.id for record in load_dataset(args.ids_from)]
        store = store.restrict(ids)
    dim = default_whitening_dim(store.dim) if args.dim is None else args.dim
    model = fit_whitening(store, target_dim=dim)
    path = out / "whitening.json"
    save_whitening(model, path)
    print(f"fitted whitening {model.source_dim} -> {model.target_dim} on {len(store)} vectors")
    print(f"wrote {path}")
    return 0


def cmd_index(args) -> int:
    if not args.code_vectors and not args.desc_vectors:
        raise UsageError("index needs --code-vectors and/or --desc-vectors")
    summary: Dict[str, object] = {}
    records = load_dataset(args.dataset) if args.dataset else None
    for label, path in (("code", args.code_vectors), ("description", args.desc_vectors)):
        if not path:
            continue
        store = load_vectors(path, kind=label)
        info: Dict[str, object] = {"dim": store.dim, "count": len(store)}
        if records is not None:
            missing = [r.id for r in records if r.id not in store.entries]
            info["missing"] = missing
            info["covered"] = len(records) - len(missing)
        summary[label] = info
        print(f"{label}: dim={store.dim} count={len(store)}", end="")
        if records is not None:
            print(f" covered={info['covered']}/{len(records)}", end="")
        print()
    if args.out:
        out = _out_dir(args)
        (out / "index.json").write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    return 0


def _single_target_setup(args):
    """Shared plumbing for retrieve/prompt/assess: build repo + find target."""
    config = resolve_run_config(args)
    if config.splits_dir:
        split = evaluation.load_split(config)
        everything = list(split.train) + list(split.validation) + list(split.test)
        repo_records = list(split.train)
    elif config.dataset:
        everything = load_dataset(config.dataset)
        repo_records = [r for r in everything if r.id != args.target]
    else:
        raise UsageError("needs --dataset or --splits")
    by_id = {record.id: record for record in everything}
    if args.target not in by_id:
        raise DataError(f"target id {args.target!r} not found")
    target = by_id[args.target]
    code_store = load_vectors(config.code_vectors, kind="code")
    desc_store = load_vectors(config.desc_vectors, kind="description")
    dim = (
        default_whitening_dim(code_store.dim)
        if config.whitening_dim is None
        else config.whitening_dim
    )
    whitening = fit_whitening(
        code_store.restrict([r.id for r in repo_records]), target_dim=dim
    )
    repo = DemoRepository(
        records=repo_records,
        code_vectors=code_store,
        desc_vectors=desc_store,
        whitening=whitening,
        language=config.language,
        ast_cap=config.ast_cap,
    )
    return config, repo, target


def cmd_retrieve(args) -> int:
    config, repo, target = _single_target_setup(args)
    demos = select_demonstrations(
        target, repo, n=config.top_n, k=config.shots, lam=config.lam, phi=config.phi
    )
    print(f"target {target.id} (truth: {target.severity.value})")
    print("rank\tid\tseverity\tfused\tcode_sim\ttext_sim\tsyn_sim\tlex_sim\tsem_dist")
    for rank, (record, b) in enumerate(demos.demos, start=1):
        print(
            f"{rank}\t{record.id}\t{record.severity.value}\t{b.fused:.6f}"
            f"\t{b.code_sim:.6f}\t{b.text_sim:.6f}\t{b.syn_sim:.6f}"
            f"\t{b.lex_sim:.6f}\t{b.sem_dist:.6f}"
        )
    if args.out:
        out = _out_dir(args)
        payload = {
            "target_id": demos.target_id,
            "k": demos.k,
            "n": demos.n,
            "demos": [b.to_json_dict() for _, b in demos.demos],
        }
        (out / "retrieval.json").write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return 0


def _bundle_for_target(args):
    config, repo, target = _single_target_setup(args)
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
    return config, target, bundle


def cmd_prompt(args) -> int:
    _, _, bundle = _bundle_for_target(args)
    print(bundle.full_text)
    if args.out:
        out = _out_dir(args)
        (out / "prompt.txt").write_text(bundle.full_text, encoding="utf-8")
    return 0


def cmd_assess(args) -> int:
    config, target, bundle = _bundle_for_target(args)
    client = LlmClient(config.provider, ResponseCache(config.cache_dir))
    result = client.assess(bundle, target_id=target.id, truth=target.severity)
    payload = {
        "target_id": result.target_id,
        "truth": result.truth.value,
        "predicted": None if result.predicted is None else result.predicted.value,
        "raw_text": result.raw_text,
        "prompt_hash": result.prompt_hash,
        "from_cache": result.from_cache,
    }
    print(json.dumps(payload, sort_keys=True))
    if args.out:
        out = _out_dir(args)
        (out / "assessment.json").write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return 0


def cmd_evaluate(args) -> int:
    config = resolve_run_config(args)
    outcome = run_experiment(config)
    out = _out_dir(args)
    write_report(outcome.report, out / "report.json")
    write_instances(outcome.instances, out / "instances.jsonl")
    (out / "report.txt").write_text(report_table(outcome.report), encoding="utf-8")
    invalid = [r for r in outcome.results if r.is_invalid]
    with (out / "invalid.jsonl").open("w", encoding="utf-8") as handle:
        for result in invalid:
            handle.write(
                json.dumps(
                    {"target_id": result.target_id, "raw_text": result.raw_text},
                    sort_keys=True,
                )
                + "\n"
            )
    print(report_table(outcome.report), end="")
    print(f"wrote report.json, report.txt, instances.jsonl under {out}")
    return 0


def cmd_ablate(args) -> int:
    config = resolve_run_config(args)
    grid: Dict[str, List[object]] = {}
    for spec in args.grid:
        name, values = parse_grid_axis(spec)
        grid[name] = values
    rows = run_ablation(config, grid)
    out = _out_dir(args)
    with (out / "ablation.jsonl").open("w", encoding="utf-8") as handle:
        for index, row in enumerate(rows):
            payload = row.to_json_dict()
            payload["cell"] = index
            handle.write(json.dumps(payload, sort_keys=True) + "\n")
    cells_dir = out / "cells"
    cells_dir.mkdir(exist_ok=True)
    for index, row in enumerate(rows):
        if row.instances:
            write_instances(row.instances, cells_dir / f"cell-{index:03d}-instances.jsonl")
    table = ablation_table(rows)
    (out / "ablation.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    return 0


def cmd_buckets(args) -> int:
    instances = read_instances(args.instances)
    bounds = (0.2, 0.5)
    if args.bounds:
        parts = args.bounds.split(",")
        if len(parts) != 2:
            raise UsageError(f"--bounds needs two comma-separated values, got {args.bounds!r}")
        try:
            bounds = (float(parts[0]), float(parts[1]))
        except ValueError:
            raise UsageError(f"--bounds has non-numeric parts: {args.bounds!r}") from None
    reports = bucket_by_similarity(instances, bounds=bounds)
    print("bucket\tsize\taccuracy\tf1\tmcc\tmcc_defined")
    for bucket in reports:
        if bucket.report is None:
            print(f"{bucket.label}\t0\t-\t-\t-\t-")
        else:
            r = bucket.report
            print(
                f"{bucket.label}\t{bucket.size}\t{r.accuracy:.4f}"
                f"\t{r.macro_f1:.4f}\t{r.mcc:.4f}\t{r.mcc_defined}"
            )
    if args.out:
        out = _out_dir(args)
        (out / "buckets.json").write_text(
            json.dumps([b.to_json_dict() for b in reports], sort_keys=True, indent=2) + "\n"
        )
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except ProviderError as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return 4
    except VulnsevError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 5
    except Exception as exc:  # noqa: BLE001 - last-resort exit-code mapping
        print(f"internal error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
