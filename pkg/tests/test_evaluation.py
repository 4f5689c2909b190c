import json
import random
import subprocess
import sys
from pathlib import Path

import pytest

from oracles.metrics_oracle import definitional_metrics
from vulnsev.corpus import SEVERITY_ORDER, SeverityLevel, save_dataset, stratified_split
from vulnsev.errors import DataError, UsageError
from vulnsev.evaluation import (
    ConfusionMatrix,
    InstanceRecord,
    RunConfig,
    ablation_table,
    bucket_by_similarity,
    compute_metrics,
    metrics_from_labels,
    metrics_from_matrix,
    parse_grid_axis,
    run_ablation,
    run_experiment,
    write_instances,
    write_report,
)
from vulnsev.llmclient import AssessmentResult, ProviderConfig

LEVELS = list(SEVERITY_ORDER)

ORACLE_SCRIPT = Path(__file__).parent / "oracles" / "e2e_oracle.py"
FIXTURES = Path(__file__).parent / "fixtures"


def result(truth, predicted, target_id="t"):
    return AssessmentResult(
        target_id=target_id,
        truth=truth,
        predicted=predicted,
        raw_text="" if predicted is None else predicted.value,
        prompt_hash="x",
        from_cache=False,
        latency=0.0,
    )


def random_matrix(rng, max_count=50, invalid=False):
    counts = [[rng.randrange(0, max_count) for _ in range(4)] for _ in range(4)]
    inv = [rng.randrange(0, 5) if invalid else 0 for _ in range(4)]
    if sum(sum(r) for r in counts) + sum(inv) == 0:
        counts[0][0] = 1
    matrix = ConfusionMatrix()
    matrix.counts = counts
    matrix.invalid = inv
    return matrix


class TestComputeMetrics:
    def test_perfect_four_class(self):
        results = [result(level, level) for level in LEVELS for _ in range(3)]
        report = compute_metrics(results)
        assert report.accuracy == 1.0
        assert report.macro_f1 == 1.0
        assert report.mcc == 1.0

    def test_constant_predictor_on_balanced_two_class(self):
        results = []
        for i in range(10):
            truth = SeverityLevel.HIGH if i % 2 else SeverityLevel.LOW
            results.append(result(truth, SeverityLevel.HIGH, f"t{i}"))
        report = compute_metrics(results)
        assert report.accuracy == 0.5
        assert report.mcc == 0.0
        assert report.mcc_defined is False  # constant prediction: zero denominator

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            compute_metrics([])

    def test_invalid_counts_as_wrong_and_skips_predicted_column(self):
        results = [
            result(SeverityLevel.HIGH, SeverityLevel.HIGH, "a"),
            result(SeverityLevel.HIGH, None, "b"),
            result(SeverityLevel.LOW, SeverityLevel.LOW, "c"),
            result(SeverityLevel.LOW, None, "d"),
        ]
        report = compute_metrics(results)
        assert report.accuracy == 0.5
        assert report.confusion.invalid_count == 2
        assert report.confusion.predicted_totals() == [0, 1, 0, 1]
        assert report.confusion.truth_totals() == [0, 2, 0, 2]
        # Recall for High is 1/2 because the invalid instance still counts.
        assert report.per_class["High"]["recall"] == 0.5

    def test_committed_fixture_matrix(self):
        # Frozen values computed once with the definitional oracle
        # (exact rational arithmetic) for this fixed matrix.
        matrix = ConfusionMatrix()
        matrix.counts = [
            [5, 1, 0, 2],
            [0, 4, 2, 0],
            [1, 0, 3, 1],
            [0, 2, 0, 2],
        ]
        matrix.invalid = [1, 0, 1, 0]
        report = metrics_from_matrix(matrix)
        assert report.accuracy == pytest.approx(0.56, abs=1e-9)
        assert report.macro_f1 == pytest.approx(0.567987567987568, abs=1e-9)
        assert report.mcc == pytest.approx(0.4315684680816244, abs=1e-9)
        assert report.mcc_defined is True

    def test_oracle_equivalence_100_random_matrices(self):
        rng = random.Random(4242)
        for _ in range(100):
            matrix = random_matrix(rng, invalid=rng.random() < 0.5)
            report = metrics_from_matrix(matrix)
            accuracy, macro_f1, mcc, defined = definitional_metrics(
                matrix.counts, matrix.invalid
            )
            assert abs(report.accuracy - accuracy) < 1e-9
            assert abs(report.macro_f1 - macro_f1) < 1e-9
            assert abs(report.mcc - mcc) < 1e-9
            assert report.mcc_defined == defined

    def test_matches_sklearn_without_invalid(self):
        sklearn_metrics = pytest.importorskip("sklearn.metrics")
        rng = random.Random(99)
        for _ in range(30):
            pairs = [
                (rng.randrange(4), rng.randrange(4)) for _ in range(rng.randrange(20, 120))
            ]
            truths = [p[0] for p in pairs]
            preds = [p[1] for p in pairs]
            report = metrics_from_labels(
                [(LEVELS[t], LEVELS[p]) for t, p in pairs]
            )
            assert report.accuracy == pytest.approx(
                sklearn_metrics.accuracy_score(truths, preds), abs=1e-9
            )
            assert report.macro_f1 == pytest.approx(
                sklearn_metrics.f1_score(
                    truths, preds, average="macro", labels=[0, 1, 2, 3], zero_division=0
                ),
                abs=1e-9,
            )
            assert report.mcc == pytest.approx(
                sklearn_metrics.matthews_corrcoef(truths, preds), abs=1e-9
            )

    def test_mcc_bounds(self):
        rng = random.Random(5)
        for _ in range(200):
            report = metrics_from_matrix(random_matrix(rng, invalid=True))
            assert -1.0 <= report.mcc <= 1.0

    def test_mcc_one_iff_diagonal(self):
        rng = random.Random(6)
        for _ in range(50):
            matrix = ConfusionMatrix()
            present = rng.sample(range(4), rng.randrange(2, 5))
            for i in present:
                matrix.counts[i][i] = rng.randrange(1, 20)
            assert metrics_from_matrix(matrix).mcc == pytest.approx(1.0)
            i, j = rng.sample(range(4), 2)
            matrix.counts[i][j] += 1
            assert metrics_from_matrix(matrix).mcc < 1.0

    def test_permutation_invariance(self):
        rng = random.Random(7)
        results = [
            result(rng.choice(LEVELS), rng.choice(LEVELS + [None]), f"t{i}")
            for i in range(60)
        ]
        base = compute_metrics(results)
        shuffled = results[:]
        rng.shuffle(shuffled)
        other = compute_metrics(shuffled)
        assert other.accuracy == base.accuracy
        assert other.macro_f1 == base.macro_f1
        assert other.mcc == base.mcc

    def test_label_permutation_equivariance(self):
        rng = random.Random(8)
        pairs = [
            (rng.choice(LEVELS), rng.choice(LEVELS)) for _ in range(80)
        ]
        base = metrics_from_labels(pairs)
        mapping = dict(zip(LEVELS, [LEVELS[2], LEVELS[0], LEVELS[3], LEVELS[1]]))
        permuted = [(mapping[t], mapping[p]) for t, p in pairs]
        other = metrics_from_labels(permuted)
        assert other.accuracy == pytest.approx(base.accuracy, abs=1e-12)
        assert other.macro_f1 == pytest.approx(base.macro_f1, abs=1e-12)
        assert other.mcc == pytest.approx(base.mcc, abs=1e-12)


# ---------------------------------------------------------------------------
# Experiment runs on the fixture corpus
# ---------------------------------------------------------------------------


def make_splits(tmp_path, fixture_records, ratios=(0.7, 0.1, 0.2), seed=11):
    split = stratified_split(fixture_records, ratios=ratios, seed=seed)
    splits_dir = tmp_path / "splits"
    splits_dir.mkdir()
    for name, part in split.parts.items():
        save_dataset(part, splits_dir / f"{name}.jsonl")
    return splits_dir, split


def base_config(tmp_path, splits_dir, **overrides):
    fields = dict(
        code_vectors=str(FIXTURES / "fixture_code.vec"),
        desc_vectors=str(FIXTURES / "fixture_desc.vec"),
        splits_dir=str(splits_dir),
        cache_dir=str(tmp_path / "cache"),
        whitening_dim=8,
        shots=4,
        top_n=10,
        provider=ProviderConfig(kind="mock-copy-nearest"),
    )
    fields.update(overrides)
    return RunConfig(**fields)


class TestRunExperiment:
    def test_copy_nearest_matches_external_oracle(self, tmp_path, fixture_records):
        splits_dir, _ = make_splits(tmp_path, fixture_records)
        config = base_config(tmp_path, splits_dir)
        outcome = run_experiment(config)

        proc = subprocess.run(
            [
                sys.executable,
                str(ORACLE_SCRIPT),
                str(splits_dir),
                config.code_vectors,
                config.desc_vectors,
                str(config.lam),
                str(config.phi),
                str(config.top_n),
                str(config.whitening_dim),
            ],
            capture_output=True,
            text=True,
            check=True,
        )
        oracle = json.loads(proc.stdout)
        assert outcome.report.accuracy == oracle["accuracy"]
        for instance in outcome.instances:
            assert instance.predicted == oracle["predictions"][instance.target_id]

    def test_zero_shot_fixed_answer_accuracy(self, tmp_path, fixture_records):
        splits_dir, split = make_splits(tmp_path, fixture_records)
        config = base_config(
            tmp_path,
            splits_dir,
            shots=0,
            provider=ProviderConfig(kind="mock-fixed", answer="High"),
        )
        outcome = run_experiment(config)
        high_fraction = sum(
            1 for r in split.test if r.severity is SeverityLevel.HIGH
        ) / len(split.test)
        assert outcome.report.accuracy == pytest.approx(high_fraction)
        for instance in outcome.instances:
            assert instance.demo_ids == ()

    def test_warm_cache_rerun_is_byte_identical(self, tmp_path, fixture_records):
        splits_dir, _ = make_splits(tmp_path, fixture_records)
        config = base_config(tmp_path, splits_dir)
        first = run_experiment(config)
        second = run_experiment(config)  # warm cache now
        for outcome, sub in ((first, "a"), (second, "b")):
            out = tmp_path / sub
            write_report(outcome.report, out / "report.json")
            write_instances(outcome.instances, out / "instances.jsonl")
        assert (tmp_path / "a" / "report.json").read_bytes() == (
            tmp_path / "b" / "report.json"
        ).read_bytes()
        assert (tmp_path / "a" / "instances.jsonl").read_bytes() == (
            tmp_path / "b" / "instances.jsonl"
        ).read_bytes()
        assert all(r.from_cache for r in second.results)
        assert not any(r.from_cache for r in first.results)

    def test_workers_match_sequential(self, tmp_path, fixture_records):
        splits_dir, _ = make_splits(tmp_path, fixture_records)
        sequential = run_experiment(
            base_config(tmp_path, splits_dir, cache_dir=str(tmp_path / "c1"))
        )
        parallel = run_experiment(
            base_config(tmp_path, splits_dir, cache_dir=str(tmp_path / "c2"), workers=4)
        )
        assert sequential.instances == parallel.instances
        assert sequential.report.accuracy == parallel.report.accuracy

    def test_random_selection_is_seeded(self, tmp_path, fixture_records):
        splits_dir, _ = make_splits(tmp_path, fixture_records)
        config = base_config(tmp_path, splits_dir, selection="random")
        first = run_experiment(config)
        second = run_experiment(config)
        assert first.instances == second.instances

    def test_after_date_filters_test_split(self, tmp_path, fixture_records):
        splits_dir, split = make_splits(tmp_path, fixture_records)
        config = base_config(tmp_path, splits_dir, after_date="2023-06-30")
        outcome = run_experiment(config)
        expected = [
            r.id
            for r in split.test
            if r.collected_at is not None and r.collected_at.isoformat() > "2023-06-30"
        ]
        assert sorted(i.target_id for i in outcome.instances) == sorted(expected)
        assert outcome.report.metadata["after_date"] == "2023-06-30"
        assert outcome.report.metadata["date_excluded"] == len(split.test) - len(expected)

    def test_bad_after_date_rejected(self, tmp_path, fixture_records):
        splits_dir, _ = make_splits(tmp_path, fixture_records)
        config = base_config(tmp_path, splits_dir, after_date="July 2023")
        with pytest.raises(UsageError):
            run_experiment(config)

    def test_missing_vectors_fail_before_any_call(self, tmp_path, fixture_records):
        splits_dir, _ = make_splits(tmp_path, fixture_records)
        config = base_config(
            tmp_path, splits_dir, code_vectors=str(tmp_path / "missing.vec")
        )
        with pytest.raises(Exception):
            run_experiment(config)


class TestRunAblation:
    def test_phi_grid_three_points(self, tmp_path, fixture_records):
        splits_dir, _ = make_splits(tmp_path, fixture_records)
        config = base_config(tmp_path, splits_dir, shots=2)
        rows = run_ablation(config, {"phi": [0.0, 0.5, 1.0]})
        assert len(rows) == 3
        code_only = run_experiment(
            base_config(tmp_path, splits_dir, shots=2, phi=1.0)
        )
        assert rows[2].params == {"phi": 1.0}
        assert rows[2].report.accuracy == code_only.report.accuracy
        assert rows[2].report.mcc == code_only.report.mcc

    def test_shot_grid_zero_shot_row_has_no_demos(self, tmp_path, fixture_records):
        splits_dir, _ = make_splits(tmp_path, fixture_records)
        config = base_config(
            tmp_path,
            splits_dir,
            provider=ProviderConfig(kind="mock-fixed", answer="Medium"),
        )
        rows = run_ablation(config, {"shots": [0, 4]})
        assert len(rows) == 2
        zero_row = rows[0]
        assert zero_row.params == {"shots": 0}
        assert all(instance.demo_ids == () for instance in zero_row.instances)
        four_row = rows[1]
        assert all(len(instance.demo_ids) == 4 for instance in four_row.instances)

    def test_ordering_vacuous_for_single_demo(self, tmp_path, fixture_records):
        splits_dir, _ = make_splits(tmp_path, fixture_records)
        config = base_config(tmp_path, splits_dir, shots=1, seed=3)
        rows = run_ablation(config, {"ordering": ["similarity", "reverse"]})
        assert rows[0].report.accuracy == rows[1].report.accuracy
        assert rows[0].report.mcc == rows[1].report.mcc

    def test_failed_cell_recorded_and_sweep_continues(self, tmp_path, fixture_records):
        splits_dir, _ = make_splits(tmp_path, fixture_records)
        config = base_config(tmp_path, splits_dir, shots=2)
        rows = run_ablation(config, {"shots": [50, 2]})  # 50 > top_n fails
        assert rows[0].report is None and rows[0].error
        assert rows[1].report is not None

    def test_empty_grid_rejected(self, tmp_path, fixture_records):
        splits_dir, _ = make_splits(tmp_path, fixture_records)
        with pytest.raises(UsageError):
            run_ablation(base_config(tmp_path, splits_dir), {})

    def test_resplit_axis_reruns_with_each_seed(self, tmp_path, fixture_records):
        # Resplitting needs the raw dataset, not a fixed splits directory.
        dataset = tmp_path / "all.jsonl"
        save_dataset(fixture_records, dataset)
        config = RunConfig(
            code_vectors=str(FIXTURES / "fixture_code.vec"),
            desc_vectors=str(FIXTURES / "fixture_desc.vec"),
            dataset=str(dataset),
            ratios=(0.7, 0.1, 0.2),
            cache_dir=str(tmp_path / "cache"),
            whitening_dim=8,
            shots=2,
            provider=ProviderConfig(kind="mock-copy-nearest"),
        )
        rows = run_ablation(config, {"split_seed": [1, 2, 3]})
        assert [row.params["split_seed"] for row in rows] == [1, 2, 3]
        assert all(row.report is not None for row in rows)
        assert [row.report.metadata["seed"] for row in rows] == [1, 2, 3]
        targets = [tuple(i.target_id for i in row.instances) for row in rows]
        assert len(set(targets)) > 1  # different seeds draw different test sets


class TestParseGridAxis:
    def test_eleven_point_range(self):
        name, values = parse_grid_axis("phi=0:1:0.1")
        assert name == "phi"
        assert len(values) == 11
        assert values == [round(0.1 * i, 1) for i in range(11)]

    def test_comma_list(self):
        assert parse_grid_axis("shots=0,1,4,5") == ("shots", [0, 1, 4, 5])

    def test_string_values(self):
        assert parse_grid_axis("ordering=similarity,reverse") == (
            "ordering",
            ["similarity", "reverse"],
        )

    def test_unknown_parameter(self):
        with pytest.raises(UsageError):
            parse_grid_axis("gamma=1,2")

    def test_malformed(self):
        with pytest.raises(UsageError):
            parse_grid_axis("phi")


class TestAblationTable:
    def test_phi_table_columns(self, tmp_path, fixture_records):
        splits_dir, _ = make_splits(tmp_path, fixture_records)
        config = base_config(tmp_path, splits_dir, shots=1)
        rows = run_ablation(config, {"phi": [0.0, 1.0]})
        table = ablation_table(rows)
        header = table.splitlines()[0].split("\t")
        assert header == ["CodeSim", "TextSim", "Accuracy (%)", "F1-score (%)", "MCC (%)"]
        first = table.splitlines()[1].split("\t")
        assert first[0] == "0%" and first[1] == "100%"

    def test_shots_table_setting_column(self, tmp_path, fixture_records):
        splits_dir, _ = make_splits(tmp_path, fixture_records)
        config = base_config(
            tmp_path,
            splits_dir,
            provider=ProviderConfig(kind="mock-fixed", answer="Low"),
        )
        rows = run_ablation(config, {"shots": [0, 1]})
        lines = ablation_table(rows).splitlines()
        assert lines[0].split("\t")[0] == "Setting"
        assert lines[1].startswith("0-shot")
        assert lines[2].startswith("1-shot")


class TestBuckets:
    def _instance(self, mean, truth=SeverityLevel.HIGH, predicted=SeverityLevel.HIGH, tid="t"):
        return InstanceRecord(
            target_id=tid,
            truth=truth.value,
            predicted=None if predicted is None else predicted.value,
            demo_ids=("d",),
            fused_scores=(mean,),
            mean_fused=mean,
            prompt_hash="h",
        )

    def test_three_singleton_buckets(self):
        instances = [
            self._instance(0.1, tid="a"),
            self._instance(0.3, tid="b"),
            self._instance(0.7, tid="c"),
        ]
        buckets = bucket_by_similarity(instances)
        assert [b.size for b in buckets] == [1, 1, 1]

    def test_empty_buckets_reported_as_zero(self):
        instances = [self._instance(0.6, tid="a"), self._instance(0.9, tid="b")]
        buckets = bucket_by_similarity(instances)
        assert [b.size for b in buckets] == [0, 0, 2]
        assert buckets[0].report is None

    def test_single_class_bucket_flagged_undefined_mcc(self):
        instances = [
            self._instance(0.1, truth=SeverityLevel.HIGH, predicted=SeverityLevel.HIGH, tid="a"),
            self._instance(0.15, truth=SeverityLevel.HIGH, predicted=SeverityLevel.HIGH, tid="b"),
        ]
        buckets = bucket_by_similarity(instances)
        assert buckets[0].report is not None
        assert buckets[0].report.mcc_defined is False

    def test_fixture_log_matches_hand_computation(self):
        # By hand: bucket 1 holds 4 instances, 3 correct -> accuracy 0.75;
        # bucket 2 holds 2 instances, 1 correct -> accuracy 0.5.
        instances = [
            self._instance(0.25, SeverityLevel.HIGH, SeverityLevel.HIGH, "a"),
            self._instance(0.30, SeverityLevel.LOW, SeverityLevel.LOW, "b"),
            self._instance(0.35, SeverityLevel.MEDIUM, SeverityLevel.HIGH, "c"),
            self._instance(0.45, SeverityLevel.CRITICAL, SeverityLevel.CRITICAL, "d"),
            self._instance(0.55, SeverityLevel.HIGH, SeverityLevel.HIGH, "e"),
            self._instance(0.60, SeverityLevel.LOW, None, "f"),
        ]
        buckets = bucket_by_similarity(instances)
        assert buckets[0].size == 0
        assert buckets[1].size == 4
        assert buckets[1].report.accuracy == 0.75
        assert buckets[2].size == 2
        assert buckets[2].report.accuracy == 0.5

    def test_missing_mean_rejected(self):
        instance = InstanceRecord(
            target_id="z", truth="High", predicted="High", demo_ids=(),
            fused_scores=(), mean_fused=None, prompt_hash="h",
        )
        with pytest.raises(DataError):
            bucket_by_similarity([instance])

    def test_bad_bounds_rejected(self):
        with pytest.raises(UsageError):
            bucket_by_similarity([], bounds=(0.5, 0.2))
