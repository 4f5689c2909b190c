import json

import numpy as np
import pytest

from vulnsev.embedstore import (
    apply_whitening,
    build_store,
    fit_whitening,
    load_vectors,
    load_whitening,
    save_vectors,
    save_whitening,
)
from vulnsev.errors import MissingVectorError, UsageError, VectorFormatError


def random_store(n, dim, seed=0, kind=""):
    rng = np.random.RandomState(seed)
    return build_store(
        {f"id-{i:04d}": rng.normal(size=dim).astype(np.float32) for i in range(n)},
        kind=kind,
    )


class TestVec1Format:
    def test_roundtrip_bit_identical(self, tmp_path):
        store = random_store(7, 4, seed=3)
        first = tmp_path / "a.vec"
        second = tmp_path / "b.vec"
        save_vectors(store, first)
        save_vectors(load_vectors(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_header_counts(self, tmp_path):
        store = random_store(2, 4)
        path = tmp_path / "v.vec"
        save_vectors(store, path)
        loaded = load_vectors(path)
        assert loaded.dim == 4
        assert len(loaded) == 2

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "v.vec"
        path.write_bytes(b"NOPE" + b"\x00" * 12)
        with pytest.raises(VectorFormatError, match="magic"):
            load_vectors(path)

    def test_truncated_payload(self, tmp_path):
        store = random_store(3, 4)
        path = tmp_path / "v.vec"
        save_vectors(store, path)
        data = path.read_bytes()
        path.write_bytes(data[:-5])
        with pytest.raises(VectorFormatError, match="truncated"):
            load_vectors(path)

    def test_trailing_bytes(self, tmp_path):
        store = random_store(3, 4)
        path = tmp_path / "v.vec"
        save_vectors(store, path)
        path.write_bytes(path.read_bytes() + b"xx")
        with pytest.raises(VectorFormatError, match="trailing"):
            load_vectors(path)

    def test_duplicate_id(self, tmp_path):
        import struct

        payload = b"VEC1" + struct.pack("<I", 1) + struct.pack("<Q", 2)
        entry = struct.pack("<H", 2) + b"ab" + struct.pack("<f", 1.0)
        (tmp_path / "v.vec").write_bytes(payload + entry + entry)
        with pytest.raises(VectorFormatError, match="duplicate"):
            load_vectors(tmp_path / "v.vec")

    def test_mixed_row_length_rejected_at_build(self):
        with pytest.raises(VectorFormatError):
            build_store({"a": [1.0, 2.0, 3.0], "b": [1.0, 2.0]})

    def test_missing_vector_names_id(self):
        store = random_store(2, 3, kind="code")
        with pytest.raises(MissingVectorError, match="nope"):
            store.vector("nope")

    def test_restrict_preserves_order(self):
        store = random_store(5, 3)
        sub = store.restrict(["id-0003", "id-0001"])
        assert sub.ids() == ["id-0001", "id-0003"]


class TestFitWhitening:
    def test_hand_eigendecomposition_two_points(self):
        # Corpus {(1,0), (-1,0)}: mean 0, covariance diag(1, 0); the top
        # direction is the x axis, so d=1 maps the points to +/-1.
        store = build_store({"a": [1.0, 0.0], "b": [-1.0, 0.0]})
        model = fit_whitening(store, target_dim=1)
        out_a = apply_whitening(model, [1.0, 0.0])[0]
        out_b = apply_whitening(model, [-1.0, 0.0])[0]
        assert out_a == pytest.approx(-out_b, abs=1e-12)
        assert abs(out_a) == pytest.approx(1.0, rel=1e-6)

    def test_matches_independent_numpy_oracle(self):
        # Re-derive the transform directly from its definition.
        store = random_store(40, 6, seed=11)
        model = fit_whitening(store, target_dim=4)
        matrix = np.stack([v.astype(np.float64) for v in store.entries.values()])
        mean = matrix.mean(axis=0)
        cov = (matrix - mean).T @ (matrix - mean) / len(matrix)
        eigenvalues, eigenvectors = np.linalg.eigh(cov)
        idx = np.argsort(eigenvalues)[::-1]
        expected = np.abs(eigenvectors[:, idx[:4]] / np.sqrt(eigenvalues[idx[:4]] + 1e-9))
        assert np.allclose(np.abs(model.projection), expected, atol=1e-9)

    def test_full_dim_isotropy(self):
        store = random_store(200, 8, seed=5)
        model = fit_whitening(store)
        transformed = np.stack(
            [apply_whitening(model, v) for v in store.entries.values()]
        )
        cov = transformed.T @ transformed / len(transformed)
        assert np.linalg.norm(cov - np.eye(8)) < 1e-6

    def test_reduced_dim_isotropy_500x32_to_8(self):
        store = random_store(500, 32, seed=12)
        model = fit_whitening(store, target_dim=8)
        transformed = np.stack(
            [apply_whitening(model, v) for v in store.entries.values()]
        )
        cov = transformed.T @ transformed / len(transformed)
        assert np.linalg.norm(cov - np.eye(8), ord="fro") < 1e-6

    def test_identical_vectors_map_to_zero(self):
        store = build_store({"a": [2.0, 3.0], "b": [2.0, 3.0], "c": [2.0, 3.0]})
        model = fit_whitening(store, target_dim=2)
        out = apply_whitening(model, [2.0, 3.0])
        assert np.allclose(out, 0.0)

    def test_eigenvalue_ordering_keeps_top_variance_first(self):
        rng = np.random.RandomState(3)
        data = rng.normal(size=(300, 5)) * np.array([5.0, 3.0, 2.0, 1.0, 0.5])
        store = build_store({f"i{i}": row.astype(np.float32) for i, row in enumerate(data)})
        model = fit_whitening(store)
        matrix = np.stack([v.astype(np.float64) for v in store.entries.values()])
        centered = matrix - model.mean
        directions = model.projection / np.linalg.norm(model.projection, axis=0)
        variances = ((centered @ directions) ** 2).mean(axis=0)
        assert all(variances[i] >= variances[i + 1] - 1e-9 for i in range(4))

    def test_too_few_vectors(self):
        store = build_store({"a": [1.0, 2.0]})
        with pytest.raises(UsageError):
            fit_whitening(store)

    def test_dim_too_large(self):
        store = random_store(5, 3)
        with pytest.raises(UsageError):
            fit_whitening(store, target_dim=4)

    def test_fit_is_deterministic(self):
        first = fit_whitening(random_store(30, 6, seed=2), target_dim=3)
        second = fit_whitening(random_store(30, 6, seed=2), target_dim=3)
        assert np.array_equal(first.projection, second.projection)
        assert np.array_equal(first.mean, second.mean)


class TestApplyWhitening:
    def test_mean_maps_to_zero(self):
        store = random_store(20, 4, seed=9)
        model = fit_whitening(store, target_dim=2)
        assert np.allclose(apply_whitening(model, model.mean), 0.0)

    def test_affine_linearity(self):
        store = random_store(20, 4, seed=9)
        model = fit_whitening(store, target_dim=3)
        rng = np.random.RandomState(1)
        for _ in range(20):
            a = rng.normal(size=4)
            b = rng.normal(size=4)
            alpha = rng.uniform()
            lhs = apply_whitening(model, alpha * a + (1 - alpha) * b)
            rhs = alpha * apply_whitening(model, a) + (1 - alpha) * apply_whitening(model, b)
            assert np.allclose(lhs, rhs, atol=1e-9)

    def test_difference_identity(self):
        store = random_store(20, 4, seed=9)
        model = fit_whitening(store, target_dim=2)
        a = np.array([1.0, 2.0, 3.0, 4.0])
        b = np.array([0.5, -1.0, 2.0, 0.0])
        lhs = apply_whitening(model, a) - apply_whitening(model, b)
        rhs = (a - b) @ model.projection
        assert np.allclose(lhs, rhs, atol=1e-12)

    def test_dimension_mismatch(self):
        store = random_store(20, 4, seed=9)
        model = fit_whitening(store, target_dim=2)
        with pytest.raises(UsageError):
            apply_whitening(model, [1.0, 2.0, 3.0])

    def test_golden_fixture(self, fixtures_dir):
        payload = json.loads((fixtures_dir / "golden_whitening.json").read_text())
        from vulnsev.embedstore import WhiteningModel

        model = WhiteningModel(
            mean=np.asarray(payload["model"]["mean"]),
            projection=np.asarray(payload["model"]["projection"]),
            source_dim=payload["model"]["source_dim"],
            target_dim=payload["model"]["target_dim"],
        )
        out = apply_whitening(model, payload["input"])
        assert np.allclose(out, payload["expected"], atol=1e-12)


class TestModelPersistence:
    def test_roundtrip(self, tmp_path):
        model = fit_whitening(random_store(25, 5, seed=4), target_dim=3)
        path = tmp_path / "model.json"
        save_whitening(model, path)
        loaded = load_whitening(path)
        assert np.array_equal(loaded.mean, model.mean)
        assert np.array_equal(loaded.projection, model.projection)
        assert (loaded.source_dim, loaded.target_dim) == (5, 3)

    def test_byte_reproducible(self, tmp_path):
        model = fit_whitening(random_store(25, 5, seed=4), target_dim=3)
        first = tmp_path / "a.json"
        second = tmp_path / "b.json"
        save_whitening(model, first)
        save_whitening(model, second)
        assert first.read_bytes() == second.read_bytes()

    def test_corrupt_model_rejected(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text('{"source_dim": 3}')
        with pytest.raises(VectorFormatError):
            load_whitening(path)
