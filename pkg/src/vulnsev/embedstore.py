"""Embedding vector storage and the whitening transform.

Vector files use the ``VEC1`` binary layout: magic ``VEC1``, dim as u32
little-endian, count as u64 little-endian, then per entry a u16 LE id
length, the UTF-8 id bytes, and ``dim`` float32 LE values. This format is
the contract with the external embedding exporter.

Whitening maps stored vectors into an isotropic, optionally
lower-dimensional space: subtract the fitting corpus mean, project onto
the covariance eigenvectors scaled by inverse square-root eigenvalues.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .errors import MissingVectorError, UsageError, VectorFormatError

VEC1_MAGIC = b"VEC1"

# Eigenvalue floor keeps the transform total on rank-deficient covariance.
EIGENVALUE_FLOOR = 1e-9

# Reduced dimension used when none is requested, clamped to the source dim.
DEFAULT_WHITENING_DIM = 256


def default_whitening_dim(source_dim: int) -> int:
    return min(DEFAULT_WHITENING_DIM, source_dim)


@dataclass(frozen=True, slots=True)
class VectorStore:
    """Immutable id-to-vector map with a single shared dimension."""

    dim: int
    entries: Dict[str, np.ndarray]
    kind: str = ""

    def __len__(self) -> int:
        return len(self.entries)

    def ids(self) -> List[str]:
        return list(self.entries)

    def vector(self, record_id: str) -> np.ndarray:
        try:
            return self.entries[record_id]
        except KeyError:
            label = f" {self.kind}" if self.kind else ""
            raise MissingVectorError(
                f"no{label} embedding stored for record {record_id!r}"
            ) from None

    def restrict(self, ids: Iterable[str]) -> "VectorStore":
        """Sub-store containing ``ids``, preserving this store's order."""
        wanted = set(ids)
        missing = wanted - self.entries.keys()
        if missing:
            raise MissingVectorError(
                f"no embedding stored for record {sorted(missing)[0]!r}"
            )
        kept = {rid: vec for rid, vec in self.entries.items() if rid in wanted}
        return VectorStore(dim=self.dim, entries=kept, kind=self.kind)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


def build_store(
    vectors: Dict[str, Sequence[float]], kind: str = ""
) -> VectorStore:
    """Assemble a store from raw vectors, enforcing a shared dimension."""
    if not vectors:
        raise VectorFormatError("cannot build a store with no entries")
    entries: Dict[str, np.ndarray] = {}
    dim: Optional[int] = None
    for rid, values in vectors.items():
        vec = np.asarray(values, dtype=np.float32)
        if vec.ndim != 1:
            raise VectorFormatError(f"vector for {rid!r} is not one-dimensional")
        if dim is None:
            dim = int(vec.shape[0])
        elif vec.shape[0] != dim:
            raise VectorFormatError(
                f"vector for {rid!r} has length {vec.shape[0]}, expected {dim}"
            )
        entries[rid] = _frozen(vec)
    assert dim is not None
    return VectorStore(dim=dim, entries=entries, kind=kind)


def load_vectors(path: Path | str, kind: str = "") -> VectorStore:
    """Read a VEC1 file, validating header, payload size and id uniqueness."""
    path = Path(path)
    data = path.read_bytes()
    if len(data) < 16 or data[:4] != VEC1_MAGIC:
        raise VectorFormatError(f"{path}: missing VEC1 magic header")
    dim = struct.unpack_from("<I", data, 4)[0]
    count = struct.unpack_from("<Q", data, 8)[0]
    if dim == 0:
        raise VectorFormatError(f"{path}: header declares dim=0")
    offset = 16
    entries: Dict[str, np.ndarray] = {}
    for index in range(count):
        if offset + 2 > len(data):
            raise VectorFormatError(f"{path}: truncated at entry {index}")
        (id_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        if offset + id_len + 4 * dim > len(data):
            raise VectorFormatError(f"{path}: truncated at entry {index}")
        rid = data[offset : offset + id_len].decode("utf-8")
        offset += id_len
        vec = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).copy()
        offset += 4 * dim
        if rid in entries:
            raise VectorFormatError(f"{path}: duplicate id {rid!r}")
        entries[rid] = _frozen(vec)
    if offset != len(data):
        raise VectorFormatError(f"{path}: {len(data) - offset} trailing bytes")
    if len(entries) != count:
        raise VectorFormatError(
            f"{path}: header count {count} != {len(entries)} entries read"
        )
    return VectorStore(dim=dim, entries=entries, kind=kind)


def save_vectors(store: VectorStore, path: Path | str) -> None:
    """Write a store in VEC1 format; load/save round-trips bit-identically."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    chunks: List[bytes] = [VEC1_MAGIC, struct.pack("<I", store.dim), struct.pack("<Q", len(store))]
    for rid, vec in store.entries.items():
        id_bytes = rid.encode("utf-8")
        if len(id_bytes) > 0xFFFF:
            raise VectorFormatError(f"id {rid!r} exceeds 65535 bytes")
        chunks.append(struct.pack("<H", len(id_bytes)))
        chunks.append(id_bytes)
        chunks.append(np.asarray(vec, dtype="<f4").tobytes())
    path.write_bytes(b"".join(chunks))


@dataclass(frozen=True, slots=True)
class WhiteningModel:
    """Affine map (x - mean) @ projection taking R^D to isotropic R^d."""

    mean: np.ndarray  # (D,)
    projection: np.ndarray  # (D, d)
    source_dim: int
    target_dim: int


def fit_whitening(store: VectorStore, target_dim: Optional[int] = None) -> WhiteningModel:
    """Fit a whitening model on every vector in ``store``.

    Population (1/N) covariance, symmetric eigendecomposition with
    eigenvalues in descending order, and the sign of each eigenvector fixed
    so its first nonzero component is positive, making fitted models
    reproducible. Eigenvalues are floored at ``EIGENVALUE_FLOOR`` so
    degenerate directions map to zero instead of blowing up.
    """
    n = len(store)
    if n < 2:
        raise UsageError(f"whitening needs at least 2 vectors, got {n}")
    dim = store.dim
    d = dim if target_dim is None else int(target_dim)
    if d < 1 or d > dim:
        raise UsageError(f"target dim must be in [1, {dim}], got {d}")

    matrix = np.stack([vec.astype(np.float64) for vec in store.entries.values()])
    mean = matrix.mean(axis=0)
    centered = matrix - mean
    covariance = centered.T @ centered / n
    eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = eigenvalues[order]
    eigenvectors = eigenvectors[:, order]
    for k in range(eigenvectors.shape[1]):
        column = eigenvectors[:, k]
        nonzero = np.nonzero(column)[0]
        if nonzero.size and column[nonzero[0]] < 0:
            eigenvectors[:, k] = -column
    scale = 1.0 / np.sqrt(eigenvalues[:d] + EIGENVALUE_FLOOR)
    projection = eigenvectors[:, :d] * scale
    return WhiteningModel(
        mean=_frozen(mean),
        projection=_frozen(projection),
        source_dim=dim,
        target_dim=d,
    )


def apply_whitening(model: WhiteningModel, x: Sequence[float] | np.ndarray) -> np.ndarray:
    vec = np.asarray(x, dtype=np.float64)
    if vec.shape != (model.source_dim,):
        raise UsageError(
            f"vector has shape {vec.shape}, expected ({model.source_dim},)"
        )
    return (vec - model.mean) @ model.projection


def save_whitening(model: WhiteningModel, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "source_dim": model.source_dim,
        "target_dim": model.target_dim,
        "mean": model.mean.tolist(),
        "projection": model.projection.tolist(),
    }
    path.write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_whitening(path: Path | str) -> WhiteningModel:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        mean = np.asarray(payload["mean"], dtype=np.float64)
        projection = np.asarray(payload["projection"], dtype=np.float64)
        source_dim = int(payload["source_dim"])
        target_dim = int(payload["target_dim"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise VectorFormatError(f"{path}: invalid whitening model: {exc}") from None
    if mean.shape != (source_dim,) or projection.shape != (source_dim, target_dim):
        raise VectorFormatError(f"{path}: model shapes do not match declared dims")
    return WhiteningModel(
        mean=_frozen(mean),
        projection=_frozen(projection),
        source_dim=source_dim,
        target_dim=target_dim,
    )
