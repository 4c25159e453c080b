"""EASE entity-entity similarity: zero-diagonal ridge regression in closed form.

Each entity's feature vector is reconstructed from the feature vectors of the
*other* entities.  With ``X`` the feature x entity matrix (entities as
columns) the weights ``B`` minimise

    ||X - X B||_F^2 + lam * ||B||_F^2    subject to diag(B) = 0

and the minimiser is ``B = I - P / diag(P)`` (columnwise) with
``P = (X^T X + lam I)^{-1}``.
"""

from __future__ import annotations

import io
import logging
import os
import struct
from dataclasses import dataclass
from typing import BinaryIO, Union

import numpy as np
import scipy.linalg

from .featurize import FeatureMatrix
from .vocab import Vocabulary

_log = logging.getLogger(__name__)

DEFAULT_LAMBDA = 100.0

MAGIC = b"EASEB\x00\x00\x01"
_HEADER = struct.Struct("<8sQQ")


class FitError(RuntimeError):
    pass


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SimilarityModel:
    """Dense N x N weight matrix with zero diagonal.

    ``lam`` is ``None`` for models loaded from disk, since the file format
    does not record it.
    """

    weights: np.ndarray
    entity_vocab: Vocabulary
    lam: float | None = None

    def __post_init__(self):
        w = self.weights
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"weights must be square, got shape {w.shape}")
        if w.shape[0] != len(self.entity_vocab):
            raise ValueError("weights and entity vocabulary disagree on N")
        w.setflags(write=False)

    @property
    def n_entities(self) -> int:
        return self.weights.shape[0]

    def similarity(self, entity_a: str, entity_b: str) -> float:
        return similarity(self, entity_a, entity_b)

    def top_similar(self, entity: str, k: int) -> list[tuple[str, float]]:
        return top_similar(self, entity, k)


def gram_matrix(fm: FeatureMatrix) -> np.ndarray:
    """Dense entity Gram matrix: entry (i, j) is the dot product of the
    feature vectors of entities i and j."""
    f = fm.values
    return np.asarray((f @ f.T).toarray(), dtype=np.float64)


def fit(fm: FeatureMatrix, lam: float = DEFAULT_LAMBDA) -> SimilarityModel:
    """Fit EASE weights from an entity-feature matrix."""
    lam = float(lam)
    if not lam > 0 or not np.isfinite(lam):
        raise ValueError(f"lambda must be a positive finite number, got {lam}")
    if fm.n_entities < 1:
        raise ValueError("need at least one entity")

    g = gram_matrix(fm)
    g[np.diag_indices_from(g)] += lam
    try:
        cf = scipy.linalg.cho_factor(g, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise FitError(f"Gram matrix + lambda*I is not positive definite (lambda={lam})") from exc
    p = scipy.linalg.cho_solve(cf, np.eye(g.shape[0]))
    # cho_solve can leave round-off asymmetry in P
    p = 0.5 * (p + p.T)

    b = p / -np.diag(p)
    b += 0.0  # -0.0 -> 0.0
    np.fill_diagonal(b, 0.0)
    if not np.all(np.isfinite(b)):
        raise FitError(f"non-finite weights (lambda={lam})")
    _log.debug("fit EASE on N=%d M=%d lambda=%g", fm.n_entities, fm.n_features, lam)
    return SimilarityModel(b, fm.entity_vocab, lam)


def sparsify(model: SimilarityModel, threshold: float) -> SimilarityModel:
    """Zero out weights with ``|B_ij| < threshold``.  Lossy; meant for
    shrinking persisted models."""
    w = np.where(np.abs(model.weights) < threshold, 0.0, model.weights)
    return SimilarityModel(w, model.entity_vocab, model.lam)


def similarity(model: SimilarityModel, entity_a: str, entity_b: str) -> float:
    i = model.entity_vocab.index(entity_a)
    j = model.entity_vocab.index(entity_b)
    return float(model.weights[i, j])


def top_similar(model: SimilarityModel, entity: str, k: int) -> list[tuple[str, float]]:
    """The ``k`` entities with the largest weight in ``entity``'s row.

    Ties go to the lower index; the query entity is never returned.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    i = model.entity_vocab.index(entity)
    row = model.weights[i]
    order = np.argsort(-row, kind="stable")
    out = []
    for j in order:
        if j == i:
            continue
        out.append((model.entity_vocab.term(int(j)), float(row[j])))
        if len(out) == k:
            break
    return out


def save(model: SimilarityModel, dest: Union[str, os.PathLike, BinaryIO]) -> None:
    """Write the binary model format.

    Layout: 8-byte magic, u64 N, u64 vocabulary blob length, the UTF-8 blob
    (entity names joined by newlines, index order), then N*N float64
    values in row-major order.  All integers and floats little-endian.
    """
    names = model.entity_vocab.items
    if any("\n" in s for s in names):
        raise ValueError("entity names may not contain newlines")
    blob = "\n".join(names).encode("utf-8")
    n = model.n_entities
    payload = np.ascontiguousarray(model.weights, dtype="<f8").tobytes()
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "wb") as f:
            _write(f, n, blob, payload)
    else:
        _write(dest, n, blob, payload)


def _write(f: BinaryIO, n: int, blob: bytes, payload: bytes) -> None:
    f.write(_HEADER.pack(MAGIC, n, len(blob)))
    f.write(blob)
    f.write(payload)


def read_header(f: BinaryIO) -> tuple[int, list[str]]:
    head = f.read(_HEADER.size)
    if len(head) != _HEADER.size:
        raise ModelFormatError("truncated header")
    magic, n, blob_len = _HEADER.unpack(head)
    if magic != MAGIC:
        raise ModelFormatError(f"bad magic {magic!r}")
    blob = f.read(blob_len)
    if len(blob) != blob_len:
        raise ModelFormatError("truncated vocabulary")
    names = blob.decode("utf-8").split("\n")
    if len(names) != n:
        raise ModelFormatError(f"vocabulary has {len(names)} entries, header says {n}")
    return n, names


def load(src: Union[str, os.PathLike, BinaryIO]) -> SimilarityModel:
    if isinstance(src, (str, os.PathLike)):
        with open(src, "rb") as f:
            return _load(f)
    return _load(src)


def _load(f: BinaryIO) -> SimilarityModel:
    n, names = read_header(f)
    raw = f.read(8 * n * n)
    if len(raw) != 8 * n * n:
        raise ModelFormatError("truncated weight matrix")
    if f.read(1):
        raise ModelFormatError("trailing bytes after weight matrix")
    w = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(n, n)
    return SimilarityModel(w, Vocabulary(names, presorted=True), None)


def to_bytes(model: SimilarityModel) -> bytes:
    buf = io.BytesIO()
    save(model, buf)
    return buf.getvalue()
