"""Entity-feature matrices built from ``entity<TAB>feature[<TAB>count]`` pair files.

Rows are entities (e.g. Wikipedia articles), columns are features (editors,
hyperlinks, categories, n-grams...).  In binary mode an entry is 1 when the
feature occurs for the entity; in count mode it holds the summed occurrence
count.
"""

from __future__ import annotations

import enum
import io
import logging
import os
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, TextIO, Union

import numpy as np
import scipy.sparse as sp

from .vocab import Vocabulary

_log = logging.getLogger(__name__)

Source = Union[str, os.PathLike, TextIO, Iterable[str]]


class ParseError(ValueError):
    """Malformed input line; carries the 1-based line number."""

    def __init__(self, message: str, lineno: int | None = None, path: str | None = None):
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if lineno is not None:
            where += f"{lineno}: " if path is not None else f"line {lineno}: "
        super().__init__(where + message)


class Mode(str, enum.Enum):
    BINARY = "binary"
    COUNT = "count"


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Sparse nonnegative entity x feature matrix with its vocabularies."""

    values: sp.csr_matrix
    entity_vocab: Vocabulary
    feature_vocab: Vocabulary
    mode: Mode = Mode.BINARY

    def __post_init__(self):
        n, m = self.values.shape
        if n != len(self.entity_vocab) or m != len(self.feature_vocab):
            raise ValueError(
                f"matrix shape {self.values.shape} does not match vocabularies "
                f"({len(self.entity_vocab)}, {len(self.feature_vocab)})"
            )
        if self.values.nnz and self.values.data.min() <= 0:
            raise ValueError("stored entries must be positive")
        if self.mode is Mode.BINARY and np.any(self.values.data != 1):
            raise ValueError("binary matrix holds entries other than 1")

    @property
    def n_entities(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_dense(
        cls,
        array,
        entities: Iterable[str] | None = None,
        features: Iterable[str] | None = None,
        mode: Mode | str = Mode.BINARY,
    ) -> "FeatureMatrix":
        """Wrap a dense N x M array.  Default names are zero-padded so that
        lexicographic order equals row/column order."""
        a = np.asarray(array, dtype=np.float64)
        if a.ndim != 2:
            raise ValueError("expected a 2-d array")
        n, m = a.shape
        if entities is None:
            entities = [f"e{i:06d}" for i in range(n)]
        if features is None:
            features = [f"f{j:06d}" for j in range(m)]
        ev = Vocabulary(entities, presorted=True)
        fv = Vocabulary(features, presorted=True)
        if list(ev) != sorted(ev) or list(fv) != sorted(fv):
            raise ValueError("entity and feature names must be given in sorted order")
        mat = sp.csr_matrix(a)
        mat.eliminate_zeros()
        return cls(mat, ev, fv, Mode(mode))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FeatureMatrix):
            return NotImplemented
        if self.mode is not other.mode or self.values.shape != other.values.shape:
            return False
        if self.entity_vocab != other.entity_vocab or self.feature_vocab != other.feature_vocab:
            return False
        return (self.values != other.values).nnz == 0

    __hash__ = None

    def dump_tsv(self, out: TextIO) -> None:
        """Write ``entity<TAB>feature<TAB>value`` lines sorted by (row, col)."""
        coo = self.values.tocoo()
        order = np.lexsort((coo.col, coo.row))
        for k in order:
            v = coo.data[k]
            text = str(int(v)) if float(v).is_integer() else repr(float(v))
            out.write(
                f"{self.entity_vocab.term(coo.row[k])}\t{self.feature_vocab.term(coo.col[k])}\t{text}\n"
            )


def _open_lines(source: Source):
    if isinstance(source, (str, os.PathLike)):
        return open(source, encoding="utf-8"), os.fspath(source)
    return source, getattr(source, "name", None) if isinstance(source, io.IOBase) else None


def load_feature_pairs(
    source: Source,
    mode: Mode | str = Mode.BINARY,
    min_feature_count: int = 1,
) -> FeatureMatrix:
    """Read a pair file into a :class:`FeatureMatrix`.

    Features seen in fewer than ``min_feature_count`` distinct entities are
    dropped.  Entities that lose all their features stay as zero rows.
    Vocabulary order is lexicographic, so the result does not depend on
    line order.
    """
    mode = Mode(mode)
    if min_feature_count < 1:
        raise ValueError("min_feature_count must be >= 1")

    counts: dict[tuple[str, str], int] = defaultdict(int)
    entities: set[str] = set()
    lines, path = _open_lines(source)
    try:
        for lineno, raw in enumerate(lines, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) == 2:
                c = 1
            elif len(cols) == 3:
                try:
                    c = int(cols[2])
                except ValueError:
                    raise ParseError(f"count is not an integer: {cols[2]!r}", lineno, path) from None
                if c <= 0:
                    raise ParseError(f"count must be positive, got {c}", lineno, path)
            else:
                raise ParseError(f"expected 2 or 3 tab-separated columns, got {len(cols)}", lineno, path)
            entity, feature = cols[0], cols[1]
            if not entity or not feature:
                raise ParseError("empty entity or feature field", lineno, path)
            entities.add(entity)
            counts[entity, feature] += c
    finally:
        if path is not None and lines is not source:
            lines.close()

    if not counts:
        raise ParseError("no pairs", path=path)

    df: dict[str, int] = defaultdict(int)
    for _, f in counts:
        df[f] += 1
    kept = [f for f, d in df.items() if d >= min_feature_count]
    dropped = len(df) - len(kept)
    if dropped:
        _log.info("dropped %d of %d features below min_feature_count=%d", dropped, len(df), min_feature_count)

    ev = Vocabulary(entities)
    fv = Vocabulary(kept)
    rows, cols, vals = [], [], []
    for (e, f), c in counts.items():
        j = fv.get(f)
        if j is None:
            continue
        rows.append(ev.index(e))
        cols.append(j)
        vals.append(1.0 if mode is Mode.BINARY else float(c))
    mat = sp.csr_matrix(
        (np.asarray(vals, dtype=np.float64), (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
        shape=(len(ev), len(fv)),
    )
    mat.sort_indices()
    return FeatureMatrix(mat, ev, fv, mode)


def binarize(fm: FeatureMatrix) -> FeatureMatrix:
    """Replace every stored entry with 1."""
    mat = fm.values.copy()
    mat.data[:] = 1.0
    return FeatureMatrix(mat, fm.entity_vocab, fm.feature_vocab, Mode.BINARY)
