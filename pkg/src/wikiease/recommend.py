"""Implicit-feedback interactions, user scoring and masked top-R lists."""

from __future__ import annotations

import logging
import math
import os
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .ease import SimilarityModel
from .featurize import ParseError, Source, _open_lines
from .vocab import Vocabulary

_log = logging.getLogger(__name__)

DEFAULT_RATING_THRESHOLD = 3.5


class AlignmentError(ValueError):
    pass


@dataclass(frozen=True)
class RawInteractions:
    """Per-user sets of entity names, before matching against a model."""

    users: Mapping[str, frozenset[str]]


@dataclass(frozen=True)
class InteractionSet:
    """Per-user sets of entity indices into ``entity_vocab``."""

    users: Mapping[str, frozenset[int]]
    entity_vocab: Vocabulary
    dropped_entities: int = 0
    dropped_pairs: int = 0
    dropped_users: int = 0

    def __post_init__(self):
        n = len(self.entity_vocab)
        for u, items in self.users.items():
            if not items:
                raise ValueError(f"user {u!r} has no interactions")
            if max(items) >= n or min(items) < 0:
                raise ValueError(f"user {u!r} has an entity index outside [0, {n})")

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def n_entities(self) -> int:
        return len(self.entity_vocab)

    def sorted_users(self) -> list[str]:
        return sorted(self.users)


def load_interactions(source: Source, threshold: float = DEFAULT_RATING_THRESHOLD) -> RawInteractions:
    """Read ``user<TAB>entity[<TAB>rating]`` lines.

    A rated pair is kept when ``rating >= threshold``; unrated pairs are
    always kept.  Duplicate pairs collapse.
    """
    users: dict[str, set[str]] = defaultdict(set)
    lines, path = _open_lines(source)
    try:
        for lineno, raw in enumerate(lines, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) not in (2, 3):
                raise ParseError(f"expected 2 or 3 tab-separated columns, got {len(cols)}", lineno, path)
            user, entity = cols[0], cols[1]
            if not user or not entity:
                raise ParseError("empty user or entity field", lineno, path)
            if len(cols) == 3:
                try:
                    rating = float(cols[2])
                except ValueError:
                    raise ParseError(f"rating is not a number: {cols[2]!r}", lineno, path) from None
                if math.isnan(rating):
                    raise ParseError("rating is NaN", lineno, path)
                if rating < threshold:
                    continue
            users[user].add(entity)
    finally:
        if path is not None and lines is not source:
            lines.close()
    if not users:
        raise ParseError("no interactions", path=path)
    return RawInteractions({u: frozenset(s) for u, s in users.items()})


def align(raw: RawInteractions, model: SimilarityModel | Vocabulary) -> InteractionSet:
    """Map entity names to model indices, dropping unknown entities and
    users left empty."""
    vocab = model if isinstance(model, Vocabulary) else model.entity_vocab
    users: dict[str, frozenset[int]] = {}
    unknown: set[str] = set()
    dropped_pairs = 0
    for u in sorted(raw.users):
        idx = []
        for e in raw.users[u]:
            j = vocab.get(e)
            if j is None:
                unknown.add(e)
                dropped_pairs += 1
            else:
                idx.append(j)
        if idx:
            users[u] = frozenset(idx)
    dropped_users = len(raw.users) - len(users)
    if not users:
        raise AlignmentError(
            f"no overlap between interactions and model "
            f"({len(unknown)} distinct entities, {len(raw.users)} users dropped)"
        )
    if unknown or dropped_users:
        _log.info(
            "align: dropped %d unknown entities (%d pairs) and %d empty users",
            len(unknown),
            dropped_pairs,
            dropped_users,
        )
    return InteractionSet(users, vocab, len(unknown), dropped_pairs, dropped_users)


def score_user(history: Iterable[int], model: SimilarityModel | np.ndarray) -> np.ndarray:
    """Sum of the weight rows of the history entities (``x_u @ B``)."""
    w = model.weights if isinstance(model, SimilarityModel) else np.asarray(model)
    idx = np.fromiter(sorted(history), dtype=np.intp)
    if idx.size == 0:
        raise ValueError("history must be non-empty")
    return w[idx].sum(axis=0)


def top_r(scores: np.ndarray, history: Iterable[int], r: int) -> list[int]:
    """Indices of the ``r`` best-scoring entities outside ``history``.

    Sorted by descending score; equal scores go to the lower index.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    scores = np.asarray(scores, dtype=np.float64)
    mask = np.ones(scores.shape[0], dtype=bool)
    hist = list(history)
    if hist:
        mask[hist] = False
    cand = np.flatnonzero(mask)
    order = np.argsort(-scores[cand], kind="stable")
    return [int(i) for i in cand[order[:r]]]


def recommend_all(
    interactions: InteractionSet, model: SimilarityModel, r: int
) -> dict[str, list[tuple[int, float]]]:
    """Top-``r`` (index, score) lists for every user, history = all their
    interactions."""
    out = {}
    for u in interactions.sorted_users():
        hist = interactions.users[u]
        s = score_user(hist, model)
        out[u] = [(j, float(s[j])) for j in top_r(s, hist, r)]
    return out
