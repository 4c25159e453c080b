"""Dense string <-> index vocabularies."""

from __future__ import annotations

from typing import Iterable, Iterator


class Vocabulary:
    """Immutable bijection between strings and dense indices ``0..n-1``.

    Built from any iterable of strings; the index order is lexicographic so
    that two vocabularies over the same set are always identical.
    """

    __slots__ = ("_items", "_index")

    def __init__(self, items: Iterable[str], *, presorted: bool = False):
        items = tuple(items) if presorted else tuple(sorted(set(items)))
        index = {s: i for i, s in enumerate(items)}
        if len(index) != len(items):
            raise ValueError("vocabulary entries must be unique")
        self._items = items
        self._index = index

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self) -> Iterator[str]:
        return iter(self._items)

    def __contains__(self, key: object) -> bool:
        return key in self._index

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self._items == other._items

    def __hash__(self) -> int:
        return hash(self._items)

    def __repr__(self) -> str:
        return f"Vocabulary(n={len(self)})"

    def index(self, key: str) -> int:
        try:
            return self._index[key]
        except KeyError:
            raise KeyError(f"unknown entity or feature: {key!r}") from None

    def get(self, key: str, default=None):
        return self._index.get(key, default)

    def term(self, idx: int) -> str:
        return self._items[idx]

    @property
    def items(self) -> tuple[str, ...]:
        return self._items
