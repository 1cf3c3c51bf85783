"""Ordered, de-duplicated sets of normalized attribute strings."""

from __future__ import annotations

from typing import Iterable, Iterator

from .textnorm import normalize_attribute


class AttributeSet:
    """Attribute strings with set semantics under normalized equality.

    Insertion order is preserved for reporting; comparison and the
    intersection/union arithmetic ignore it. Empty strings (and inputs that
    normalize to empty) are dropped at construction.
    """

    __slots__ = ("items",)

    def __init__(self, items: Iterable[str] = ()):
        seen: dict[str, None] = {}
        for raw in items:
            norm = normalize_attribute(raw)
            if norm:
                seen.setdefault(norm, None)
        self.items: tuple[str, ...] = tuple(seen)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[str]:
        return iter(self.items)

    def __contains__(self, raw: str) -> bool:
        return normalize_attribute(raw) in set(self.items)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AttributeSet):
            return NotImplemented
        return set(self.items) == set(other.items)

    def __repr__(self) -> str:
        return f"AttributeSet({list(self.items)!r})"

    def as_set(self) -> frozenset[str]:
        return frozenset(self.items)
