"""Finite shapes in Z^d: boxes anchored at the origin and explicit point sets."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

Vector = tuple[int, ...]


@dataclass(frozen=True)
class Rect:
    """The box prod_l [0, extents[l])."""

    extents: Vector

    def __post_init__(self):
        if not self.extents or any(e <= 0 for e in self.extents):
            raise ValueError(f"rectangle extents must be positive, got {self.extents}")

    @property
    def dim(self) -> int:
        return len(self.extents)

    def size(self) -> int:
        return math.prod(self.extents)

    def points(self) -> Iterator[Vector]:
        return itertools.product(*(range(e) for e in self.extents))

    def __contains__(self, v: Sequence[int]) -> bool:
        return all(0 <= x < e for x, e in zip(v, self.extents))


@dataclass(frozen=True)
class Points:
    """An explicit finite shape; stored sorted and deduplicated."""

    pts: tuple[Vector, ...]

    def __init__(self, pts):
        clean = tuple(sorted({tuple(int(x) for x in p) for p in pts}))
        if not clean:
            raise ValueError("a shape must be nonempty")
        d = len(clean[0])
        if any(len(p) != d for p in clean):
            raise ValueError("points have mixed dimensions")
        if (0,) * d not in clean:
            raise ValueError("shapes are normalised to contain the origin")
        object.__setattr__(self, "pts", clean)

    @property
    def dim(self) -> int:
        return len(self.pts[0])

    def size(self) -> int:
        return len(self.pts)

    def points(self) -> Iterator[Vector]:
        return iter(self.pts)

    def __contains__(self, v: Sequence[int]) -> bool:
        return tuple(v) in self._set

    @property
    def _set(self) -> frozenset:
        # cached lazily; frozen dataclass so go through object.__setattr__
        try:
            return self.__dict__["_cache"]
        except KeyError:
            s = frozenset(self.pts)
            object.__setattr__(self, "_cache", s)
            return s


Shape = Rect | Points
