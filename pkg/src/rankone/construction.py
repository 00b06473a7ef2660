"""Stacking constructions: shapes F_n and the placements of tower n inside tower n+1.

Placements are stored as blocks.  A block is an offset plus an axis-aligned
progression per coordinate, which keeps the construction with 2^48
placements per level down to two blocks.  A single vector is a block whose
counts are all 1.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from . import lattice as lat
from .shapes import Points, Rect, Shape

Vector = tuple[int, ...]

# materialise at most this many points when a check has no closed form
ENUM_CAP = 1_000_000


@dataclass(frozen=True)
class Grid:
    """``{offset + sum_l k_l * spacing_l * e_l : 0 <= k_l < counts_l}``."""

    offset: Vector
    spacing: Vector
    counts: Vector

    def __post_init__(self):
        d = len(self.offset)
        if len(self.spacing) != d or len(self.counts) != d:
            raise ValueError("offset, spacing and counts must have equal length")
        if any(c < 1 for c in self.counts):
            raise ValueError("block counts must be positive")
        # spacing is irrelevant along axes with a single element; pin it to 1
        sp = tuple(s if c > 1 else 1 for s, c in zip(self.spacing, self.counts))
        if any(s <= 0 for s in sp):
            raise ValueError("block spacing must be positive")
        object.__setattr__(self, "spacing", sp)

    @classmethod
    def single(cls, v: Sequence[int]) -> "Grid":
        v = tuple(int(x) for x in v)
        return cls(v, (1,) * len(v), (1,) * len(v))

    @property
    def dim(self) -> int:
        return len(self.offset)

    def size(self) -> int:
        return math.prod(self.counts)

    def is_single(self) -> bool:
        return all(c == 1 for c in self.counts)

    def points(self) -> Iterator[Vector]:
        axes = [range(o, o + s * c, s) for o, s, c in zip(self.offset, self.spacing, self.counts)]
        return itertools.product(*axes)

    def last(self) -> Vector:
        return tuple(o + s * (c - 1) for o, s, c in zip(self.offset, self.spacing, self.counts))

    def steps(self) -> list[Vector]:
        """Unit steps along the axes where the block actually repeats."""
        d = self.dim
        return [tuple(s if k == l else 0 for k in range(d))
                for l, (s, c) in enumerate(zip(self.spacing, self.counts)) if c > 1]

    def histogram(self, L: lat.Lattice) -> lat.ResidueHistogram:
        h = lat.ResidueHistogram(L, {lat.reduce(L, self.offset).rep: 1})
        d = self.dim
        for l in range(d):
            if self.counts[l] > 1:
                step = tuple(self.spacing[l] if k == l else 0 for k in range(d))
                h = h.convolve(lat.progression_histogram(L, step, self.counts[l]))
        return h


@dataclass(frozen=True)
class LevelRule:
    """Shape of tower n+1 and where the copies of tower n sit inside it."""

    shape: Shape
    placements: tuple[Grid, ...]

    def __post_init__(self):
        if not self.placements:
            raise ValueError("a level needs at least one placement")

    def count(self) -> int:
        return sum(b.size() for b in self.placements)

    def points(self) -> Iterator[Vector]:
        for b in self.placements:
            yield from b.points()


@dataclass(frozen=True)
class ConstructionSpec:
    """Levels F_1, (F_2, P_1), (F_3, P_2), ...; depth counts the shapes."""

    dim: int
    base: Shape
    rules: tuple[LevelRule, ...] = ()
    rule: str | None = None

    def __post_init__(self):
        if self.base.dim != self.dim:
            raise ValueError("base shape dimension mismatch")
        for n, r in enumerate(self.rules, start=2):
            if r.shape.dim != self.dim or any(b.dim != self.dim for b in r.placements):
                raise ValueError(f"level {n} has the wrong dimension")

    @property
    def depth(self) -> int:
        return len(self.rules) + 1

    def shape(self, n: int) -> Shape:
        """F_n, 1-based."""
        self._check_level(n, self.depth)
        return self.base if n == 1 else self.rules[n - 2].shape

    def placements(self, n: int) -> tuple[Grid, ...]:
        """Blocks of I_{n,n+1}, for 1 <= n < depth."""
        self._check_level(n, self.depth - 1)
        return self.rules[n - 1].placements

    def placement_count(self, n: int) -> int:
        return self.rules[n - 1].count()

    def truncate(self, depth: int) -> "ConstructionSpec":
        if not 1 <= depth <= self.depth:
            raise ValueError(f"depth must be between 1 and {self.depth}")
        return ConstructionSpec(self.dim, self.base, self.rules[: depth - 1], self.rule)

    def _check_level(self, n, top):
        if not 1 <= n <= top:
            raise IndexError(f"level {n} outside 1..{top}")


def spec_from_levels(shapes: Sequence[Shape], placements: Sequence[Iterable], rule=None) -> ConstructionSpec:
    """Build from ``[F_1, ..., F_K]`` and ``[P_1, ..., P_{K-1}]``; vectors become single blocks."""
    if len(placements) != len(shapes) - 1:
        raise ValueError("need one placement list per level transition")
    rules = []
    for F, P in zip(shapes[1:], placements):
        blocks = tuple(b if isinstance(b, Grid) else Grid.single(b) for b in P)
        rules.append(LevelRule(F, blocks))
    return ConstructionSpec(shapes[0].dim, shapes[0], tuple(rules), rule)


# validation


@dataclass
class Violation:
    level: int
    kind: str
    placements: tuple
    point: Vector | None

    def __str__(self):
        return f"level {self.level}: {self.kind} {self.placements} at {self.point}"


def validate(spec: ConstructionSpec) -> list[Violation]:
    out = []
    for n in range(1, spec.depth):
        out.extend(_validate_level(n, spec.shape(n), spec.shape(n + 1), spec.placements(n)))
    return out


def _validate_level(n, F: Shape, Fnext: Shape, blocks) -> list[Violation]:
    if isinstance(F, Rect) and isinstance(Fnext, Rect):
        return _validate_rect_level(n, F, Fnext, blocks)
    total = sum(b.size() for b in blocks) * F.size()
    if total > ENUM_CAP:
        return [Violation(n, "too large to verify by enumeration", (), None)]
    out = []
    owner = {}
    for bi, b in enumerate(blocks):
        for p in b.points():
            for x in F.points():
                y = tuple(a + c for a, c in zip(p, x))
                if y not in Fnext:
                    out.append(Violation(n, "copy leaves the next shape", (p,), y))
                if y in owner:
                    out.append(Violation(n, "copies overlap", (owner[y], p), y))
                else:
                    owner[y] = p
    return out


def _validate_rect_level(n, F: Rect, Fnext: Rect, blocks) -> list[Violation]:
    out = []
    ext = F.extents
    for b in blocks:
        lo, hi = b.offset, b.last()
        if any(x < 0 for x in lo) or any(h + e > E for h, e, E in zip(hi, ext, Fnext.extents)):
            bad = lo if any(x < 0 for x in lo) else tuple(h + e - 1 for h, e in zip(hi, ext))
            out.append(Violation(n, "copy leaves the next shape", (b.offset,), bad))
        for l, (s, c) in enumerate(zip(b.spacing, b.counts)):
            if c > 1 and s < ext[l]:
                q = tuple(o + (s if k == l else 0) for k, o in enumerate(b.offset))
                out.append(Violation(n, "copies overlap", (b.offset, q), q))
                break
    for (i, a), (j, b) in itertools.combinations(enumerate(blocks), 2):
        hit = _rect_blocks_overlap(a, b, ext)
        if hit is not None:
            pa, pb = hit
            point = tuple(max(x, y) for x, y in zip(pa, pb))
            out.append(Violation(n, "copies overlap", (pa, pb), point))
    return out


def _rect_blocks_overlap(a: Grid, b: Grid, ext) -> tuple[Vector, Vector] | None:
    # Boxes overlap iff they overlap along every axis, and the axes of a
    # block vary independently, so each axis can be searched on its own.
    pa, pb = [], []
    for l in range(a.dim):
        hit = _axis_overlap(a.offset[l], a.spacing[l], a.counts[l],
                            b.offset[l], b.spacing[l], b.counts[l], ext[l])
        if hit is None:
            return None
        pa.append(hit[0])
        pb.append(hit[1])
    return tuple(pa), tuple(pb)


def _axis_overlap(o1, s1, c1, o2, s2, c2, e):
    """Some ``x = o1+s1*k`` and ``y = o2+s2*j`` with ``|x - y| < e``, or None."""
    if s1 != s2:
        if min(c1, c2) > ENUM_CAP:
            raise NotImplementedError("overlap test for long blocks with different spacings")
        if c1 > c2:
            hit = _axis_overlap(o2, s2, c2, o1, s1, c1, e)
            return None if hit is None else (hit[1], hit[0])
        for k in range(c1):
            x = o1 + s1 * k
            j = min(max((x - o2) // s2, 0), c2 - 1)
            for jj in (j, j + 1):
                if 0 <= jj < c2 and abs(x - (o2 + s2 * jj)) < e:
                    return x, o2 + s2 * jj
        return None
    s = s1
    # x - y = (o1 - o2) + s*t with t in (-(c2-1), c1-1)
    d0 = o1 - o2
    t_lo = -((e - 1 + d0) // s)
    t_hi = (e - 1 - d0) // s
    t_lo, t_hi = max(t_lo, -(c2 - 1)), min(t_hi, c1 - 1)
    if t_lo > t_hi:
        return None
    t = t_lo
    k = max(t, 0)
    j = k - t
    return o1 + s * k, o2 + s * j


# Følner diagnostics


def folner_deficiency(shape: Shape, v: Sequence[int]) -> Fraction:
    """Exact ``#(F △ (F+v)) / #F``."""
    v = tuple(v)
    size = shape.size()
    if isinstance(shape, Rect):
        overlap = math.prod(max(0, e - abs(x)) for e, x in zip(shape.extents, v))
    else:
        overlap = sum(1 for p in shape.points() if tuple(a - b for a, b in zip(p, v)) in shape)
    return Fraction(2 * (size - overlap), size)


@dataclass
class FolnerReport:
    vectors: list[Vector]
    table: list[list[Fraction]]  # table[n-1][i] = deficiency of F_n along vectors[i]
    flagged: list[Vector] = field(default_factory=list)
    threshold: Fraction = Fraction(1, 2)

    @property
    def flag(self) -> bool:
        return bool(self.flagged)


def unit_vectors(d: int) -> list[Vector]:
    return [tuple(1 if k == l else 0 for k in range(d)) for l in range(d)]


def folner_report(spec: ConstructionSpec, test_vectors=None, depth=None,
                  threshold=Fraction(1, 2)) -> FolnerReport:
    """Deficiencies per level; flag vectors whose deficiency is not visibly shrinking.

    A vector is flagged when the deepest level still has deficiency above
    ``threshold``, or when its deficiency never dropped below the first level.
    One level alone is never flagged.
    """
    depth = spec.depth if depth is None else depth
    vecs = [tuple(v) for v in (test_vectors or unit_vectors(spec.dim))]
    table = [[folner_deficiency(spec.shape(n), v) for v in vecs] for n in range(1, depth + 1)]
    flagged = []
    if depth >= 2:
        for i, v in enumerate(vecs):
            first, last = table[0][i], table[-1][i]
            if last > threshold or (last >= first > 0):
                flagged.append(v)
    return FolnerReport(vecs, table, flagged, Fraction(threshold))


# measure bookkeeping


@dataclass
class MeasureLedger:
    """Top-down masses; index n-1 holds level n."""

    base_mass: list[Fraction]
    tower_mass: list[Fraction]
    spacer_mass: list[Fraction]  # mass added going from tower n to n+1
    spacer_fraction: list[Fraction]
    spacer_cells: list[int]


def measure_ledger(spec: ConstructionSpec, base_mass_at_top=None) -> MeasureLedger:
    """``mu(B_n) = mu(B_{n+1}) * #P_n`` starting from ``mu(B_K)``.

    The default top mass ``1/#F_K`` makes the deepest tower have mass 1.
    """
    K = spec.depth
    top = Fraction(1, spec.shape(K).size()) if base_mass_at_top is None else Fraction(base_mass_at_top)
    if top <= 0:
        raise ValueError("base mass must be positive")
    base = [Fraction(0)] * K
    base[K - 1] = top
    for n in range(K - 1, 0, -1):
        base[n - 1] = base[n] * spec.placement_count(n)
    tower = [base[n - 1] * spec.shape(n).size() for n in range(1, K + 1)]
    cells, frac, mass = [], [], []
    for n in range(1, K):
        fn, fnext = spec.shape(n).size(), spec.shape(n + 1).size()
        spare = fnext - spec.placement_count(n) * fn
        cells.append(spare)
        frac.append(Fraction(spare, fnext))
        mass.append(base[n] * spare)
    return MeasureLedger(base, tower, mass, frac, cells)
