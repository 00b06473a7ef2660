"""Descendant sets I_{m,n}: positions in F_n whose level lies in the base B_m.

``I_{m,n+1} = I_{m,n} + P_n`` as a disjoint sumset, so exact sets are
composed level by level and histograms over Z^d/G by convolution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import lattice as lat
from .construction import ConstructionSpec, Grid
from .lattice import Lattice, ResidueHistogram
from .verdict import CapExceeded

Vector = tuple[int, ...]

EXACT_CAP = 1_000_000


@dataclass(frozen=True)
class DescendantView:
    m: int
    n: int
    exact: frozenset | None = None
    hist: ResidueHistogram | None = None

    @property
    def size(self) -> int:
        return len(self.exact) if self.exact is not None else self.hist.total


def cardinality(spec: ConstructionSpec, m: int, n: int) -> int:
    _check_range(spec, m, n)
    return math.prod(spec.placement_count(k) for k in range(m, n))


def compose_exact(spec: ConstructionSpec, m: int, n: int, cap: int = EXACT_CAP) -> frozenset:
    size = cardinality(spec, m, n)
    if size > cap:
        raise CapExceeded(f"#I_({m},{n}) = {size} exceeds the cap {cap}; use histogram mode")
    cur = {(0,) * spec.dim}
    for k in range(m, n):
        pts = [p for b in spec.placements(k) for p in b.points()]
        nxt = {tuple(a + b for a, b in zip(s, p)) for s in cur for p in pts}
        if len(nxt) != len(cur) * len(pts):
            raise AssertionError(f"sumset at level {k} is not disjoint; the spec is invalid")
        cur = nxt
    return frozenset(cur)


def placement_histogram(spec: ConstructionSpec, k: int, G: Lattice) -> ResidueHistogram:
    h = ResidueHistogram(G)
    for b in spec.placements(k):
        for r, c in b.histogram(G).counts.items():
            h.counts[r] = h.counts.get(r, 0) + c
    return h


def compose_hist(spec: ConstructionSpec, m: int, n: int, G: Lattice) -> ResidueHistogram:
    _check_range(spec, m, n)
    h = ResidueHistogram(G, {lat.zero(G).rep: 1})
    for k in range(m, n):
        h = h.convolve(placement_histogram(spec, k, G))
    return h


def view(spec: ConstructionSpec, m: int, n: int, G: Lattice | None = None) -> DescendantView:
    if G is None:
        return DescendantView(m, n, exact=compose_exact(spec, m, n))
    return DescendantView(m, n, hist=compose_hist(spec, m, n, G))


def pair_fraction(spec: ConstructionSpec, m: int, n: int, v: Sequence[int],
                  cap: int = EXACT_CAP) -> Fraction:
    """Exact ``#{i in I_{m,n} : i + v in I_{m,n}} / #I_{m,n}``."""
    v = tuple(v)
    if n == m + 1:
        return level_pair_fraction(spec, m, v)
    pts = compose_exact(spec, m, n, cap)
    hits = sum(1 for i in pts if tuple(a + b for a, b in zip(i, v)) in pts)
    return Fraction(hits, len(pts))


def level_pair_fraction(spec: ConstructionSpec, k: int, v: Sequence[int]) -> Fraction:
    """Pair fraction of ``P_k = I_{k,k+1}``, by arithmetic on blocks."""
    blocks = spec.placements(k)
    hits = sum(block_matches(a, b, v) for a in blocks for b in blocks)
    return Fraction(hits, spec.placement_count(k))


def block_matches(a: Grid, b: Grid, v: Sequence[int]) -> int:
    """``#{p in a : p + v in b}``; the axes are independent, so count per axis."""
    out = 1
    for l in range(a.dim):
        out *= _axis_matches(a.offset[l], a.spacing[l], a.counts[l],
                             b.offset[l], b.spacing[l], b.counts[l], v[l])
        if not out:
            return 0
    return out


def _axis_matches(o1, s1, c1, o2, s2, c2, delta) -> int:
    # solve s1*k - s2*j = o2 - o1 - delta with 0 <= k < c1, 0 <= j < c2
    rhs = o2 - o1 - delta
    g, x, y = _egcd(s1, s2)
    if rhs % g:
        return 0
    k0, j0 = x * (rhs // g), -y * (rhs // g)
    a, b = s2 // g, s1 // g  # k = k0 + a*t, j = j0 + b*t
    lo = max(_ceil_div(-k0, a), _ceil_div(-j0, b))
    hi = min((c1 - 1 - k0) // a, (c2 - 1 - j0) // b)
    return max(0, hi - lo + 1)


def _egcd(a, b):
    if b == 0:
        return a, 1, 0
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y


def _ceil_div(p, q):
    return -((-p) // q)


def _check_range(spec, m, n):
    if not 1 <= m <= n <= spec.depth:
        raise IndexError(f"need 1 <= m <= n <= {spec.depth}, got m={m}, n={n}")
