"""Finite-index subgroups of Z^d in canonical upper-triangular form.

A lattice is stored by its basis columns.  Column ``l`` has zeros below
coordinate ``l``, a positive diagonal entry ``a[l][l]`` and off-diagonal
entries reduced into ``[0, a[k][k])``.  With that normalisation two
lattices are equal as sets exactly when their matrices agree, so the
frozen dataclass equality is set equality.

Everything is exact Python integers; nothing here ever touches floats.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import reduce as _fold
from typing import Iterable, Iterator, Sequence

Vector = tuple[int, ...]


class RankDeficient(ValueError):
    """The generators span a subgroup of infinite index."""


class NotComparable(ValueError):
    """A quotient map was requested between non-nested lattices."""


def _vec(v: Iterable[int]) -> Vector:
    return tuple(int(x) for x in v)


def _echelon(vectors: Iterable[Sequence[int]], dim: int) -> list[tuple[int, list[int]]]:
    """Integer row-echelon form, eliminating from the last coordinate down.

    Returns ``(coordinate, pivot_vector)`` pairs, highest coordinate first.
    Each pivot vector is zero above its coordinate and positive at it.
    """
    rows = [list(v) for v in vectors if any(v)]
    pivots = []
    for c in reversed(range(dim)):
        active = [r for r in rows if r[c]]
        rest = [r for r in rows if not r[c]]
        while len(active) > 1:
            active.sort(key=lambda r: abs(r[c]))
            p = active[0]
            survivors = [p]
            for r in active[1:]:
                q = r[c] // p[c]
                r = [a - q * b for a, b in zip(r, p)]
                if r[c]:
                    survivors.append(r)
                elif any(r):
                    rest.append(r)
            active = survivors
        if active:
            p = active[0]
            if p[c] < 0:
                p = [-a for a in p]
            pivots.append((c, p))
        rows = rest
    return pivots


@dataclass(frozen=True)
class Lattice:
    """A finite-index subgroup of Z^d; ``cols[l]`` is the l-th basis column."""

    cols: tuple[Vector, ...]

    def __post_init__(self):
        d = len(self.cols)
        if d == 0:
            raise ValueError("dimension must be positive")
        for l, col in enumerate(self.cols):
            if len(col) != d:
                raise ValueError("basis must be square")
            if col[l] <= 0:
                raise ValueError(f"diagonal entry {l} must be positive")
            if any(col[k] for k in range(l + 1, d)):
                raise ValueError("basis must be upper-triangular")
            for k in range(l):
                if not 0 <= col[k] < self.cols[k][k]:
                    raise ValueError(f"entry ({k},{l}) not reduced")

    # construction helpers

    @classmethod
    def from_generators(cls, dim: int, generators: Iterable[Sequence[int]]) -> "Lattice":
        return canonicalize(dim, generators)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "Lattice":
        """Lattice spanned by the columns of a row-major matrix."""
        d = len(rows)
        width = len(rows[0]) if rows else 0
        return canonicalize(d, [[rows[i][j] for i in range(d)] for j in range(width)])

    @classmethod
    def diagonal(cls, *entries: int) -> "Lattice":
        d = len(entries)
        return cls(tuple(tuple(entries[l] if k == l else 0 for k in range(d)) for l in range(d)))

    @classmethod
    def identity(cls, dim: int) -> "Lattice":
        return cls.diagonal(*([1] * dim))

    # views

    @property
    def dim(self) -> int:
        return len(self.cols)

    @property
    def diag(self) -> Vector:
        return tuple(self.cols[l][l] for l in range(self.dim))

    def entry(self, k: int, l: int) -> int:
        """Matrix entry a_{k,l} (0-based row k, column l)."""
        return self.cols[l][k]

    def rows(self) -> list[list[int]]:
        return [[self.cols[l][k] for l in range(self.dim)] for k in range(self.dim)]

    def key(self) -> tuple:
        """Sort key: index first, then the row-major matrix."""
        return (index(self), tuple(itertools.chain.from_iterable(self.rows())))

    def __contains__(self, v) -> bool:
        return contains(self, v)

    def __repr__(self) -> str:
        return f"Lattice(rows={self.rows()})"


@dataclass(frozen=True)
class Residue:
    """The coset ``rep + lattice`` with ``rep`` in the diagonal box."""

    lattice: Lattice
    rep: Vector

    def __add__(self, other: "Residue") -> "Residue":
        return quotient_add(self, other)

    def __neg__(self) -> "Residue":
        return reduce(self.lattice, tuple(-x for x in self.rep))

    def __sub__(self, other: "Residue") -> "Residue":
        return self + (-other)

    def is_zero(self) -> bool:
        return not any(self.rep)


@dataclass
class ResidueHistogram:
    """Counts per coset of ``lattice``, keyed by canonical representative."""

    lattice: Lattice
    counts: dict[Vector, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def count(self, v: Sequence[int] | Residue) -> int:
        rep = v.rep if isinstance(v, Residue) else reduce(self.lattice, v).rep
        return self.counts.get(rep, 0)

    def residues(self) -> list[Residue]:
        return [Residue(self.lattice, r) for r in sorted(self.counts)]

    def add(self, v: Sequence[int], n: int = 1) -> None:
        if n:
            r = reduce(self.lattice, v).rep
            self.counts[r] = self.counts.get(r, 0) + n

    def translate(self, v: Sequence[int]) -> "ResidueHistogram":
        out = ResidueHistogram(self.lattice)
        for r, n in self.counts.items():
            out.add([a + b for a, b in zip(r, v)], n)
        return out

    def convolve(self, other: "ResidueHistogram") -> "ResidueHistogram":
        """Histogram of the sumset, counted with multiplicity."""
        if other.lattice != self.lattice:
            raise ValueError("histograms live over different lattices")
        out = ResidueHistogram(self.lattice)
        for r1, n1 in self.counts.items():
            for r2, n2 in other.counts.items():
                out.add([a + b for a, b in zip(r1, r2)], n1 * n2)
        return out

    def project(self, coarser: Lattice) -> "ResidueHistogram":
        if not is_sublattice(self.lattice, coarser):
            raise NotComparable("target lattice does not contain the source lattice")
        out = ResidueHistogram(coarser)
        for r, n in self.counts.items():
            out.add(r, n)
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, ResidueHistogram):
            return NotImplemented
        strip = lambda c: {k: v for k, v in c.items() if v}
        return self.lattice == other.lattice and strip(self.counts) == strip(other.counts)


def canonicalize(dim: int, generators: Iterable[Sequence[int]]) -> Lattice:
    gens = [_vec(g) for g in generators]
    for g in gens:
        if len(g) != dim:
            raise ValueError(f"generator {g} has wrong length for dimension {dim}")
    pivots = dict(_echelon(gens, dim))
    missing = [c for c in range(dim) if c not in pivots]
    if missing:
        raise RankDeficient(f"generators span rank {dim - len(missing)} < {dim}")
    cols = [pivots[c] for c in range(dim)]
    for l in range(dim):
        col = cols[l]
        for k in reversed(range(l)):
            q = col[k] // cols[k][k]
            if q:
                col = [a - q * b for a, b in zip(col, cols[k])]
        cols[l] = col
    return Lattice(tuple(tuple(c) for c in cols))


def index(L: Lattice) -> int:
    return math.prod(L.diag)


def reduce(L: Lattice, v: Sequence[int]) -> Residue:
    """Canonical representative of ``v + L`` inside the diagonal box."""
    v = list(v)
    if len(v) != L.dim:
        raise ValueError("vector length does not match lattice dimension")
    for l in reversed(range(L.dim)):
        col = L.cols[l]
        q = v[l] // col[l]
        if q:
            for k in range(l + 1):
                v[k] -= q * col[k]
    return Residue(L, tuple(v))


def contains(L: Lattice, v: Sequence[int]) -> bool:
    return reduce(L, v).is_zero()


def is_sublattice(L1: Lattice, L2: Lattice) -> bool:
    """True iff L1 is a subset of L2."""
    _same_dim(L1, L2)
    return all(contains(L2, c) for c in L1.cols)


def join(L1: Lattice, L2: Lattice) -> Lattice:
    _same_dim(L1, L2)
    return canonicalize(L1.dim, L1.cols + L2.cols)


def intersect(L1: Lattice, L2: Lattice) -> Lattice:
    # Zassenhaus: in Z^{2d} span (u, u) for u in L1 and (0, w) for w in L2;
    # vectors whose high half vanishes carry L1 ∩ L2 in their low half.
    _same_dim(L1, L2)
    d = L1.dim
    gens = [c + c for c in L1.cols] + [(0,) * d + w for w in L2.cols]
    pivots = _echelon(gens, 2 * d)
    low = [p[:d] for c, p in pivots if c < d]
    return canonicalize(d, low)


def quotient_add(r1: Residue, r2: Residue) -> Residue:
    if r1.lattice != r2.lattice:
        raise ValueError("residues over different lattices")
    return reduce(r1.lattice, [a + b for a, b in zip(r1.rep, r2.rep)])


def quotient_project(r: Residue, coarser: Lattice) -> Residue:
    if not is_sublattice(r.lattice, coarser):
        raise NotComparable("target lattice does not contain the source lattice")
    return reduce(coarser, r.rep)


def zero(L: Lattice) -> Residue:
    return Residue(L, (0,) * L.dim)


def cosets(L: Lattice) -> Iterator[Residue]:
    """Every residue of Z^d / L, in lexicographic order of representatives."""
    for rep in itertools.product(*(range(a) for a in L.diag)):
        yield Residue(L, rep)


def order(L: Lattice, v: Sequence[int]) -> int:
    """Order of ``v + L`` in the quotient group."""
    r = reduce(L, v)
    n, acc = 1, r
    while not acc.is_zero():
        acc = acc + r
        n += 1
    return n


def primary_components(L: Lattice) -> list[tuple[int, Lattice]]:
    """``(p, L + p^e Z^d)`` for each prime power ``p^e`` exactly dividing the index.

    The components are supergroups of ``L`` whose intersection is ``L``.
    """
    n = index(L)
    out = []
    for p, e in _factorize(n):
        pe = p ** e
        out.append((p, join(L, Lattice.diagonal(*([pe] * L.dim)))))
    return out


def _factorize(n: int) -> list[tuple[int, int]]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1
    if n > 1:
        out.append((n, 1))
    return out


def enumerate_sublattices(dim: int, max_index: int) -> list[Lattice]:
    """All canonical lattices of index at most ``max_index``, each exactly once."""
    if max_index < 1:
        raise ValueError("max_index must be at least 1")
    out = []
    for diag in _diagonals(dim, max_index):
        slots = [(k, l) for l in range(dim) for k in range(l)]
        for offs in itertools.product(*(range(diag[k]) for k, _ in slots)):
            cols = [[diag[l] if k == l else 0 for k in range(dim)] for l in range(dim)]
            for (k, l), a in zip(slots, offs):
                cols[l][k] = a
            out.append(Lattice(tuple(tuple(c) for c in cols)))
    out.sort(key=Lattice.key)
    return out


def _diagonals(dim: int, bound: int) -> Iterator[tuple[int, ...]]:
    if dim == 0:
        yield ()
        return
    for a in range(1, bound + 1):
        for rest in _diagonals(dim - 1, bound // a):
            yield (a,) + rest


def progression_histogram(L: Lattice, step: Sequence[int], count: int) -> ResidueHistogram:
    """Histogram of ``{k * step : 0 <= k < count}`` modulo L, in closed form."""
    h = ResidueHistogram(L)
    if count <= 0:
        return h
    o = order(L, step)
    full, extra = divmod(count, o)
    r = zero(L)
    u = reduce(L, step)
    for j in range(o):
        h.add(r.rep, full + (1 if j < extra else 0))
        r = r + u
    return h


def shape_coset_histogram(shape, L: Lattice) -> ResidueHistogram:
    """Exact per-coset counts of a finite shape.

    Rectangles are handled as a convolution of one progression per axis,
    so the cost depends on the index of L rather than the shape size.
    """
    from .shapes import Rect

    if isinstance(shape, Rect):
        d = L.dim
        h = ResidueHistogram(L, {zero(L).rep: 1})
        for l, extent in enumerate(shape.extents):
            e = tuple(1 if k == l else 0 for k in range(d))
            h = h.convolve(progression_histogram(L, e, extent))
        return h
    h = ResidueHistogram(L)
    for p in shape.points():
        h.add(p)
    return h


def span(dim: int, vectors: Iterable[Sequence[int]]) -> "Subgroup":
    return Subgroup.of(dim, vectors)


@dataclass(frozen=True)
class Subgroup:
    """A subgroup of Z^d of any rank, kept in echelon form.

    Used where a join of vectors may have infinite index.
    """

    dim: int
    pivots: tuple[tuple[int, Vector], ...]

    @classmethod
    def of(cls, dim: int, vectors: Iterable[Sequence[int]]) -> "Subgroup":
        piv = _echelon([_vec(v) for v in vectors], dim)
        return cls(dim, tuple((c, tuple(p)) for c, p in piv))

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def is_full(self) -> bool:
        return self.rank == self.dim

    def lattice(self) -> Lattice:
        return canonicalize(self.dim, [p for _, p in self.pivots])

    def generators(self) -> list[Vector]:
        return [p for _, p in self.pivots]

    def __contains__(self, v) -> bool:
        v = list(v)
        piv = dict(self.pivots)
        for c in reversed(range(self.dim)):
            if c in piv:
                q, r = divmod(v[c], piv[c][c])
                if r:
                    return False
                if q:
                    v = [a - q * b for a, b in zip(v, piv[c])]
            elif v[c]:
                return False
        return True

    def is_trivial(self) -> bool:
        return self.rank == 0

    def nonzero_element(self) -> Vector | None:
        """A short nonzero member, preferring unit vectors."""
        if self.is_trivial():
            return None
        for l in range(self.dim):
            e = tuple(1 if k == l else 0 for k in range(self.dim))
            if e in self:
                return e
        return min((p for _, p in self.pivots), key=lambda p: sum(abs(x) for x in p))


def intersect_all(lattices: Iterable[Lattice]) -> Lattice:
    return _fold(intersect, lattices)


def _same_dim(L1: Lattice, L2: Lattice) -> None:
    if L1.dim != L2.dim:
        raise ValueError(f"dimension mismatch: {L1.dim} vs {L2.dim}")
