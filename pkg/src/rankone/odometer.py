"""Z^d odometers given by decreasing chains of finite-index lattices.

A chain is only ever known to a finite depth.  An optional rule says how
it continues past the truncation:

* ``None``: nothing is known beyond the listed groups;
* ``"explicit"``: the chain is finite and continues with its last group;
* ``PowRule(base)``: ``G_j = B^j Z^d`` for an upper-triangular integer
  matrix ``B`` with positive diagonal.

Rules are what allow genuine Supported/Refuted answers to questions that
quantify over the whole chain; bare truncations mostly yield Inconclusive.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from . import lattice as lat
from .lattice import Lattice, Residue
from .shapes import Rect
from .verdict import Verdict, inconclusive, refuted, supported

EXPLICIT = "explicit"

# state budget when iterating B^N modulo index(H)
POW_SEARCH_CAP = 100_000


@dataclass(frozen=True)
class PowRule:
    """``G_j = B^j Z^d``; ``base`` is the row-major matrix B."""

    base: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        d = len(self.base)
        for i, row in enumerate(self.base):
            if len(row) != d:
                raise ValueError("pow base must be square")
            if row[i] <= 0:
                raise ValueError("pow base needs a positive diagonal")
            if any(row[j] for j in range(i)):
                raise ValueError("pow base must be upper-triangular")

    @property
    def dim(self) -> int:
        return len(self.base)

    def power(self, j: int) -> list[list[int]]:
        return _matpow(self.base, j)

    def group(self, j: int) -> Lattice:
        return Lattice.from_rows(self.power(j))

    @property
    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.base[i][i] for i in range(self.dim))

    def is_diagonal(self) -> bool:
        return all(self.base[i][j] == 0 for i in range(self.dim) for j in range(self.dim) if i != j)


@dataclass(frozen=True)
class OdometerSpec:
    dim: int
    chain: tuple[Lattice, ...]
    rule: PowRule | str | None = None

    def __post_init__(self):
        if not self.chain:
            raise ValueError("an odometer needs at least one group")
        for j, G in enumerate(self.chain):
            if G.dim != self.dim:
                raise ValueError(f"group {j + 1} has dimension {G.dim}, expected {self.dim}")
        for j in range(len(self.chain) - 1):
            if not lat.is_sublattice(self.chain[j + 1], self.chain[j]):
                raise ValueError(f"chain is not decreasing at position {j + 1}")
        if isinstance(self.rule, PowRule):
            if self.rule.dim != self.dim:
                raise ValueError("pow rule dimension mismatch")
            for j, G in enumerate(self.chain, start=1):
                if G != self.rule.group(j):
                    raise ValueError(f"group {j} does not match the pow rule")
        elif self.rule not in (None, EXPLICIT):
            raise ValueError(f"unknown chain rule {self.rule!r}")

    @property
    def depth(self) -> int:
        return len(self.chain)

    def group(self, j: int) -> Lattice:
        """G_j, 1-based; may look past the truncation when the rule allows."""
        if j < 1:
            raise ValueError("groups are numbered from 1")
        if j <= self.depth:
            return self.chain[j - 1]
        if isinstance(self.rule, PowRule):
            return self.rule.group(j)
        if self.rule == EXPLICIT:
            return self.chain[-1]
        raise IndexError(f"group {j} lies beyond the truncation and no rule extends it")

    def truncate(self, depth: int) -> "OdometerSpec":
        return OdometerSpec(self.dim, tuple(self.group(j) for j in range(1, depth + 1)), self.rule)


def pow_chain(base: Sequence[Sequence[int]], depth: int) -> OdometerSpec:
    rule = PowRule(tuple(tuple(int(x) for x in row) for row in base))
    return OdometerSpec(rule.dim, tuple(rule.group(j) for j in range(1, depth + 1)), rule)


def explicit_chain(groups: Sequence[Lattice]) -> OdometerSpec:
    return OdometerSpec(groups[0].dim, tuple(groups), EXPLICIT)


# points and the action


@dataclass(frozen=True)
class OdometerPoint:
    spec: OdometerSpec
    coords: tuple[Residue, ...]

    def __post_init__(self):
        if len(self.coords) != self.spec.depth:
            raise ValueError("one coordinate per chain group is required")
        for j, (r, G) in enumerate(zip(self.coords, self.spec.chain)):
            if r.lattice != G:
                raise ValueError(f"coordinate {j + 1} lives over the wrong lattice")
            if lat.reduce(G, r.rep) != r:
                raise ValueError(f"coordinate {j + 1} is not reduced")
        for j in range(len(self.coords) - 1):
            if lat.quotient_project(self.coords[j + 1], self.spec.chain[j]) != self.coords[j]:
                raise ValueError(f"coordinates {j + 1} and {j + 2} are incompatible")

    def reps(self) -> list[tuple[int, ...]]:
        return [r.rep for r in self.coords]


def point(spec: OdometerSpec, v: Sequence[int]) -> OdometerPoint:
    """The image of the integer vector ``v`` in the truncated odometer."""
    return OdometerPoint(spec, tuple(lat.reduce(G, v) for G in spec.chain))


def point_from_reps(spec: OdometerSpec, reps: Iterable[Sequence[int]]) -> OdometerPoint:
    return OdometerPoint(spec, tuple(lat.reduce(G, r) for G, r in zip(spec.chain, reps)))


def act(p: OdometerPoint, v: Sequence[int]) -> OdometerPoint:
    return OdometerPoint(p.spec, tuple(r + lat.reduce(r.lattice, v) for r in p.coords))


def coordinate_measure(spec: OdometerSpec, j: int) -> Fraction:
    """Mass of one cylinder set at level j."""
    return Fraction(1, lat.index(spec.group(j)))


def tower_shapes(spec: OdometerSpec) -> list[Rect]:
    """Box fundamental domains ``prod [0, a_ll)`` for each group of the chain."""
    return [Rect(G.diag) for G in spec.chain]


# chain-wide predicates


def is_free_at_depth(spec: OdometerSpec) -> Verdict:
    K = spec.depth
    last = spec.chain[-1]
    rule = spec.rule
    if isinstance(rule, PowRule):
        diag = rule.diagonal
        if all(a >= 2 for a in diag):
            return supported(K, reason="diagonal of B^j grows without bound in every coordinate")
        fixed = _pow_fixed_unit(rule)
        if fixed is not None:
            return refuted(K, fixed, reason="B fixes this vector, so it lies in every group")
        return inconclusive(K, "pow rule with a unit diagonal entry and no fixed unit vector",
                            last_group=last)
    if rule == EXPLICIT:
        return refuted(K, last.cols[0], reason="finite chain: the intersection is the last group")
    return inconclusive(K, "bare truncation: the intersection so far is the last group",
                        last_group=last)


def _pow_fixed_unit(rule: PowRule) -> tuple[int, ...] | None:
    d = rule.dim
    for l in range(d):
        col = tuple(rule.base[k][l] for k in range(d))
        e = tuple(1 if k == l else 0 for k in range(d))
        if col == e:
            return e
    return None


def is_infinite_at_depth(spec: OdometerSpec) -> Verdict:
    K = spec.depth
    rule = spec.rule
    distinct = len(set(spec.chain))
    if isinstance(rule, PowRule):
        det = math.prod(rule.diagonal)
        if det > 1:
            return supported(K, reason="det B > 1, so the chain never stabilises")
        return refuted(K, rule.group(1), reason="det B = 1: every group equals Z^d")
    if rule == EXPLICIT:
        return refuted(K, spec.chain[-1], reason="finite chain: eventually constant")
    if distinct == 1:
        return inconclusive(K, f"constant through depth {K}", distinct_groups=distinct)
    return inconclusive(K, "bare truncation: later stabilisation cannot be excluded",
                        distinct_groups=distinct)


def ff_contains(spec: OdometerSpec, H: Lattice) -> Verdict:
    """Does some G_N sit inside H (i.e. is H a finite factor group)?"""
    K = spec.depth
    for N, G in enumerate(spec.chain, start=1):
        if lat.is_sublattice(G, H):
            return supported(K, N=N, reason=f"G_{N} is contained in H")
    rule = spec.rule
    if rule == EXPLICIT:
        return refuted(K, H, reason="no group of the finite chain lies in H")
    if isinstance(rule, PowRule):
        return _pow_contains(spec, rule, H)
    return inconclusive(K, f"no G_N inside H for N <= {K}; chain has no rule")


def _pow_contains(spec: OdometerSpec, rule: PowRule, H: Lattice) -> Verdict:
    # G_N is inside H iff every column of B^N is; that only depends on B^N
    # modulo M = index(H), and the residues of B^N are eventually periodic.
    K = spec.depth
    M = lat.index(H)
    B = [[x % M for x in row] for row in rule.base]
    P = [row[:] for row in B]
    seen = set()
    for N in range(1, POW_SEARCH_CAP + 1):
        key = tuple(map(tuple, P))
        if key in seen:
            return refuted(K, H, reason=f"B^N mod {M} cycles without any G_N entering H")
        seen.add(key)
        if all(lat.contains(H, [P[k][l] for k in range(spec.dim)]) for l in range(spec.dim)):
            return supported(K, N=N, reason=f"G_{N} is contained in H (found from the pow rule)")
        P = _matmul_mod(B, P, M)
    return inconclusive(K, f"no decision within {POW_SEARCH_CAP} powers")


def generate_from_family(family: Sequence[Lattice], rule=EXPLICIT) -> OdometerSpec:
    """The chain of running intersections ``G_k = H_1 ∩ ... ∩ H_k``."""
    if not family:
        raise ValueError("empty family")
    chain = []
    acc = None
    for H in family:
        acc = H if acc is None else lat.intersect(acc, H)
        chain.append(acc)
    return OdometerSpec(chain[0].dim, tuple(chain), rule)


def _refuted_component(spec: OdometerSpec, H: Lattice):
    """First primary component of H that ``spec`` provably does not factor onto."""
    for _, comp in lat.primary_components(H):
        if ff_contains(spec, comp).refuted:
            return comp
    return H


def _interleave(A: OdometerSpec, B: OdometerSpec) -> list[tuple[str, int]]:
    # greedy walk A_{i1} ⊇ B_{j1} ⊇ A_{i2} ⊇ ... with strictly increasing indices
    path = [("A", 1)]
    last = {"A": 1, "B": 0}
    chains = {"A": A.chain, "B": B.chain}
    side = "A"
    while True:
        other = "B" if side == "A" else "A"
        cur = chains[side][path[-1][1] - 1]
        nxt = next((j for j in range(last[other] + 1, len(chains[other]) + 1)
                    if lat.is_sublattice(chains[other][j - 1], cur)), None)
        if nxt is None:
            return path
        path.append((other, nxt))
        last[other] = nxt
        side = other


def conjugate_at_depth(specA: OdometerSpec, specB: OdometerSpec) -> Verdict:
    depth = min(specA.depth, specB.depth)
    if specA.dim != specB.dim:
        raise ValueError("odometers of different dimension")
    for X, Y, name in ((specA, specB, "A"), (specB, specA, "B")):
        for j, G in enumerate(X.chain, start=1):
            if ff_contains(Y, G).refuted:
                w = _refuted_component(Y, G)
                return refuted(depth, w,
                               reason="finite factor group of one odometer that the other "
                                      "provably lacks",
                               source=name, group_index=j)
    walks = {}
    ok = True
    for X, Y, key in ((specA, specB, "from_A"), (specB, specA, "from_B")):
        path = _interleave(X, Y)
        walks[key] = path
        reached = any(
            (s == "A" and X.chain[i - 1] == X.chain[-1]) or (s == "B" and Y.chain[i - 1] == Y.chain[-1])
            for s, i in path
        )
        ok = ok and len(path) >= 2 and reached
    if ok:
        return supported(depth, reason="alternating interleaving reaches the end of a truncation",
                         walks=walks)
    return inconclusive(depth, "no interleaving through the truncations", walks=walks)


def _matmul_mod(A, B, M=None):
    n = len(A)
    out = [[sum(A[i][k] * B[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    if M is not None:
        out = [[x % M for x in row] for row in out]
    return out


def _matpow(A, j: int):
    n = len(A)
    out = [[int(i == k) for k in range(n)] for i in range(n)]
    base = [list(r) for r in A]
    while j:
        if j & 1:
            out = _matmul_mod(out, base)
        base = _matmul_mod(base, base)
        j >>= 1
    return out
