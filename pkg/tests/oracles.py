"""Brute-force reference implementations, kept independent of the package code."""
from __future__ import annotations

import itertools
from fractions import Fraction


def det(rows):
    """Exact determinant by Fraction elimination."""
    a = [[Fraction(x) for x in r] for r in rows]
    n = len(a)
    sign = 1
    out = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            sign = -sign
        out *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return int(out * sign)


class SpanOracle:
    """Membership in the integer span of ``gens`` via its image in (Z/M)^d.

    M is the smallest nonzero |det| over d-subsets of the generators, so
    M Z^d sits inside the span and the finite image decides membership.
    """

    def __init__(self, dim, gens):
        self.dim = dim
        gens = [tuple(g) for g in gens]
        dets = [abs(det([list(c) for c in zip(*sub)])) for sub in itertools.combinations(gens, dim)]
        dets = [x for x in dets if x]
        if not dets:
            raise ValueError("rank deficient")
        self.M = min(dets)
        M = self.M
        red = [tuple(x % M for x in g) for g in gens]
        seen = {(0,) * dim}
        frontier = list(seen)
        while frontier:
            nxt = []
            for p in frontier:
                for g in red:
                    q = tuple((a + b) % M for a, b in zip(p, g))
                    if q not in seen:
                        seen.add(q)
                        nxt.append(q)
            frontier = nxt
        self.image = seen

    def __contains__(self, v):
        return tuple(x % self.M for x in v) in self.image

    @property
    def index(self):
        return self.M ** self.dim // len(self.image)

    def canonical_columns(self):
        """Column-by-column minimal search: smallest diagonal, then the boxed off-diagonals."""
        d = self.dim
        cols = []
        diag = []
        for l in range(d):
            n = 1
            while True:
                found = None
                for offs in itertools.product(*(range(a) for a in diag)):
                    v = tuple(offs) + (n,) + (0,) * (d - l - 1)
                    if v in self:
                        found = v
                        break
                if found is not None:
                    cols.append(found)
                    diag.append(n)
                    break
                n += 1
        return tuple(cols)


def box(dim, side):
    return itertools.product(range(side), repeat=dim)


def subgroups_of_index(n):
    """Distinct index-n subgroups of Z^2, as subgroups of (Z/n)^2 generated by pairs."""
    elems = list(itertools.product(range(n), repeat=2))
    found = set()
    for g1, g2 in itertools.combinations_with_replacement(elems, 2):
        seen = {(0, 0)}
        frontier = [(0, 0)]
        while frontier:
            nxt = []
            for p in frontier:
                for g in (g1, g2):
                    q = ((p[0] + g[0]) % n, (p[1] + g[1]) % n)
                    if q not in seen:
                        seen.add(q)
                        nxt.append(q)
            frontier = nxt
        if len(seen) == n:
            found.add(frozenset(seen))
    return found


def sigma(n):
    return sum(k for k in range(1, n + 1) if n % k == 0)


def sumset(a, b):
    return [tuple(x + y for x, y in zip(p, q)) for p in a for q in b]


def descendants_brute(levels_points, m, n, dim):
    cur = [(0,) * dim]
    for k in range(m, n):
        cur = sumset(cur, levels_points[k - 1])
    return cur


def pair_fraction_brute(points, v):
    s = set(points)
    hits = sum(1 for p in points if tuple(a + b for a, b in zip(p, v)) in s)
    return Fraction(hits, len(points))


def coset_counts(points, member_diff):
    """Group points into classes under ``member_diff(p, q)`` (True when p - q is in G)."""
    classes = []
    for p in points:
        for c in classes:
            if member_diff(p, c[0]):
                c.append(p)
                break
        else:
            classes.append([p])
    return [len(c) for c in classes]


def messy_generators(cols, rng):
    """Unimodular column mixing plus redundant combinations, shuffled."""
    d = len(cols)
    cols = [list(c) for c in cols]
    for _ in range(rng.randint(0, 6)):
        i, j = rng.sample(range(d), 2)
        k = rng.randint(-3, 3)
        cols[i] = [a + k * b for a, b in zip(cols[i], cols[j])]
    extra = []
    for _ in range(rng.randint(0, 3)):
        coeffs = [rng.randint(-2, 2) for _ in range(d)]
        extra.append([sum(c * col[k] for c, col in zip(coeffs, cols)) for k in range(d)])
    gens = cols + extra
    rng.shuffle(gens)
    return gens


def coset_reps(oracle):
    """Representatives of Z^d / span, found by walking unit steps."""
    d = oracle.dim
    reps = [(0,) * d]
    frontier = list(reps)
    while frontier:
        nxt = []
        for p in frontier:
            for l in range(d):
                q = tuple(x + (1 if k == l else 0) for k, x in enumerate(p))
                if not any(tuple(a - b for a, b in zip(q, r)) in oracle for r in reps):
                    reps.append(q)
                    nxt.append(q)
        frontier = nxt
    return reps


def joint_coset_count(oa, ob):
    """#(Z^d / (A ∩ B)), as the size of the image of Z^d in Z^d/A x Z^d/B."""
    ra, rb = coset_reps(oa), coset_reps(ob)

    def key(v):
        ia = next(i for i, r in enumerate(ra) if tuple(a - b for a, b in zip(v, r)) in oa)
        ib = next(i for i, r in enumerate(rb) if tuple(a - b for a, b in zip(v, r)) in ob)
        return ia, ib

    d = oa.dim
    start = (0,) * d
    seen = {key(start)}
    frontier = [start]
    while frontier:
        nxt = []
        for p in frontier:
            for l in range(d):
                q = tuple(x + (1 if k == l else 0) for k, x in enumerate(p))
                kq = key(q)
                if kq not in seen:
                    seen.add(kq)
                    nxt.append(q)
        frontier = nxt
    return len(seen)
