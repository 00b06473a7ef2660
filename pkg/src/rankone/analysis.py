"""Finite-depth decision procedures for factor and conjugacy criteria.

Every "there is N such that for all n >= m >= N" statement is scanned up to
the construction depth and answered with a three-valued Verdict.  Negative
answers come with certificates built from forced vectors: if a vector v
pairs up at least a 2*eps fraction of some descendant set I_{m,n}, then any
G that has all but an eps fraction of I_{m,n} in one coset must contain v.

``window`` (default 2) is how many levels an eventual clause must be seen
to hold for: N is only accepted when N <= depth - window.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import descendants as desc
from . import lattice as lat
from . import odometer as odo
from .construction import ConstructionSpec, folner_report
from .lattice import Lattice, Residue, Subgroup
from .odometer import OdometerSpec
from .shapes import Rect
from .verdict import (INCONCLUSIVE, REFUTED, SUPPORTED, CapExceeded, Verdict, check_epsilon,
                      inconclusive, refuted, supported)

Vector = tuple[int, ...]

WINDOW = 2
PAIR_CAP = 10_000


# deviations


@dataclass
class DeviationTable:
    lattice: Lattice
    entries: dict = field(default_factory=dict)  # (m, n) -> (dev, g_star Residue)

    def rows(self) -> list[dict]:
        return [{"m": m, "n": n, "dev": d, "g_star": g.rep}
                for (m, n), (d, g) in sorted(self.entries.items())]


def _majority(h: lat.ResidueHistogram) -> tuple[Fraction, Residue]:
    # ties go to the smallest representative so tables are reproducible
    rep, best = min(h.counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return 1 - Fraction(best, h.total), Residue(h.lattice, rep)


def deviation(spec: ConstructionSpec, m: int, n: int, G: Lattice) -> tuple[Fraction, Residue]:
    return _majority(desc.compose_hist(spec, m, n, G))


def deviation_table(spec: ConstructionSpec, G: Lattice, depth=None, start=1) -> DeviationTable:
    depth = spec.depth if depth is None else depth
    cache = {k: desc.placement_histogram(spec, k, G) for k in range(start, depth)}
    table = DeviationTable(G)
    for m in range(start, depth + 1):
        h = lat.ResidueHistogram(G, {lat.zero(G).rep: 1})
        for n in range(m, depth + 1):
            table.entries[(m, n)] = _majority(h)
            if n < depth:
                h = h.convolve(cache[n])
    return table


# forced vectors


@dataclass(frozen=True)
class ForcedVector:
    vector: Vector
    m: int
    n: int
    fraction: Fraction
    exact: bool  # False: fraction is a proven lower bound from level structure


@dataclass
class ForcedClosure:
    start: int
    depth: int
    threshold: Fraction
    vectors: list[ForcedVector]
    subgroup: Subgroup

    @property
    def full(self) -> bool:
        return self.subgroup.is_full

    @property
    def everything(self) -> bool:
        """The forced vectors generate all of Z^d."""
        return self.full and lat.index(self.lattice()) == 1

    def lattice(self) -> Lattice:
        return self.subgroup.lattice()

    def first_outside(self, G: Lattice) -> ForcedVector | None:
        return next((f for f in self.vectors if not lat.contains(G, f.vector)), None)


def _canon_sign(v: Vector) -> Vector:
    for x in v:
        if x:
            return v if x > 0 else tuple(-y for y in v)
    return v


def _probe_order(v: Vector):
    # short vectors first; among equals, the e_1 direction before e_2 and so on
    return sum(map(abs, v)), tuple(-abs(x) for x in v), v


def level_differences(spec: ConstructionSpec, k: int) -> list[Vector]:
    """Offset differences between blocks of P_k and the repeat steps inside blocks, up to sign."""
    blocks = spec.placements(k)
    out = set()
    for a, b in itertools.permutations(blocks, 2):
        out.add(_canon_sign(tuple(y - x for x, y in zip(a.offset, b.offset))))
    for b in blocks:
        out.update(b.steps())
    out.discard((0,) * spec.dim)
    return sorted(out, key=_probe_order)


def probe_set(spec: ConstructionSpec, m: int, n: int, extra: Iterable = ()) -> list[Vector]:
    out = set()
    for k in range(m, n):
        out.update(level_differences(spec, k))
    for k in range(m, n - 1):
        for a in level_differences(spec, k):
            for b in level_differences(spec, k + 1):
                out.add(_canon_sign(tuple(x + y for x, y in zip(a, b))))
                out.add(_canon_sign(tuple(x - y for x, y in zip(a, b))))
    out.update(_canon_sign(tuple(v)) for v in extra)
    out.discard((0,) * spec.dim)
    return sorted(out, key=_probe_order)


def pair_fraction_lower_bound(spec: ConstructionSpec, m: int, n: int, v: Sequence[int]) -> Fraction:
    """Best product of per-level pair fractions over splits ``v = sum_k delta_k``.

    If ``p_k + delta_k`` lies in P_k for every k, then ``sum p_k + v`` is in
    I_{m,n}; the sumset is disjoint, so the product is a lower bound.
    The split is searched over level differences for all but the last level.
    """
    v = tuple(v)
    if n == m + 1:
        return desc.level_pair_fraction(spec, m, v)
    best = Fraction(0)
    zero = (0,) * spec.dim
    cands = [zero] + level_differences(spec, m)
    cands += [tuple(-x for x in c) for c in cands[1:]]
    for delta in cands:
        f = Fraction(1) if delta == zero else desc.level_pair_fraction(spec, m, delta)
        if f <= best:
            continue
        rest = tuple(a - b for a, b in zip(v, delta))
        best = max(best, f * pair_fraction_lower_bound(spec, m + 1, n, rest))
    return best


def forced_vectors(spec: ConstructionSpec, m: int, n: int, threshold, extra=(),
                   cap: int = PAIR_CAP) -> list[ForcedVector]:
    """Probe vectors whose pair fraction in I_{m,n} is at least ``threshold``."""
    return list(_forced_vectors(spec, m, n, Fraction(threshold), tuple(map(tuple, extra)), cap))


@functools.lru_cache(maxsize=4096)
def _forced_vectors(spec, m, n, threshold, extra, cap) -> tuple[ForcedVector, ...]:
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    probes = probe_set(spec, m, n, extra)
    pts = None
    if n > m + 1 and desc.cardinality(spec, m, n) <= cap:
        pts = desc.compose_exact(spec, m, n, cap)
    out = []
    for v in probes:
        if n == m + 1:
            f, exact = desc.level_pair_fraction(spec, m, v), True
        elif pts is not None:
            hits = sum(1 for i in pts if tuple(a + b for a, b in zip(i, v)) in pts)
            f, exact = Fraction(hits, len(pts)), True
        else:
            f, exact = pair_fraction_lower_bound(spec, m, n, v), False
        if f >= threshold:
            out.append(ForcedVector(v, m, n, f, exact))
    return tuple(out)


def windows(start: int, depth: int, window: int = WINDOW) -> list[tuple[int, int]]:
    stop = min(depth, start + window)
    return [(a, b) for a in range(start, stop) for b in range(a + 1, stop + 1)]


def forced_closure(spec: ConstructionSpec, depth=None, eps=None, threshold=None,
                   window: int = WINDOW, start=None, extra=()) -> ForcedClosure:
    """Join of the vectors forced at threshold 2*eps in every window inside [start, start+window]."""
    depth = spec.depth if depth is None else depth
    if threshold is None:
        if eps is None:
            raise ValueError("give eps or threshold")
        check_epsilon(eps)
        threshold = 2 * Fraction(eps)
    start = max(1, depth - window) if start is None else start
    found = []
    for m, n in windows(start, depth, window):
        found.extend(forced_vectors(spec, m, n, threshold, extra))
    sub = Subgroup.of(spec.dim, [f.vector for f in found])
    return ForcedClosure(start, depth, Fraction(threshold), found, sub)


def closure_profile(spec: ConstructionSpec, depth, eps, window: int = WINDOW) -> list[ForcedClosure]:
    """Forced closures for every window start from 1 to depth - window."""
    last = max(1, depth - window)
    return [forced_closure(spec, depth=min(depth, s + window), eps=eps, window=window, start=s)
            for s in range(1, last + 1)]


def image_size(sub: Subgroup, G: Lattice) -> int:
    """Order of the image of ``sub`` in Z^d/G."""
    gens = [lat.reduce(G, g) for g in sub.generators()]
    seen = {lat.zero(G).rep}
    frontier = [lat.zero(G)]
    while frontier:
        nxt = []
        for r in frontier:
            for g in gens:
                s = r + g
                if s.rep not in seen:
                    seen.add(s.rep)
                    nxt.append(s)
        frontier = nxt
    return len(seen)


def persistent_vector(profile: list[ForcedClosure], dim: int) -> Vector | None:
    """A short vector forced from the first window start onwards, if any."""
    first = profile[0].subgroup
    cands = [tuple(1 if k == l else 0 for k in range(dim)) for l in range(dim)]
    cands += sorted(first.generators(), key=lambda v: (sum(map(abs, v)), v))
    for v in cands:
        if any(v) and all(v in c.subgroup for c in profile):
            return v
    return None


# the finite-factor criterion


def _folner_gate(spec, depth, verdict: Verdict) -> Verdict:
    rep = folner_report(spec, depth=depth)
    if not rep.flag:
        return verdict
    verdict.details["would_be"] = verdict.status
    verdict.details["folner_flagged"] = rep.flagged
    verdict.status = INCONCLUSIVE
    verdict.folner_flag = True
    verdict.reason = ("shapes are not visibly Følner along " + ", ".join(map(str, rep.flagged))
                      + "; the descendant criterion needs a Følner sequence")
    return verdict


def finite_factor_check(spec: ConstructionSpec, G: Lattice, eps, depth=None,
                        window: int = WINDOW, gate: bool = True) -> Verdict:
    """Is ``dev_{m,n}(G) < eps`` for all ``N <= m <= n <= depth``, for some admissible N?

    Refuted when the forced subgroup keeps a nontrivial, non-shrinking image
    in Z^d/G at every window start: then no late window can pass.
    """
    check_epsilon(eps)
    eps = Fraction(eps)
    depth = spec.depth if depth is None else depth
    if depth > spec.depth:
        raise ValueError(f"construction only has depth {spec.depth}")
    table = deviation_table(spec, G, depth)
    bad = [(m, n) for (m, n), (d, _) in table.entries.items() if d >= eps]
    N = 1 + max((m for m, _ in bad), default=0)
    params = dict(lattice=G, epsilon=eps, window=window, table=table.rows())
    if N <= depth - window:
        v = supported(depth, N=N, reason=f"dev < eps for all {N} <= m <= n <= {depth}", **params)
    else:
        v = _refute_by_forcing(spec, G, eps, depth, window, params)
        if v is None:
            why = (f"deviation reaches eps at {bad[-1]}" if bad
                   else f"depth {depth} leaves no room for a {window}-level window")
            v = inconclusive(depth, why + "; no persistent forced certificate was found",
                             failing=bad, **params)
    return _folner_gate(spec, depth, v) if gate else v


def _refute_by_forcing(spec, G, eps, depth, window, params) -> Verdict | None:
    if depth - window < 1:
        return None
    profile = closure_profile(spec, depth, eps, window)
    defects = [image_size(c.subgroup, G) for c in profile]
    if min(defects) <= 1 or any(b < a for a, b in zip(defects, defects[1:])):
        return None
    last = profile[-1]
    w = last.first_outside(G)
    return refuted(depth, w.vector,
                   reason=f"vector with pair fraction {w.fraction} >= 2*eps in I_({w.m},{w.n}) "
                          "lies outside G",
                   certificate=w, closure=last.subgroup.generators(),
                   closure_is_everything=last.everything, defect_profile=defects, **params)


def odometer_factor_check(spec: ConstructionSpec, chain: OdometerSpec, eps, depth=None,
                          window: int = WINDOW) -> Verdict:
    """Finite-factor check for each chain group the truncation can resolve.

    Group j is only resolvable when j <= depth - window, so later groups of
    the chain are not tested.
    """
    depth = spec.depth if depth is None else depth
    J = min(chain.depth, depth - window)
    if J < 1:
        return inconclusive(depth, "construction too shallow to test any chain group")
    profile = []
    status, flag = SUPPORTED, False
    for j in range(1, J + 1):
        v = finite_factor_check(spec, chain.group(j), eps, depth, window)
        profile.append({"j": j, "lattice": chain.group(j), "status": v.status, "N": v.N})
        if v.refuted:
            out = refuted(depth, v.witness, reason=f"chain group {j} is refuted: {v.reason}",
                          j=j, certificate=v.details.get("certificate"), profile=profile)
            out.folner_flag = v.folner_flag
            return out
        if not v.supported:
            status = INCONCLUSIVE
            flag = v.folner_flag
    if status == SUPPORTED:
        N = max(p["N"] for p in profile)
        return supported(depth, N=N, reason=f"chain groups 1..{J} all supported", profile=profile)
    out = inconclusive(depth, "some chain group is not decided", profile=profile)
    out.folner_flag = flag
    return out


@dataclass
class FFCandidateSet:
    supported: list[Lattice]
    summaries: dict  # lattice -> (status, N)
    max_index: int
    depth: int
    intersection_closed: bool
    generated: OdometerSpec | None = None


def scan_pool(spec: ConstructionSpec, max_index: int, eps, depth=None,
              window: int = WINDOW) -> FFCandidateSet:
    depth = spec.depth if depth is None else depth
    pool = lat.enumerate_sublattices(spec.dim, max_index)
    summaries = {}
    good = []
    for G in pool:
        v = finite_factor_check(spec, G, eps, depth, window)
        summaries[G] = (v.status, v.N)
        if v.supported:
            good.append(G)
    goodset = set(good)
    closed = True
    for A, B in itertools.combinations(good, 2):
        C = lat.intersect(A, B)
        if lat.index(C) <= max_index and C not in goodset:
            closed = False
            break
    gen = odo.generate_from_family(good, rule=None) if good else None
    return FFCandidateSet(good, summaries, max_index, depth, closed, gen)


def some_infinite_odometer_check(spec: ConstructionSpec, max_index: int, eps, depth=None,
                                 window: int = WINDOW, free: bool = False
                                 ) -> tuple[Verdict, FFCandidateSet]:
    """Does the construction look like it factors onto an infinite (or free) odometer?"""
    depth = spec.depth if depth is None else depth
    cands = scan_pool(spec, max_index, eps, depth, window)
    rep = folner_report(spec, depth=depth)
    profile = closure_profile(spec, depth, eps, window) if depth > window else []
    bottom = cands.generated.chain[-1] if cands.generated else None
    top_index = lat.index(bottom) if bottom is not None else 1
    info = dict(max_index=max_index, epsilon=Fraction(eps), window=window,
                supported_count=len(cands.supported), intersection_index=top_index,
                intersection_closed=cands.intersection_closed)
    if rep.flag:
        v = inconclusive(depth, "shapes are not visibly Følner", **info)
        v.folner_flag = True
        return v, cands
    if free and profile:
        p = persistent_vector(profile, spec.dim)
        if p is not None:
            return refuted(depth, p, reason="this vector is forced at every window start, so every "
                                            "finite factor group contains it", **info), cands
    if profile and all(c.everything for c in profile):
        return refuted(depth, profile[-1].lattice(),
                       reason="forced vectors generate Z^d: no nontrivial finite factor", **info), cands
    if top_index >= max_index:
        return supported(depth, reason=f"supported groups intersect to index {top_index} "
                                       f">= scan bound {max_index}", **info), cands
    return inconclusive(depth, f"supported groups only reach index {top_index}", **info), cands


# conjugacy


def best_residue_set(spec: ConstructionSpec, l: int, m: int, G: Lattice) -> tuple[list[Residue], Fraction]:
    """The D minimising ``#(I_{l,m} △ {i in F_m : i + G in D}) / #I_{l,m}``.

    The objective splits over residues: r costs ``cF(r) - cI(r)`` inside D and
    ``cI(r)`` outside, so r belongs in D exactly when ``2 cI(r) > cF(r)``.
    """
    hI = desc.compose_hist(spec, l, m, G)
    hF = lat.shape_coset_histogram(spec.shape(m), G)
    D, cost = [], 0
    for r in sorted(set(hF.counts) | set(hI.counts)):
        ci, cf = hI.counts.get(r, 0), hF.counts.get(r, 0)
        if 2 * ci > cf:
            D.append(Residue(G, r))
            cost += cf - ci
        else:
            cost += ci
    return D, Fraction(cost, hI.total)


def residue_set_ratio(spec, l, m, G, D: Iterable[Residue]) -> Fraction:
    """Symmetric-difference ratio for an arbitrary residue set D."""
    keep = {r.rep for r in D}
    hI = desc.compose_hist(spec, l, m, G)
    hF = lat.shape_coset_histogram(spec.shape(m), G)
    cost = 0
    for r in set(hF.counts) | set(hI.counts):
        ci, cf = hI.counts.get(r, 0), hF.counts.get(r, 0)
        cost += cf - ci if r in keep else ci
    return Fraction(cost, hI.total)


def _approximates(spec, l, G, eps, depth) -> tuple[bool, Fraction, list]:
    worst, D = Fraction(0), []
    for m in range(l, depth + 1):
        D, ratio = best_residue_set(spec, l, m, G)
        worst = max(worst, ratio)
        if ratio >= eps:
            return False, ratio, D
    return True, worst, D


def conjugacy_check(spec: ConstructionSpec, chain: OdometerSpec, eps, depth=None,
                    window: int = WINDOW) -> Verdict:
    """Residue-set approximation for every base level plus the odometer-factor check."""
    check_epsilon(eps)
    eps = Fraction(eps)
    depth = spec.depth if depth is None else depth
    b = odometer_factor_check(spec, chain, eps, depth, window)
    if b.refuted:
        out = refuted(depth, b.witness, reason=f"odometer factor fails: {b.reason}", factor=b.details)
        out.folner_flag = b.folner_flag
        return out
    rows, missing = [], None
    for l in range(1, depth - window + 1):
        hit = None
        for k in range(1, depth + 1):
            try:
                G = chain.group(k)
            except IndexError:
                break
            ok, worst, D = _approximates(spec, l, G, eps, depth)
            if ok:
                hit = {"l": l, "k": k, "max_ratio": worst, "D": [r.rep for r in D]}
                break
        if hit is None:
            missing = missing or l
            rows.append({"l": l, "k": None})
        else:
            rows.append(hit)
    if missing is None and b.supported:
        return supported(depth, reason="every base level is approximated by a chain group and "
                                       "the odometer factor check passes",
                         approximation=rows, factor=b.details)
    reason = (f"no chain group approximates I_(l,m) for l={missing}" if missing is not None
              else f"odometer factor check is {b.status}")
    out = inconclusive(depth, reason, approximation=rows, factor=b.details)
    out.folner_flag = b.folner_flag
    return out


def conjugate_to_some_odometer_check(spec: ConstructionSpec, max_index: int, eps_grid, depth=None,
                                     levels=(1, 2), eta_grid=None, window: int = WINDOW) -> Verdict:
    """Search the index-bounded pool for groups approximating each (l, eps) cell."""
    depth = spec.depth if depth is None else depth
    eps_grid = [Fraction(e) for e in eps_grid]
    eta_grid = eps_grid if eta_grid is None else [Fraction(e) for e in eta_grid]
    for e in eps_grid + eta_grid:
        check_epsilon(e)
    pool = lat.enumerate_sublattices(spec.dim, max_index)
    passes_b = {}
    for G in pool:
        passes_b[G] = all(finite_factor_check(spec, G, eta, depth, window).supported for eta in eta_grid)
    cells, witnesses, first_gap = [], [], None
    for l in levels:
        for e in eps_grid:
            found = [G for G in pool if passes_b[G] and _approximates(spec, l, G, e, depth)[0]]
            cells.append({"l": l, "epsilon": e, "witness_indices": [lat.index(G) for G in found]})
            if found:
                witnesses.append(min(found, key=Lattice.key))
            elif first_gap is None:
                first_gap = (l, e)
    generated = odo.generate_from_family(witnesses, rule=None) if witnesses else None
    info = dict(max_index=max_index, levels=list(levels), eps_grid=eps_grid, eta_grid=eta_grid,
                cells=cells, generated=generated)
    prof = closure_profile(spec, depth, min(eta_grid), window) if depth > window else []
    p = persistent_vector(prof, spec.dim) if prof else None
    # any odometer assembled from finite factor groups contains a persistent vector
    info["free_possible"] = p is None
    if p is not None:
        info["freeness_witness"] = p
    rep = folner_report(spec, depth=depth)
    if rep.flag:
        v = inconclusive(depth, "shapes are not visibly Følner", **info)
        v.folner_flag = True
        return v
    if first_gap is None:
        return supported(depth, reason="every (l, eps) cell has a witness group", **info)
    if prof and all(c.everything for c in prof):
        top = lat.Lattice.identity(spec.dim)
        l, e = first_gap
        ok, ratio, _ = _approximates(spec, l, top, e, depth)
        if not ok:
            return refuted(depth, top, reason=f"only Z^d survives the factor test and it fails the "
                                              f"approximation at l={l}, eps={e} (ratio {ratio})",
                           **info)
    return inconclusive(depth, f"no witness group for cell l={first_gap[0]}, eps={first_gap[1]}",
                        **info)


# sub-action congruence


def subaction_congruence_check(spec: ConstructionSpec, axis: int, modulus: int, depth=None) -> Verdict:
    """Are all placement coordinates along ``axis`` (1-based) divisible by ``modulus`` from some level on?

    A sufficient condition for the sub-action along that axis to factor onto
    rotation mod ``modulus``; failure says nothing about the factor itself.
    """
    depth = spec.depth if depth is None else depth
    if not 1 <= axis <= spec.dim:
        raise ValueError(f"axis must be between 1 and {spec.dim}")
    if modulus < 1:
        raise ValueError("modulus must be positive")
    a = axis - 1
    last_bad = None
    for n in range(1, depth):
        for b in spec.placements(n):
            if b.offset[a] % modulus or (b.counts[a] > 1 and b.spacing[a] % modulus):
                p = b.offset if b.offset[a] % modulus else b.last()
                last_bad = (n, p)
    N = 1 if last_bad is None else last_bad[0] + 1
    params = dict(axis=axis, modulus=modulus)
    if N <= depth - 1:
        return supported(depth, N=N, reason=f"placement coordinate {axis} is 0 mod {modulus} "
                                            f"for levels {N}..{depth - 1}", **params)
    n, p = last_bad
    return inconclusive(depth, f"sufficient condition fails at level {n}: placement {p}",
                        witness_level=n, witness_placement=p, **params)
