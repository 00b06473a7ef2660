import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rankone import analysis as an
from rankone import descendants as desc
from rankone import gallery
from rankone import lattice as lat
from rankone import odometer as odo
from rankone.lattice import Lattice, Residue
from rankone.verdict import BadEpsilon

import oracles
from strategies import pool

EPS = Fraction(1, 6)
TWO = Lattice.diagonal(2, 2)
OAC = gallery.OAC


@pytest.fixture(scope="module")
def chacon5():
    return gallery.chacon_product(5)


@pytest.fixture(scope="module")
def dyadic_oac():
    return gallery.build(OAC + "dyadic-z2", 6)


@pytest.fixture(scope="module")
def staggered():
    return gallery.staggered_z2(4)


# deviations


def test_deviation_examples(chacon5):
    dev, g = an.deviation(chacon5, 1, 2, TWO)
    assert dev == Fraction(5, 9) and g == Residue(TWO, (1, 1))
    horiz = gallery.build(OAC + "horizontal-odometer", 5)
    for m in range(1, 6):
        for n in range(m, 6):
            assert an.deviation(horiz, m, n, TWO) == (0, Residue(TWO, (0, 0)))
    assert an.deviation(chacon5, 1, 4, Lattice.identity(2))[0] == 0


def test_deviation_table_matches_pointwise(chacon5):
    t = an.deviation_table(chacon5, TWO)
    for (m, n), (d, g) in t.entries.items():
        assert (d, g) == an.deviation(chacon5, m, n, TWO)
        assert 0 <= d <= 1 - Fraction(1, desc.cardinality(chacon5, m, n))


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_deviation_is_antitone_under_coarsening(data):
    spec = data.draw(st.sampled_from([gallery.chacon_product(4), gallery.staggered_z2(3)]))
    G = data.draw(st.sampled_from(pool(2, 12)))
    H = data.draw(st.sampled_from([H for H in pool(2, 12) if lat.is_sublattice(G, H)]))
    m = data.draw(st.integers(1, spec.depth))
    n = data.draw(st.integers(m, spec.depth))
    assert an.deviation(spec, m, n, H)[0] <= an.deviation(spec, m, n, G)[0]


# the forcing lemma


def _brute_dev(pts, G):
    counts = oracles.coset_counts(pts, lambda p, q: lat.contains(G, [a - b for a, b in zip(p, q)]))
    return 1 - Fraction(max(counts), len(pts))


def _exact_instances():
    out = []
    for spec in [gallery.chacon_product(3), gallery.chacon_z(5), gallery.staggered_z2(3)]:
        for m in range(1, spec.depth):
            for n in range(m + 1, spec.depth + 1):
                if desc.cardinality(spec, m, n) <= 2000:
                    out.append((spec, m, n))
    return out


@pytest.mark.parametrize("spec,m,n", _exact_instances())
def test_forcing_lemma_by_brute_force(spec, m, n):
    """If v is outside G, no residue can hold more than 1 - f/2 of I_{m,n}."""
    pts = sorted(desc.compose_exact(spec, m, n))
    rng = random.Random(repr((spec.rule, m, n)))
    groups = rng.sample(pool(spec.dim, 12), min(12, len(pool(spec.dim, 12))))
    probes = an.probe_set(spec, m, n)[:10]
    for v in probes:
        f = oracles.pair_fraction_brute(pts, v)
        assert f == desc.pair_fraction(spec, m, n, v)
        for G in groups:
            if lat.contains(G, v):
                continue
            dev = _brute_dev(pts, G)
            assert dev == an.deviation(spec, m, n, G)[0]
            assert 2 * dev >= f


def test_lower_bound_never_exceeds_exact():
    spec = gallery.chacon_product(4)
    for m, n in [(1, 3), (2, 4)]:
        pts = desc.compose_exact(spec, m, n)
        for v in an.probe_set(spec, m, n)[:15]:
            assert an.pair_fraction_lower_bound(spec, m, n, v) <= oracles.pair_fraction_brute(list(pts), v)


def test_chacon_forced_vectors(chacon5):
    h = gallery.chacon_heights(5)
    for m in range(1, 4):
        found = {f.vector for f in an.forced_vectors(chacon5, m, m + 1, 2 * EPS)}
        assert (h[m - 1], 0) in found and (0, h[m - 1]) in found
    clo = an.forced_closure(chacon5, eps=EPS)
    assert clo.everything and clo.lattice() == Lattice.identity(2)
    for m in range(1, 4):
        assert tuple(a - 3 * b for a, b in zip((h[m], 0), (h[m - 1], 0))) == (1, 0)


def test_staggered_forced_vectors(staggered):
    for m in (1, 2, 3):
        f = {x.vector: x for x in an.forced_vectors(staggered, m, m + 1, Fraction(1, 2))}
        assert f[(1, 2 ** m)].fraction == Fraction(1, 2)
    for m in (1, 2):
        f = {x.vector: x for x in an.forced_vectors(staggered, m, m + 2, Fraction(1, 4))}
        assert f[(0, 2 ** m)].fraction >= Fraction(1, 4)
    assert (1, 0) in an.forced_closure(staggered, eps=EPS).subgroup


def test_no_forced_vector_outside_a_containing_group(dyadic_oac):
    for m in range(1, 5):
        for n in range(m + 1, min(m + 3, 7)):
            for f in an.forced_vectors(dyadic_oac, m, n, Fraction(1, 100)):
                assert lat.contains(TWO, f.vector)


# finite factors


def test_finite_factor_examples(chacon5, dyadic_oac):
    v = an.finite_factor_check(dyadic_oac, TWO, Fraction(1, 4))
    assert v.supported and v.N == 1
    assert all(r["dev"] == 0 for r in v.details["table"])
    v = an.finite_factor_check(chacon5, TWO, EPS)
    h = gallery.chacon_heights(5)
    assert v.refuted and v.witness in {(x, 0) for x in h}
    assert v.details["certificate"].fraction >= 2 * EPS  # exactly 1/3; see forcing lemma test
    horiz = gallery.build(OAC + "horizontal-odometer", 6)
    v = an.finite_factor_check(horiz, TWO, EPS)
    assert v.inconclusive and v.folner_flag and v.details["would_be"] == "supported"


def test_bad_epsilon(chacon5):
    for e in (0, 1, Fraction(3, 2), -1):
        with pytest.raises(BadEpsilon):
            an.finite_factor_check(chacon5, TWO, e)


def test_odometer_factor_examples(chacon5, dyadic_oac):
    assert an.odometer_factor_check(dyadic_oac, gallery.chain("dyadic-z2", 6), EPS).supported
    v = an.odometer_factor_check(chacon5, gallery.chain("dyadic-z2", 5), EPS)
    assert v.refuted and v.details["j"] == 1
    ident = odo.OdometerSpec(2, (Lattice.identity(2),) * 3)
    for spec in (chacon5, dyadic_oac):
        assert an.odometer_factor_check(spec, ident, EPS).supported


def test_some_odometer_dyadic(dyadic_oac):
    v, cands = an.some_infinite_odometer_check(dyadic_oac, 16, EPS)
    assert v.supported
    powers = {1, 2, 4, 8, 16}
    assert set(cands.supported) == {G for G in pool(2, 16) if lat.index(G) in powers}
    assert cands.intersection_closed
    good = set(cands.supported)
    for A, B in itertools.combinations(cands.supported, 2):
        C = lat.intersect(A, B)
        if lat.index(C) <= 16:
            assert C in good
    assert odo.conjugate_at_depth(cands.generated, gallery.chain("dyadic-z2", 6)).supported


def test_some_odometer_chacon(chacon5):
    v, cands = an.some_infinite_odometer_check(chacon5, 4, EPS)
    assert v.refuted and cands.supported == [Lattice.identity(2)]


def test_free_factor_staggered(staggered):
    v, cands = an.some_infinite_odometer_check(staggered, 4, EPS, free=True)
    assert v.refuted and v.witness == (1, 0)
    assert cands.supported and all((1, 0) in G for G in cands.supported)


# residue sets and conjugacy


def test_best_residue_examples(dyadic_oac, chacon5):
    D, ratio = an.best_residue_set(dyadic_oac, 1, 3, TWO)
    assert [r.rep for r in D] == [(0, 0)] and ratio == 0
    for m in (2, 3):
        D, ratio = an.best_residue_set(chacon5, 1, m, Lattice.identity(2))
        n_i = desc.cardinality(chacon5, 1, m)
        n_f = chacon5.shape(m).size()
        # with one residue, D = {0} wins only while I_{1,m} fills more than half of F_m
        assert [r.rep for r in D] == ([(0, 0)] if 2 * n_i > n_f else [])
        assert ratio == min(1, Fraction(n_f - n_i, n_i))


@pytest.mark.parametrize("spec,l,m", [(gallery.chacon_product(4), 1, 2), (gallery.chacon_product(4), 1, 3),
                                      (gallery.chacon_product(4), 2, 4), (gallery.staggered_z2(3), 1, 2)])
def test_best_residue_set_against_point_enumeration(spec, l, m):
    pts = desc.compose_exact(spec, l, m)
    F = list(spec.shape(m).points())
    for G in pool(2, 8)[::3]:
        D, ratio = an.best_residue_set(spec, l, m, G)
        keep = {r.rep for r in D}
        chosen = {p for p in F if lat.reduce(G, p).rep in keep}
        assert ratio == Fraction(len(chosen ^ set(pts)), len(pts))


def test_conjugacy_examples(dyadic_oac, chacon5):
    v = an.conjugacy_check(dyadic_oac, gallery.chain("dyadic-z2", 6), EPS)
    assert v.supported and all(r["max_ratio"] == 0 for r in v.details["approximation"])
    assert an.conjugacy_check(dyadic_oac, gallery.chain("triadic-z2", 6), EPS).refuted
    assert an.conjugacy_check(chacon5, gallery.chain("dyadic-z2", 5), EPS).refuted


def test_conjugate_to_some(dyadic_oac, chacon5, staggered):
    v = an.conjugate_to_some_odometer_check(dyadic_oac, 16, [EPS])
    assert v.supported
    assert odo.conjugate_at_depth(v.details["generated"], gallery.chain("dyadic-z2", 6)).supported
    assert an.conjugate_to_some_odometer_check(chacon5, 4, [EPS]).refuted
    v = an.conjugate_to_some_odometer_check(staggered, 4, [EPS])
    assert v.details["freeness_witness"] == (1, 0) and not v.details["free_possible"]


# sub-actions


def test_subaction_examples(staggered):
    for k in (1, 2, 3):
        v = an.subaction_congruence_check(staggered, 2, 2 ** k)
        assert v.supported and v.N == k
    v = an.subaction_congruence_check(staggered, 1, 2)
    assert v.inconclusive and v.details["witness_placement"][0] % 2 == 1
    assert an.subaction_congruence_check(gallery.chacon_z(4), 1, 1).supported
    with pytest.raises(ValueError):
        an.subaction_congruence_check(staggered, 3, 2)


# monotonicity in depth


def _depth_cases():
    out = []
    for name, exps in gallery.EXPECTED.items():
        if name in gallery.CHAINS:
            continue
        top = gallery.default_depth(name)
        depths = [3, 4] if name == "staggered-z2" else list(range(3, top + 1))
        for e in exps:
            out.append(pytest.param(name, e, depths, id=f"{name}-{e.criterion}"))
    return out


@pytest.mark.parametrize("name,exp,depths", _depth_cases())
def test_deeper_truncation_never_flips_supported_to_refuted(name, exp, depths):
    seen = []
    for d in depths:
        spec = gallery.build(name, d)
        seen.append(gallery.run_criterion(spec, exp.criterion, exp.params, d).status)
    for a, b in zip(seen, seen[1:]):
        assert not (a == "supported" and b == "refuted"), seen
