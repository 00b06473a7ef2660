import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rankone import descendants as desc
from rankone import gallery
from rankone import lattice as lat
from rankone.construction import Grid
from rankone.lattice import Lattice
from rankone.verdict import CapExceeded

import oracles
from strategies import pool

TWO = Lattice.diagonal(2, 2)


def _points(spec, m, n):
    """Placement points of levels m..n-1 only; deeper staggered levels are astronomically large."""
    return [[p for b in spec.placements(k) for p in b.points()] if m <= k < n else None
            for k in range(1, spec.depth)]


def test_chacon_descendants():
    spec = gallery.chacon_z(4)
    assert desc.compose_exact(spec, 1, 2) == {(0,), (1,), (3,)}
    assert sorted(x for (x,) in desc.compose_exact(spec, 1, 3)) == [0, 1, 3, 4, 5, 7, 9, 10, 12]
    for m in range(1, 5):
        assert desc.compose_exact(spec, m, m) == {(0,)}


def test_chacon_product_histogram():
    spec = gallery.chacon_product(3)
    h = desc.compose_hist(spec, 1, 2, TWO)
    assert h.counts == {(0, 0): 1, (0, 1): 2, (1, 0): 2, (1, 1): 4} and h.total == 9


def test_concentrated_histograms():
    horiz = gallery.build("odometer-as-construction:horizontal-odometer", 5)
    for m in range(1, 5):
        for n in range(m, 6):
            assert desc.compose_hist(horiz, m, n, TWO).counts == {(0, 0): 2 ** (n - m)}
    spec = gallery.chacon_product(4)
    assert desc.compose_hist(spec, 1, 4, Lattice.identity(2)).counts == {(0, 0): 729}


def test_horizontal_descendants_formula():
    horiz = gallery.build("odometer-as-construction:horizontal-odometer", 5)
    for m in range(1, 5):
        for n in range(m, 6):
            want = {(2 ** m * c, 0) for c in range(2 ** (n - m))}
            assert desc.compose_exact(horiz, m, n) == want


def test_pair_fraction_examples():
    assert desc.pair_fraction(gallery.chacon_z(3), 1, 2, (1,)) == Fraction(1, 3)
    assert desc.pair_fraction(gallery.chacon_product(3), 1, 2, (1, 0)) == Fraction(1, 3)
    assert desc.pair_fraction(gallery.chacon_product(3), 1, 3, (0, 0)) == 1


def test_cap_exceeded():
    with pytest.raises(CapExceeded):
        desc.compose_exact(gallery.chacon_product(5), 1, 5, cap=1000)
    with pytest.raises(IndexError):
        desc.compose_hist(gallery.chacon_z(3), 2, 4, Lattice.identity(1))


def _small_cases():
    out = []
    for name in gallery.names():
        spec = gallery.build(name, min(gallery.default_depth(name), 5))
        if not hasattr(spec, "rules"):
            continue
        for m in range(1, spec.depth + 1):
            for n in range(m, spec.depth + 1):
                if desc.cardinality(spec, m, n) <= 10_000:
                    out.append((name, spec, m, n))
    return out


CASES = _small_cases()


@pytest.mark.parametrize("name,spec,m,n", CASES, ids=[f"{c[0]}-{c[2]}-{c[3]}" for c in CASES])
def test_exact_matches_sumset_oracle(name, spec, m, n):
    got = desc.compose_exact(spec, m, n)
    brute = oracles.descendants_brute(_points(spec, m, n), m, n, spec.dim)
    assert len(brute) == len(set(brute)) == len(got) == desc.cardinality(spec, m, n)
    assert got == set(brute)
    assert len(got) == math.prod(spec.placement_count(k) for k in range(m, n))


@pytest.mark.parametrize("name,spec,m,n", CASES[::3], ids=[f"{c[0]}-{c[2]}-{c[3]}" for c in CASES[::3]])
def test_histogram_matches_reduced_exact(name, spec, m, n):
    rng = random.Random(f"{name}{m}{n}")
    pts = desc.compose_exact(spec, m, n)
    for G in rng.sample(pool(spec.dim, 12), min(20, len(pool(spec.dim, 12)))):
        h = desc.compose_hist(spec, m, n, G)
        brute = lat.ResidueHistogram(G)
        for p in pts:
            brute.add(p)
        assert h == brute and h.total == len(pts)


@pytest.mark.parametrize("name", ["chacon-z", "chacon-product", "odometer-as-construction:dyadic-z2"])
def test_composition_is_associative(name):
    spec = gallery.build(name, 5)
    for m in range(1, 4):
        for k in range(m, 5):
            for n in range(k, 5):
                left = desc.compose_exact(spec, m, k)
                right = desc.compose_exact(spec, k, n)
                assert set(oracles.sumset(left, right)) == desc.compose_exact(spec, m, n)


@pytest.mark.parametrize("name", ["chacon-z", "chacon-product", "staggered-z2"])
def test_pair_fractions_match_brute_force(name):
    spec = gallery.build(name, 3 if name != "chacon-z" else 5)
    for m in range(1, spec.depth):
        n = min(m + 2, spec.depth)
        if desc.cardinality(spec, m, n) > 10_000:
            n = m + 1
        pts = sorted(desc.compose_exact(spec, m, n))
        probes = {tuple(a - b for a, b in zip(p, q)) for p in pts[:12] for q in pts[:12]}
        for v in probes:
            assert desc.pair_fraction(spec, m, n, v) == oracles.pair_fraction_brute(pts, v)


@settings(max_examples=300, deadline=None)
@given(st.data())
def test_block_matches_counts_like_brute_force(data):
    def grid():
        off = tuple(data.draw(st.integers(-5, 5)) for _ in range(2))
        sp = tuple(data.draw(st.integers(1, 5)) for _ in range(2))
        cnt = tuple(data.draw(st.integers(1, 5)) for _ in range(2))
        return Grid(off, sp, cnt)

    a, b = grid(), grid()
    v = tuple(data.draw(st.integers(-12, 12)) for _ in range(2))
    bs = set(b.points())
    want = sum(1 for p in a.points() if tuple(x + y for x, y in zip(p, v)) in bs)
    assert desc.block_matches(a, b, v) == want


def test_view_modes():
    spec = gallery.chacon_product(3)
    assert desc.view(spec, 1, 3).size == 81
    assert desc.view(spec, 1, 3, TWO).size == 81
