import pytest

from rankone import construction as con
from rankone import descendants as desc
from rankone import gallery
from rankone.construction import ConstructionSpec
from rankone.shapes import Rect


def test_chacon_heights():
    assert gallery.chacon_heights(4) == [1, 4, 13, 40]


def test_staggered_shapes():
    spec = gallery.staggered_z2(3)
    assert spec.shape(1) == Rect((2, 2))
    assert spec.shape(2) == Rect((16, 4))
    assert spec.shape(3) == Rect((2 ** 16, 8))


def test_staggered_placements_match_formula():
    spec = gallery.staggered_z2(3)
    for m in (1, 2):
        W, t = 2 ** 4 ** (m - 1), 2 ** (4 ** m - 4 ** (m - 1)) - 1
        want = {(k * W, 0) for k in range(t)} | {(1 + k * W, 2 ** m) for k in range(t)}
        assert set(desc.compose_exact(spec, m, m + 1)) == want


def test_horizontal_odometer_descendants():
    spec = gallery.build(gallery.OAC + "horizontal-odometer", 5)
    for m in range(1, 5):
        for n in range(m, 6):
            assert desc.compose_exact(spec, m, n) == {(2 ** m * c, 0) for c in range(2 ** (n - m))}


@pytest.mark.parametrize("name", gallery.names())
def test_every_case_builds_and_validates(name):
    spec = gallery.build(name)
    assert spec == gallery.build(name)  # deterministic
    if isinstance(spec, ConstructionSpec):
        assert con.validate(spec) == []


@pytest.mark.parametrize("name", ["chacon-product", "staggered-z2"])
def test_folner_flag_clear(name):
    assert not con.folner_report(gallery.build(name)).flag


def test_folner_flag_raised_for_horizontal():
    rep = con.folner_report(gallery.build(gallery.OAC + "horizontal-odometer"))
    assert rep.flagged == [(0, 1)]


@pytest.mark.parametrize("name", sorted(gallery.EXPECTED))
def test_expected_verdicts(name):
    report = gallery.run_expected(name)
    bad = [(r["criterion"], r["expected"], r["status"]) for r in report.rows if not r["ok"]]
    assert report.rows and not bad


def test_unknown_case():
    with pytest.raises(gallery.UnknownCase):
        gallery.build("no-such-case")
    with pytest.raises(gallery.UnknownCase):
        gallery.run_expected("no-such-case")
