"""Closed-form constructions and odometer chains with their expected verdicts.

Construction names: ``chacon-z``, ``chacon-product``, ``staggered-z2`` and
``odometer-as-construction:<chain>`` for any chain name below.  Chain
names: ``horizontal-odometer``, ``dyadic-z2``, ``quartic-z2``,
``triadic-z2``, ``senary-z2``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import analysis as an
from . import construction as con
from . import lattice as lat
from . import odometer as odo
from .construction import ConstructionSpec, Grid, LevelRule
from .lattice import Lattice
from .odometer import OdometerSpec
from .shapes import Points, Rect


class UnknownCase(KeyError):
    pass


def chacon_heights(depth: int) -> list[int]:
    h = [1]
    while len(h) < depth:
        h.append(3 * h[-1] + 1)
    return h[:depth]


def chacon_z(depth: int) -> ConstructionSpec:
    h = chacon_heights(depth)
    shapes = [Rect((x,)) for x in h]
    placements = [[(0,), (x,), (2 * x + 1,)] for x in h[:-1]]
    return con.spec_from_levels(shapes, placements, rule="chacon-z")


def chacon_product(depth: int) -> ConstructionSpec:
    h = chacon_heights(depth)
    shapes = [Rect((x, x)) for x in h]
    placements = []
    for x in h[:-1]:
        s = (0, x, 2 * x + 1)
        placements.append([(a, b) for a in s for b in s])
    return con.spec_from_levels(shapes, placements, rule="chacon-product")


def staggered_width(n: int) -> int:
    return 2 ** (4 ** (n - 1))


def staggered_copies(n: int) -> int:
    """Copies per row at level n: ``2^(4^n - 4^(n-1)) - 1``."""
    return 2 ** (4 ** n - 4 ** (n - 1)) - 1


def staggered_z2(depth: int) -> ConstructionSpec:
    # F_n = [0, 2^(4^(n-1))) x [0, 2^n); tower n+1 holds a bottom row of
    # copies and a top row shifted right by one and up by 2^n
    rules = []
    for n in range(1, depth):
        W, t = staggered_width(n), staggered_copies(n)
        blocks = (Grid((0, 0), (W, 1), (t, 1)), Grid((1, 2 ** n), (W, 1), (t, 1)))
        rules.append(LevelRule(Rect((staggered_width(n + 1), 2 ** (n + 1))), blocks))
    return ConstructionSpec(2, Rect((staggered_width(1), 2)), tuple(rules), "staggered-z2")


def odometer_as_construction(chain: OdometerSpec, name=None) -> ConstructionSpec:
    """Box towers of the chain with copies placed at ``F_{j+1} ∩ G_j``."""
    shapes = [Rect(G.diag) for G in chain.chain]
    rules = []
    for j in range(chain.depth - 1):
        G, F = chain.chain[j], shapes[j + 1]
        if _is_diagonal(G) and _is_diagonal(chain.chain[j + 1]):
            counts = tuple(b // a for a, b in zip(G.diag, chain.chain[j + 1].diag))
            blocks = (Grid((0,) * chain.dim, G.diag, counts),)
        else:
            blocks = tuple(Grid.single(p) for p in F.points() if lat.contains(G, p))
        rules.append(LevelRule(F, blocks))
    tag = f"odometer-as-construction:{name}" if name else None
    return ConstructionSpec(chain.dim, shapes[0], tuple(rules), tag)


def _is_diagonal(G: Lattice) -> bool:
    return all(G.entry(k, l) == 0 for l in range(G.dim) for k in range(l))


CHAINS = {
    "horizontal-odometer": ((2, 0), (0, 1)),
    "dyadic-z2": ((2, 0), (0, 2)),
    "quartic-z2": ((4, 0), (0, 4)),
    "triadic-z2": ((3, 0), (0, 3)),
    "senary-z2": ((6, 0), (0, 6)),
}

CONSTRUCTIONS = {
    "chacon-z": chacon_z,
    "chacon-product": chacon_product,
    "staggered-z2": staggered_z2,
}

DEFAULT_DEPTH = {"staggered-z2": 4, "chacon-product": 5}
OAC = "odometer-as-construction:"


def chain(name: str, depth: int) -> OdometerSpec:
    if name not in CHAINS:
        raise UnknownCase(name)
    return odo.pow_chain(CHAINS[name], depth)


def build(name: str, depth: int | None = None):
    """The named construction or chain truncated at ``depth``."""
    depth = default_depth(name) if depth is None else depth
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if name in CONSTRUCTIONS:
        return CONSTRUCTIONS[name](depth)
    if name in CHAINS:
        return chain(name, depth)
    if name.startswith(OAC) and name[len(OAC):] in CHAINS:
        base = name[len(OAC):]
        return odometer_as_construction(chain(base, depth), base)
    raise UnknownCase(name)


def default_depth(name: str) -> int:
    return DEFAULT_DEPTH.get(name, 6)


def names() -> list[str]:
    return list(CONSTRUCTIONS) + [OAC + c for c in CHAINS] + list(CHAINS)


# expected verdicts


@dataclass
class Expectation:
    criterion: str
    params: dict
    status: str


EPS = Fraction(1, 6)
MAX_INDEX = 16


def _L(*rows) -> Lattice:
    return Lattice.from_rows(rows)


EXPECTED: dict[str, list[Expectation]] = {
    "chacon-z": [
        Expectation("finite-factor", {"lattice": _L([2]), "epsilon": EPS}, "refuted"),
        Expectation("finite-factor", {"lattice": _L([1]), "epsilon": EPS}, "supported"),
    ],
    "chacon-product": [
        Expectation("finite-factor", {"lattice": _L([2, 0], [0, 2]), "epsilon": EPS}, "refuted"),
        Expectation("odometer-factor", {"odometer": "dyadic-z2", "epsilon": EPS}, "refuted"),
        Expectation("some-odometer", {"max_index": 4, "epsilon": EPS}, "refuted"),
    ],
    "staggered-z2": [
        Expectation("free-factor", {"max_index": 4, "epsilon": EPS}, "refuted"),
        Expectation("finite-factor", {"lattice": _L([2, 0], [0, 1]), "epsilon": EPS}, "refuted"),
        Expectation("finite-factor", {"lattice": _L([1, 0], [0, 2]), "epsilon": EPS}, "supported"),
        Expectation("subaction", {"axis": 2, "modulus": 8}, "supported"),
        Expectation("subaction", {"axis": 1, "modulus": 2}, "inconclusive"),
    ],
    OAC + "horizontal-odometer": [
        Expectation("finite-factor", {"lattice": _L([2, 0], [0, 2]), "epsilon": EPS}, "inconclusive"),
    ],
    OAC + "dyadic-z2": [
        Expectation("finite-factor", {"lattice": _L([2, 0], [0, 2]), "epsilon": Fraction(1, 4)},
                    "supported"),
        Expectation("odometer-factor", {"odometer": "dyadic-z2", "epsilon": EPS}, "supported"),
        Expectation("conjugacy", {"odometer": "dyadic-z2", "epsilon": EPS}, "supported"),
        Expectation("conjugacy", {"odometer": "triadic-z2", "epsilon": EPS}, "refuted"),
        Expectation("some-conjugacy", {"max_index": MAX_INDEX, "epsilon": EPS}, "supported"),
    ],
    "dyadic-z2": [
        Expectation("free", {}, "supported"),
        Expectation("infinite", {}, "supported"),
        Expectation("conjugate", {"other": "quartic-z2"}, "supported"),
        Expectation("conjugate", {"other": "senary-z2"}, "refuted"),
        Expectation("ff-contains", {"lattice": _L([3, 0], [0, 1])}, "refuted"),
    ],
    "horizontal-odometer": [
        Expectation("free", {}, "refuted"),
        Expectation("infinite", {}, "supported"),
    ],
}


def run_criterion(spec, criterion: str, params: dict, depth: int):
    """Evaluate one named criterion; returns a Verdict."""
    p = dict(params)
    eps = p.get("epsilon", EPS)
    if criterion == "finite-factor":
        return an.finite_factor_check(spec, p["lattice"], eps, depth)
    if criterion == "odometer-factor":
        return an.odometer_factor_check(spec, _chain_param(p["odometer"], depth), eps, depth)
    if criterion == "conjugacy":
        return an.conjugacy_check(spec, _chain_param(p["odometer"], depth), eps, depth)
    if criterion in ("some-odometer", "free-factor"):
        v, _ = an.some_infinite_odometer_check(spec, p.get("max_index", MAX_INDEX), eps, depth,
                                               free=criterion == "free-factor")
        return v
    if criterion == "some-conjugacy":
        return an.conjugate_to_some_odometer_check(spec, p.get("max_index", MAX_INDEX), [eps], depth,
                                                   levels=p.get("levels", (1, 2)))
    if criterion == "subaction":
        return an.subaction_congruence_check(spec, p["axis"], p["modulus"], depth)
    if criterion == "free":
        return odo.is_free_at_depth(spec)
    if criterion == "infinite":
        return odo.is_infinite_at_depth(spec)
    if criterion == "conjugate":
        return odo.conjugate_at_depth(spec, _chain_param(p["other"], depth))
    if criterion == "ff-contains":
        return odo.ff_contains(spec, p["lattice"])
    raise ValueError(f"unknown criterion {criterion!r}")


def _chain_param(x, depth):
    return chain(x, depth) if isinstance(x, str) else x


@dataclass
class CaseReport:
    name: str
    depth: int
    rows: list = field(default_factory=list)

    @property
    def mismatches(self) -> int:
        return sum(1 for r in self.rows if not r["ok"])


def run_expected(name: str, depth: int | None = None) -> CaseReport:
    depth = default_depth(name) if depth is None else depth
    if name not in EXPECTED:
        if name in names():
            return CaseReport(name, depth)
        raise UnknownCase(name)
    spec = build(name, depth)
    report = CaseReport(name, depth)
    for e in EXPECTED[name]:
        t0 = time.perf_counter()
        v = run_criterion(spec, e.criterion, e.params, depth)
        report.rows.append({
            "criterion": e.criterion, "params": e.params, "expected": e.status,
            "status": v.status, "ok": v.status == e.status, "verdict": v,
            "seconds": round(time.perf_counter() - t0, 3),
        })
    return report
