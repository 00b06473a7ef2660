"""JSON encodings.  Rationals are always written as "p/q" strings."""
from __future__ import annotations

import dataclasses
import json
import os
import tempfile
from fractions import Fraction

from .construction import ConstructionSpec, Grid, LevelRule
from .lattice import Lattice, Residue, ResidueHistogram, Subgroup
from .odometer import EXPLICIT, OdometerSpec, PowRule
from .shapes import Points, Rect
from .verdict import Verdict


def frac(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(s) -> Fraction:
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    s = str(s).strip()
    if "." in s or "e" in s.lower():
        raise ValueError(f"use an exact rational like 1/6, not {s!r}")
    return Fraction(s)


# lattices


def lattice_to_json(L: Lattice) -> dict:
    return {"dim": L.dim, "basis": [list(c) for c in L.cols]}


def lattice_from_json(obj) -> Lattice:
    """Accepts ``{"dim", "basis": columns}`` or a bare row-major matrix."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    if isinstance(obj, dict):
        cols = obj["basis"]
        d = obj.get("dim", len(cols))
        return Lattice.from_generators(d, cols)
    return Lattice.from_rows(obj)


def residue_to_json(r: Residue) -> dict:
    return {"lattice": lattice_to_json(r.lattice), "rep": list(r.rep)}


# odometers


def odometer_to_json(spec: OdometerSpec) -> dict:
    if isinstance(spec.rule, PowRule):
        rule = {"pow": [list(r) for r in spec.rule.base]}
    else:
        rule = spec.rule
    out = {"dim": spec.dim, "chain": [lattice_to_json(G) for G in spec.chain]}
    if rule is not None:
        out["rule"] = rule
    return out


def odometer_from_json(obj) -> OdometerSpec:
    chain = tuple(lattice_from_json(G) for G in obj["chain"])
    rule = obj.get("rule")
    if isinstance(rule, dict):
        if "pow" not in rule:
            raise ValueError(f"unknown rule {rule!r}")
        rule = PowRule(tuple(tuple(int(x) for x in r) for r in rule["pow"]))
    elif rule not in (None, EXPLICIT):
        raise ValueError(f"unknown rule {rule!r}")
    dim = obj.get("dim", chain[0].dim if chain else 0)
    return OdometerSpec(dim, chain, rule)


# constructions


def shape_to_json(F) -> dict:
    if isinstance(F, Rect):
        return {"rect": list(F.extents)}
    return {"points": [list(p) for p in F.pts]}


def shape_from_json(obj):
    if "rect" in obj:
        return Rect(tuple(int(x) for x in obj["rect"]))
    if "points" in obj:
        return Points(obj["points"])
    raise ValueError(f"shape needs 'rect' or 'points': {obj!r}")


def block_to_json(b: Grid):
    if b.is_single():
        return list(b.offset)
    return {"offset": list(b.offset), "spacing": list(b.spacing), "counts": list(b.counts)}


def block_from_json(obj) -> Grid:
    if isinstance(obj, dict):
        off = tuple(int(x) for x in obj["offset"])
        sp = tuple(int(x) for x in obj.get("spacing", [1] * len(off)))
        return Grid(off, sp, tuple(int(x) for x in obj["counts"]))
    return Grid.single(obj)


def construction_to_json(spec: ConstructionSpec) -> dict:
    levels = [{"shape": shape_to_json(spec.base)}]
    for r in spec.rules:
        levels.append({"shape": shape_to_json(r.shape),
                       "placements": [block_to_json(b) for b in r.placements]})
    out = {"dim": spec.dim, "levels": levels}
    if spec.rule:
        out["rule"] = spec.rule
    return out


def construction_from_json(obj) -> ConstructionSpec:
    levels = obj["levels"]
    if not levels:
        raise ValueError("a construction needs at least one level")
    base = shape_from_json(levels[0]["shape"])
    rules = []
    for n, lv in enumerate(levels[1:], start=2):
        if "placements" not in lv:
            raise ValueError(f"level {n} has no placements")
        rules.append(LevelRule(shape_from_json(lv["shape"]),
                               tuple(block_from_json(b) for b in lv["placements"])))
    return ConstructionSpec(obj.get("dim", base.dim), base, tuple(rules), obj.get("rule"))


def load_spec(obj):
    """Either kind of spec, told apart by its keys."""
    if "levels" in obj:
        return construction_from_json(obj)
    if "chain" in obj:
        return odometer_from_json(obj)
    raise ValueError("file is neither a construction nor an odometer spec")


def spec_to_json(spec) -> dict:
    if isinstance(spec, ConstructionSpec):
        return construction_to_json(spec)
    return odometer_to_json(spec)


# reports


def jsonable(x):
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, Fraction):
        return frac(x)
    if isinstance(x, float):
        raise TypeError("floats never appear in reports")
    if isinstance(x, Lattice):
        return lattice_to_json(x)
    if isinstance(x, Residue):
        return list(x.rep)
    if isinstance(x, ResidueHistogram):
        return histogram_rows(x)
    if isinstance(x, Subgroup):
        return {"rank": x.rank, "generators": [list(g) for g in x.generators()]}
    if isinstance(x, (OdometerSpec, ConstructionSpec)):
        return spec_to_json(x)
    if isinstance(x, Verdict):
        return verdict_body(x)
    if isinstance(x, dict):
        if all(isinstance(k, str) for k in x):
            return {k: jsonable(v) for k, v in x.items()}
        return [{"key": jsonable(k), "value": jsonable(v)} for k, v in x.items()]
    if isinstance(x, (list, tuple, set, frozenset)):
        items = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [jsonable(v) for v in items]
    if dataclasses.is_dataclass(x):
        return {f.name: jsonable(getattr(x, f.name)) for f in dataclasses.fields(x)}
    return str(x)


def histogram_rows(h: ResidueHistogram) -> list[dict]:
    total = h.total
    return [{"rep": list(r), "count": c, "share": frac(Fraction(c, total))}
            for r, c in sorted(h.counts.items())]


def verdict_body(v: Verdict) -> dict:
    details = dict(v.details)
    tables = details.pop("table", None)
    out = {
        "status": v.status,
        "depth": v.depth,
        "N": v.N,
        "witnesses": [] if v.witness is None else [jsonable(v.witness)],
        "reason": v.reason,
        "folner_flag": v.folner_flag,
        "details": jsonable(details),
    }
    if tables is not None:
        G = details.get("lattice")
        out["tables"] = [{**{k: jsonable(r[k]) for k in ("m", "n", "dev", "g_star")},
                          "G": jsonable(G)} for r in tables]
    return out


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=False) + "\n"


def write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
