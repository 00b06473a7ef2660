"""Command-line front end.

Exit codes: 0 supported or clean, 2 refuted, 3 inconclusive, 1 usage or
validation error.  Reports are JSON (``--format tsv`` for tables) written
to ``--out`` or standard output.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import analysis as an
from . import construction as con
from . import descendants as desc
from . import formats as fmt
from . import gallery
from . import lattice as lat
from . import odometer as odo
from .construction import ConstructionSpec
from .odometer import OdometerSpec
from .shapes import Rect
from .verdict import EXIT_CODES, Verdict

USAGE_ERROR = 1


class UsageError(Exception):
    pass


# argument helpers


def _json_arg(s, what):
    try:
        return json.loads(s)
    except json.JSONDecodeError as e:
        raise UsageError(f"{what}: not valid JSON ({e.msg})")


def _lattice(s) -> lat.Lattice:
    return fmt.lattice_from_json(_json_arg(s, "--lattice"))


def _vector(s) -> tuple:
    v = _json_arg(s, "--vector")
    if not isinstance(v, list) or not all(isinstance(x, int) for x in v):
        raise UsageError("--vector must be a JSON list of integers")
    return tuple(v)


def _load(ref: str, depth=None):
    """A spec from a JSON file, or a gallery case by name."""
    if os.path.exists(ref):
        with open(ref) as f:
            spec = fmt.load_spec(json.load(f))
        if depth is not None:
            if isinstance(spec, ConstructionSpec) and depth > spec.depth:
                raise UsageError(f"spec only has depth {spec.depth}, asked for {depth}")
            spec = spec.truncate(depth)
        return spec
    try:
        return gallery.build(ref, depth)
    except gallery.UnknownCase:
        raise UsageError(f"{ref!r} is neither a file nor a gallery case")


def _construction(args) -> ConstructionSpec:
    spec = _load(args.spec, args.depth)
    if not isinstance(spec, ConstructionSpec):
        raise UsageError("--spec must describe a construction")
    return spec


def _odometer(ref, depth=None) -> OdometerSpec:
    spec = _load(ref, depth)
    if not isinstance(spec, OdometerSpec):
        raise UsageError(f"{ref} must describe an odometer chain")
    return spec


def _eps(args, name="epsilon"):
    raw = getattr(args, name)
    try:
        return fmt.parse_fraction(raw)
    except (ValueError, ZeroDivisionError) as e:
        raise UsageError(f"--{name}: {e}")


# output


def _emit(args, report: dict, tsv: str | None = None) -> None:
    if getattr(args, "format", "json") == "tsv" and tsv is not None:
        text = tsv
    else:
        text = fmt.dumps(report)
    out = getattr(args, "out", None)
    if out:
        fmt.write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _params(args) -> dict:
    skip = {"func", "verb"}
    return {k: v for k, v in vars(args).items() if k not in skip and v is not None}


def _verdict_report(args, criterion, verdict: Verdict, extra=None) -> int:
    report = {"criterion": criterion, "params": _params(args), **fmt.verdict_body(verdict)}
    if extra:
        report.update(fmt.jsonable(extra))
    tsv = None
    if "tables" in report:
        rows = ["m\tn\tdev\tg_star"]
        for r in report["tables"]:
            rows.append(f"{r['m']}\t{r['n']}\t{r['dev']}\t{','.join(map(str, r['g_star']))}")
        tsv = "\n".join(rows) + "\n"
    _emit(args, report, tsv)
    return EXIT_CODES[verdict.status]


def _hist_tsv(h: lat.ResidueHistogram) -> str:
    rows = ["residue\tcount\tshare"]
    for r in fmt.histogram_rows(h):
        rows.append(f"{','.join(map(str, r['rep']))}\t{r['count']}\t{r['share']}")
    rows.append(f"total\t{h.total}\t1/1")
    return "\n".join(rows) + "\n"


# verbs


def cmd_lattice(args) -> int:
    op = args.op
    if op == "canon":
        gens = _json_arg(args.generators, "--generators")
        L = lat.canonicalize(args.dim, gens)
        _emit(args, {"op": op, "params": _params(args), "lattice": L, "index": lat.index(L)})
    elif op == "enumerate":
        pool = lat.enumerate_sublattices(args.dim, args.max_index)
        _emit(args, {"op": op, "params": _params(args), "count": len(pool), "lattices": pool})
    else:
        if args.lattice is None:
            raise UsageError(f"lattice {op} needs --lattice")
        L = _lattice(args.lattice)
        rep = {"op": op, "params": _params(args), "lattice": L}
        if op == "index":
            rep["index"] = lat.index(L)
        elif op in ("reduce", "contains"):
            if args.vector is None:
                raise UsageError(f"lattice {op} needs --vector")
            v = _vector(args.vector)
            rep["result"] = lat.reduce(L, v).rep if op == "reduce" else lat.contains(L, v)
        elif op in ("intersect", "join", "sublattice"):
            if args.other is None:
                raise UsageError(f"lattice {op} needs --other")
            M = _lattice(args.other)
            rep["result"] = {"intersect": lat.intersect, "join": lat.join,
                             "sublattice": lat.is_sublattice}[op](L, M)
        elif op == "hist":
            if args.rect is None:
                raise UsageError("lattice hist needs --rect")
            h = lat.shape_coset_histogram(Rect(tuple(_json_arg(args.rect, "--rect"))), L)
            rep["histogram"] = h
            rep["total"] = h.total
            _emit(args, rep, _hist_tsv(h))
            return 0
        _emit(args, rep)
    return 0


def cmd_odometer(args) -> int:
    op = args.op
    if op == "conjugate":
        if not (args.a and args.b):
            raise UsageError("odometer conjugate needs --a and --b")
        A, B = _odometer(args.a, args.depth), _odometer(args.b, args.depth)
        return _verdict_report(args, "conjugate", odo.conjugate_at_depth(A, B))
    if op == "generate":
        fam = _json_arg(args.family, "--family") if args.family else None
        if not fam:
            raise UsageError("odometer generate needs a nonempty --family")
        spec = odo.generate_from_family([fmt.lattice_from_json(x) for x in fam])
        _emit(args, {"op": op, "params": _params(args), "odometer": spec})
        return 0
    if not args.odometer:
        raise UsageError(f"odometer {op} needs --odometer")
    spec = _odometer(args.odometer, args.depth)
    if op == "free":
        return _verdict_report(args, "free", odo.is_free_at_depth(spec))
    if op == "infinite":
        return _verdict_report(args, "infinite", odo.is_infinite_at_depth(spec))
    if op == "contains":
        if args.lattice is None:
            raise UsageError("odometer contains needs --lattice")
        return _verdict_report(args, "ff-contains", odo.ff_contains(spec, _lattice(args.lattice)))
    if op == "measure":
        rows = [{"j": j, "index": lat.index(G), "measure": odo.coordinate_measure(spec, j)}
                for j, G in enumerate(spec.chain, start=1)]
        _emit(args, {"op": op, "params": _params(args), "levels": rows})
        return 0
    if op == "shapes":
        _emit(args, {"op": op, "params": _params(args),
                     "shapes": [fmt.shape_to_json(F) for F in odo.tower_shapes(spec)]})
        return 0
    if op == "act":
        if args.vector is None or args.point is None:
            raise UsageError("odometer act needs --point and --vector")
        p = odo.point_from_reps(spec, _json_arg(args.point, "--point"))
        q = odo.act(p, _vector(args.vector))
        _emit(args, {"op": op, "params": _params(args), "result": q.reps()})
        return 0
    raise UsageError(f"unknown odometer op {op}")


def cmd_construct(args) -> int:
    spec = _construction(args)
    op = args.op
    if op == "validate":
        bad = con.validate(spec)
        _emit(args, {"op": op, "params": _params(args), "valid": not bad,
                     "violations": [str(v) for v in bad]})
        return 0 if not bad else USAGE_ERROR
    if op == "folner":
        vecs = _json_arg(args.vectors, "--vectors") if args.vectors else None
        rep = con.folner_report(spec, vecs)
        rows = [{"level": n, "deficiency": {str(tuple(v)): d for v, d in zip(rep.vectors, row)}}
                for n, row in enumerate(rep.table, start=1)]
        _emit(args, {"op": op, "params": _params(args), "levels": rows,
                     "flagged": [list(v) for v in rep.flagged], "flag": rep.flag})
        return 0
    if op == "ledger":
        top = fmt.parse_fraction(args.base_mass) if args.base_mass else None
        _emit(args, {"op": op, "params": _params(args), "ledger": con.measure_ledger(spec, top)})
        return 0
    raise UsageError(f"unknown construct op {op}")


def cmd_descendants(args) -> int:
    spec = _construction(args)
    m, n = args.m, args.n
    if args.op == "exact":
        pts = desc.compose_exact(spec, m, n)
        _emit(args, {"op": "exact", "params": _params(args), "size": len(pts), "points": pts},
              "\n".join(",".join(map(str, p)) for p in sorted(pts)) + "\n")
        return 0
    if args.op == "hist":
        if args.lattice is None:
            raise UsageError("descendants hist needs --lattice")
        h = desc.compose_hist(spec, m, n, _lattice(args.lattice))
        _emit(args, {"op": "hist", "params": _params(args), "total": h.total, "histogram": h},
              _hist_tsv(h))
        return 0
    if args.op == "pair":
        if args.vector is None:
            raise UsageError("descendants pair needs --vector")
        f = desc.pair_fraction(spec, m, n, _vector(args.vector))
        _emit(args, {"op": "pair", "params": _params(args), "pair_fraction": f})
        return 0
    raise UsageError(f"unknown descendants op {args.op}")


def cmd_check(args) -> int:
    crit = args.criterion
    if crit == "subaction":
        spec = _construction(args)
        if args.axis is None or args.modulus is None:
            raise UsageError("check subaction needs --axis and --modulus")
        return _verdict_report(args, crit, an.subaction_congruence_check(spec, args.axis, args.modulus))
    spec = _construction(args)
    eps = _eps(args)
    if crit == "finite-factor":
        if args.lattice is None:
            raise UsageError("check finite-factor needs --lattice")
        return _verdict_report(args, crit, an.finite_factor_check(spec, _lattice(args.lattice), eps))
    if crit == "forced":
        cl = an.forced_closure(spec, eps=eps)
        _emit(args, {"criterion": crit, "params": _params(args), "windows": an.windows(cl.start, cl.depth),
                     "threshold": cl.threshold, "vectors": cl.vectors, "closure": cl.subgroup,
                     "generates_everything": cl.everything})
        return 0
    if crit in ("odometer-factor", "conjugacy"):
        if not args.odometer:
            raise UsageError(f"check {crit} needs --odometer")
        chain = _odometer(args.odometer, args.depth)
        f = an.odometer_factor_check if crit == "odometer-factor" else an.conjugacy_check
        return _verdict_report(args, crit, f(spec, chain, eps))
    if crit in ("some-odometer", "free-factor"):
        v, cands = an.some_infinite_odometer_check(spec, args.max_index, eps,
                                                   free=crit == "free-factor")
        return _verdict_report(args, crit, v, {"supported": cands.supported,
                                               "generated": cands.generated})
    if crit == "some-conjugacy":
        etas = [fmt.parse_fraction(x) for x in args.eta.split(",")] if args.eta else None
        levels = tuple(int(x) for x in args.levels.split(",")) if args.levels else (1, 2)
        grid = [fmt.parse_fraction(x) for x in args.epsilon.split(",")]
        return _verdict_report(args, crit, an.conjugate_to_some_odometer_check(
            spec, args.max_index, grid, levels=levels, eta_grid=etas))
    raise UsageError(f"unknown criterion {crit}")


def cmd_gallery(args) -> int:
    if args.op == "list":
        rows = [{"name": n, "default_depth": gallery.default_depth(n),
                 "expectations": len(gallery.EXPECTED.get(n, []))} for n in gallery.names()]
        tsv = "name\tdefault_depth\texpectations\n" + "".join(
            f"{r['name']}\t{r['default_depth']}\t{r['expectations']}\n" for r in rows)
        _emit(args, {"op": "list", "cases": rows}, tsv)
        return 0
    if not args.name:
        raise UsageError(f"gallery {args.op} needs a case name")
    try:
        if args.op == "build":
            _emit(args, gallery.build(args.name, args.depth))
            return 0
        names = gallery.names() if args.name == "all" else [args.name]
        reports = [gallery.run_expected(n, args.depth) for n in names]
    except gallery.UnknownCase:
        raise UsageError(f"unknown gallery case {args.name!r}")
    body = {"op": "run", "params": _params(args), "cases": [
        {"name": r.name, "depth": r.depth, "mismatches": r.mismatches,
         "rows": [{"criterion": x["criterion"], "params": x["params"], "expected": x["expected"],
                   "status": x["status"], "ok": x["ok"], "reason": x["verdict"].reason}
                  for x in r.rows]} for r in reports]}
    bad = sum(r.mismatches for r in reports)
    body["mismatches"] = bad
    if args.report:
        fmt.write_atomic(args.report, fmt.dumps(body))
    _emit(args, body)
    return 0 if bad == 0 else USAGE_ERROR


# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rankone", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, fmt_choice=True):
        sp.add_argument("--out", help="write the report here instead of stdout")
        if fmt_choice:
            sp.add_argument("--format", choices=["json", "tsv"], default="json")

    sp = sub.add_parser("lattice", help="lattice algebra")
    sp.add_argument("op", choices=["canon", "index", "reduce", "contains", "intersect", "join",
                                   "sublattice", "enumerate", "hist"])
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--generators", help="JSON list of generator vectors")
    sp.add_argument("--lattice", help="row-major matrix JSON, or {dim, basis}")
    sp.add_argument("--other", help="second lattice for intersect/join/sublattice")
    sp.add_argument("--vector")
    sp.add_argument("--rect", help="rectangle extents as JSON list")
    sp.add_argument("--max-index", type=int, default=4)
    common(sp)
    sp.set_defaults(func=cmd_lattice)

    sp = sub.add_parser("odometer", help="odometer chains")
    sp.add_argument("op", choices=["measure", "free", "infinite", "contains", "conjugate",
                                   "shapes", "generate", "act"])
    sp.add_argument("--odometer", help="chain JSON file or gallery chain name")
    sp.add_argument("--a")
    sp.add_argument("--b")
    sp.add_argument("--lattice")
    sp.add_argument("--family", help="JSON list of lattices")
    sp.add_argument("--point", help="JSON list of per-level representatives")
    sp.add_argument("--vector")
    sp.add_argument("--depth", type=int)
    common(sp)
    sp.set_defaults(func=cmd_odometer)

    sp = sub.add_parser("construct", help="construction diagnostics")
    sp.add_argument("op", choices=["validate", "folner", "ledger"])
    sp.add_argument("--spec", required=True)
    sp.add_argument("--depth", type=int)
    sp.add_argument("--vectors", help="JSON list of test vectors for folner")
    sp.add_argument("--base-mass", help="mass of the deepest base, p/q")
    common(sp)
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("descendants", help="descendant sets I_{m,n}")
    sp.add_argument("op", choices=["exact", "hist", "pair"])
    sp.add_argument("--spec", required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--lattice")
    sp.add_argument("--vector")
    sp.add_argument("--depth", type=int)
    common(sp)
    sp.set_defaults(func=cmd_descendants)

    sp = sub.add_parser("check", help="factor and conjugacy criteria")
    sp.add_argument("criterion", choices=["finite-factor", "forced", "odometer-factor",
                                          "some-odometer", "free-factor", "conjugacy",
                                          "some-conjugacy", "subaction"])
    sp.add_argument("--spec", required=True)
    sp.add_argument("--odometer")
    sp.add_argument("--lattice")
    sp.add_argument("--epsilon", default="1/6", help="p/q; comma list for some-conjugacy")
    sp.add_argument("--eta", help="comma list of p/q for some-conjugacy")
    sp.add_argument("--levels", help="comma list of base levels for some-conjugacy")
    sp.add_argument("--depth", type=int)
    sp.add_argument("--max-index", type=int, default=16)
    sp.add_argument("--axis", type=int)
    sp.add_argument("--modulus", type=int)
    common(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("gallery", help="built-in cases")
    sp.add_argument("op", choices=["list", "run", "build"])
    sp.add_argument("name", nargs="?")
    sp.add_argument("--depth", type=int)
    sp.add_argument("--report", help="also write the run report here")
    common(sp)
    sp.set_defaults(func=cmd_gallery)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return USAGE_ERROR if e.code else 0
    try:
        return args.func(args)
    except (UsageError, ValueError, IndexError, lat.RankDeficient, lat.NotComparable) as e:
        print(f"rankone {args.verb}: error: {e}", file=sys.stderr)
        return USAGE_ERROR
    except an.CapExceeded as e:
        print(f"rankone {args.verb}: {e}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
