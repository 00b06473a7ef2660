"""Run every gallery case against its expected verdicts and print a table.

    python scripts/run_gallery.py [--depth K] [--report out.json]
"""
import argparse
import sys

from rankone import formats as fmt
from rankone import gallery


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--depth", type=int, help="override each case's default depth")
    p.add_argument("--report", help="write the full JSON report here")
    args = p.parse_args(argv)

    reports = [gallery.run_expected(name, args.depth) for name in sorted(gallery.EXPECTED)]
    print(f"{'case':40} {'criterion':16} {'expected':13} {'got':13} {'sec':>6}")
    for r in reports:
        for row in r.rows:
            mark = "" if row["ok"] else "  <-- mismatch"
            print(f"{r.name:40} {row['criterion']:16} {row['expected']:13} {row['status']:13} "
                  f"{row['seconds']:6.2f}{mark}")
    bad = sum(r.mismatches for r in reports)
    print(f"\n{sum(len(r.rows) for r in reports)} expectations, {bad} mismatches")
    if args.report:
        body = [{"name": r.name, "depth": r.depth,
                 "rows": [{k: v for k, v in row.items() if k not in ("verdict", "seconds")} | {"reason": row["verdict"].reason}
                          for row in r.rows]} for r in reports]
        fmt.write_atomic(args.report, fmt.dumps(body))
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
