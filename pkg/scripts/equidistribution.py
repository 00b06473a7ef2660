"""Coset-share error of the squares [0,n)^2 over every lattice of a given index.

Prints n, the worst error over lattices, n * error (which stays bounded),
and the 2*d*index/n ceiling.  Output is TSV with exact rationals.

    python scripts/equidistribution.py --index 6 --max-n 120
"""
import argparse
from fractions import Fraction

from rankone import lattice as lat
from rankone.shapes import Rect


def worst_error(G, n):
    h = lat.shape_coset_histogram(Rect((n, n)), G)
    share = Fraction(1, lat.index(G))
    return max(abs(Fraction(h.counts.get(r.rep, 0), n * n) - share) for r in lat.cosets(G))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--index", type=int, default=6)
    p.add_argument("--max-n", type=int, default=120)
    p.add_argument("--step", type=int, default=1)
    args = p.parse_args(argv)

    groups = [G for G in lat.enumerate_sublattices(2, args.index) if lat.index(G) == args.index]
    print(f"# {len(groups)} lattices of index {args.index}")
    print("n\terror\tn*error\tbound")
    for n in range(args.index, args.max_n + 1, args.step):
        err = max(worst_error(G, n) for G in groups)
        bound = Fraction(2 * 2 * args.index, n)
        print(f"{n}\t{err}\t{n * err}\t{bound}")


if __name__ == "__main__":
    main()
