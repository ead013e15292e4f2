"""Tabulate the fixed-point bound c(p, q) over a grid and report the maximizer.

    python scripts/bound_grid.py --resolution 50 --out grid.csv
"""

import argparse
import csv
import sys
from fractions import Fraction

from subgreedy.exact import bound_fixed_point


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--resolution", type=int, default=50, help="p, q range over k/N for 0 < k < N")
    ap.add_argument("--out", help="CSV path (default stdout)")
    args = ap.parse_args()
    n = args.resolution

    out = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["p", "q", "c"])
    best = None
    for i in range(1, n):
        for j in range(1, n):
            sol = bound_fixed_point(Fraction(i, n), Fraction(j, n))
            w.writerow([i / n, j / n, repr(sol.c)])
            if best is None or sol.c > best.c:
                best = sol
    if out is not sys.stdout:
        out.close()
    print(f"best c = {best.c:.10f} at p = {best.p}, q = {best.q}", file=sys.stderr)


if __name__ == "__main__":
    main()
