"""Frame-search success rate on bands of varying half-width c/sqrt(n).

The band with c = 1 has no orthogonal frame; the rate should climb once the
band is wide enough to hold one.
"""
import argparse
import csv
import math
import sys

from orthoframe import zonal as zn
from orthoframe.frame_finder import FinderConfig, find_orthogonal_frame
from orthoframe.montecarlo import zonal_oracle


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=8)
    ap.add_argument("--runs", type=int, default=10)
    ap.add_argument("--seed", type=int, required=True)
    ap.add_argument("--widths", type=float, nargs="+", default=[1.0, 1.1, 1.25, 1.5, 2.0])
    args = ap.parse_args()
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["c", "density", "successes", "runs"])
    rule = zn.make_quadrature(args.n, 64)
    for c in args.widths:
        prof = zn.band(args.n, c / math.sqrt(args.n))
        oracle = zonal_oracle(prof, symmetrize=True)
        wins = sum(
            find_orthogonal_frame(oracle, FinderConfig(seed=args.seed + r, terminal_trials=100)).success
            for r in range(args.runs)
        )
        out.writerow([c, f"{zn.density(prof, rule):.6f}", wins, args.runs])


if __name__ == "__main__":
    main()
