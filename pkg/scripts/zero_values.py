"""|P_{n,d}(0)| against 15/n^3 over a grid, exact arithmetic; reports the tightest ratio per n."""
import argparse
import csv
import sys
from fractions import Fraction

from orthoframe.gegenbauer import gegenbauer_zero_exact


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=500)
    ap.add_argument("--d-max", type=int, default=40)
    args = ap.parse_args()
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["n", "worst_d", "max_abs_P_over_bound"])
    for n in range(2, args.n_max + 1):
        bound = Fraction(15, n**3)
        ratios = {d: abs(gegenbauer_zero_exact(n, d)) / bound for d in range(6, args.d_max + 1, 2)}
        d = max(ratios, key=ratios.get)
        out.writerow([n, d, f"{float(ratios[d]):.6f}"])


if __name__ == "__main__":
    main()
