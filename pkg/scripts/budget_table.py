"""Guaranteed density after slicing from n down to n0, over a grid of (eps, n0)."""
import argparse
import csv
import sys

from orthoframe.inequalities import BudgetParams, budget_chain


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--C", type=float, default=1.0)
    args = ap.parse_args()
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["eps", "n0", "final_bound", "exhausted", "failing_step", "keeps_1_minus_2eps"])
    for eps in (0.001, 0.005, 0.01, 0.05):
        for n0 in (4, 10, 25, 100, 1000):
            res = budget_chain(BudgetParams(eps, args.n, n0, C=args.C))
            out.writerow([eps, n0, f"{res.final_density_lower_bound:.6f}", res.exhausted, res.failing_step, res.invariant_ok])


if __name__ == "__main__":
    main()
