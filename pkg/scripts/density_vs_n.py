"""Density of the 1/sqrt(n) band and the double cap as n grows; CSV on stdout."""
import argparse
import csv
import math
import sys

import numpy as np
from scipy.special import erf

from orthoframe import zonal as zn


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=100_000)
    ap.add_argument("--points", type=int, default=40)
    args = ap.parse_args()
    limit = erf(1 / math.sqrt(2))
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["n", "band", "band_minus_gaussian_limit", "double_cap"])
    for n in sorted({int(round(v)) for v in np.geomspace(2, args.n_max, args.points)}):
        rule = zn.make_quadrature(n, 64)
        b = zn.density(zn.band(n), rule)
        out.writerow([n, f"{b:.12f}", f"{b - limit:.3e}", f"{zn.density(zn.double_cap(n), rule):.6e}"])


if __name__ == "__main__":
    main()
