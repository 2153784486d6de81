"""Quantum/local ratio against the number of special sites.

d = 3 uses the exhaustive tile optimum. For d >= 5 the tile optimum is taken
from an explicit saturating strategy when one is found (giving ratio 1), and
otherwise from a heuristic inner estimate."""

import argparse
import csv
import sys

from toricbell.bellexpr import BETA_STAR_D3, ratio
from toricbell.localbound import heuristic_tile_bounds, saturating_tile_strategy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=200)
    ap.add_argument("--R-max", type=int, default=50)
    ap.add_argument("--dims", default="3", help="comma list of odd primes")
    ap.add_argument("--iters", type=int, default=50000, help="random strategies per heuristic tile estimate")
    ap.add_argument("--out", default=None)
    ap.add_argument("--plot", default=None, help="write a PNG (needs matplotlib)")
    args = ap.parse_args()

    dims = [int(v) for v in args.dims.split(",")]
    beta = {}
    for d in dims:
        if d == 3:
            beta[d] = BETA_STAR_D3
        elif saturating_tile_strategy(d) is not None:
            beta[d] = 4.0 * d
        else:
            beta[d] = heuristic_tile_bounds(d, args.iters, seed=0).beta_max
        print(f"# d={d}: tile optimum {beta[d]:.12g}", file=sys.stderr)
    rows = []
    for R in range(args.R_max + 1):
        row = {"R": R}
        for d in dims:
            try:
                row[f"d{d}"] = f"{ratio(args.N, d, R, beta[d]):.12g}"
            except ValueError:
                row[f"d{d}"] = ""
        rows.append(row)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.DictWriter(fh, fieldnames=["R"] + [f"d{d}" for d in dims])
    w.writeheader()
    w.writerows(rows)
    if args.plot:
        import matplotlib.pyplot as plt

        for d in dims:
            pts = [(r["R"], float(r[f"d{d}"])) for r in rows if r[f"d{d}"]]
            plt.plot(*zip(*pts), label=f"d={d}" + ("" if d == 3 else " (estimate)"))
        plt.xlabel("special sites R")
        plt.ylabel("quantum / local")
        plt.legend()
        plt.savefig(args.plot, dpi=120)


if __name__ == "__main__":
    main()
