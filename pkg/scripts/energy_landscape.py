"""Tabulate the reduced energy against its numerical counterpart over t and delta.

Writes one CSV row per (delta, t) with the quadrature value, the two-term
prediction and the scaled remainder |theta| |log delta| / delta.

    python3 scripts/energy_landscape.py --k 2 --steps 13 --out landscape.csv
"""
import argparse
import csv
import math
import sys

import numpy as np

from bubbleforge.energy import f_beta_expansion_check
from bubbleforge.scaling import beta_for_delta, constants


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--steps", type=int, default=13)
    ap.add_argument("--log-deltas", type=float, nargs="+", default=[8.0, 10.0, 12.0],
                    help="values n for delta = e^-n")
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)

    t_star = constants(args.k).t_star
    ts = np.linspace(0.5 * t_star, 1.6 * t_star, args.steps)
    sink = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(sink, lineterminator="\n")
    w.writerow(["delta", "t", "F_numeric", "F_predicted", "theta", "scaled_theta"])
    for n in args.log_deltas:
        beta = beta_for_delta(math.exp(-n))
        for t in ts:
            rep = f_beta_expansion_check(args.k, float(t), beta)
            w.writerow([repr(rep.delta), repr(float(t)), repr(rep.F_numeric), repr(rep.F_predicted),
                        repr(rep.theta), repr(rep.scaled_theta)])
        print(f"delta=e^-{n:g} done", file=sys.stderr)
    if sink is not sys.stdout:
        sink.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
