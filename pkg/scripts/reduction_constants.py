"""Extrapolate the projected reduction integrals to their leading constants.

I1/(t delta) is extrapolated linearly in delta and I2/(beta (t delta)^1.5 |log delta|)
linearly in 1/|log delta|; both are printed next to the closed-form constants.

    python3 scripts/reduction_constants.py --k 2 3 4
"""
import argparse
import math

from bubbleforge.energy import reduction_integrals, richardson
from bubbleforge.fields import CouplingRegime
from bubbleforge.scaling import beta_for_delta, constants
from bubbleforge.symmetry import PolygonConfig


def extrapolate(k: int, deltas: list, t: float = 1.0) -> dict:
    reps = [reduction_integrals(PolygonConfig(k, t, d), CouplingRegime(beta_for_delta(d))) for d in deltas]
    c = constants(k)
    scales = [t * d for d in deltas]
    i1 = richardson(scales, [r.I1 / s for r, s in zip(reps, scales)])
    i2 = c.c2_tilde * richardson([1 / abs(math.log(d)) for d in deltas], [r.I2_ratio for r in reps])
    return {"k": k, "I1": i1, "c1_tilde": c.c1_tilde, "I2": i2, "c2_tilde": c.c2_tilde}


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--deltas", type=float, nargs="+", default=[1e-3, 1e-4, 1e-5])
    args = ap.parse_args(argv)
    print(f"{'k':>3} {'I1 limit':>14} {'c1~':>14} {'I2 limit':>14} {'c2~':>14}")
    for k in args.k:
        row = extrapolate(k, args.deltas)
        print(f"{k:>3} {row['I1']:>14.8f} {row['c1_tilde']:>14.8f} {row['I2']:>14.8f} {row['c2_tilde']:>14.8f}")


if __name__ == "__main__":
    main()
