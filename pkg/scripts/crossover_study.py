#!/usr/bin/env python3
"""Scheme crossover boundary: closed form vs simulation across element counts
and loop-interference levels."""

import argparse
import math
import sys

import numpy as np

from ris2way import analytic, mc
from ris2way.channel import SystemConfig


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--elements", type=int, nargs="+", default=[1, 2, 16, 64])
    ap.add_argument("--omegas", type=float, nargs="+", default=[1e-3, 1e-4, 1e-6])
    ap.add_argument("--noise-dbm", type=float, default=-100.0)
    ap.add_argument("--trials", type=int, default=4000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    noise_mw = 10 ** (args.noise_dbm / 10.0)
    print(f"{'L':>3} {'omega':>9} {'closed form':>12} {'simulated':>10} {'diff':>7}")
    for L in args.elements:
        for omega in args.omegas:
            closed = 10 * math.log10(
                analytic.scheme_crossover_power(L, omega, 0.0, noise_mw))
            cfg = SystemConfig(L=L, omega=omega, noise_mw=noise_mw)
            grid = np.arange(closed - 10.0, closed + 10.5, 2.0)
            try:
                sim = mc.find_crossover(cfg, grid, trials=args.trials,
                                        seed=args.seed)
                print(f"{L:>3} {omega:>9.1e} {closed:>11.2f}  {sim:>9.2f} "
                      f"{sim - closed:>+6.2f}")
            except mc.NoCrossoverError:
                print(f"{L:>3} {omega:>9.1e} {closed:>11.2f}  {'none':>9}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
