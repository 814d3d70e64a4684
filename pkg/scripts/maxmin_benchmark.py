#!/usr/bin/env python3
"""Max-min solver shoot-out on random non-reciprocal instances.

Per element count: relaxation optimum (bisect and joint paths), randomized
rounding quality, greedy coordinate search, and the two baselines, with wall
times.
"""

import argparse
import sys
import time

import numpy as np

from ris2way.channel import (Reciprocity, SinrBudget, SystemConfig,
                             sample_channels, sinr_nonreciprocal)
from ris2way.optim import (OptimMethod, baseline_phases, build_quadratic_forms,
                           gaussian_randomization, greedy_iterative,
                           sdp_maxmin)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--elements", type=int, nargs="+", default=[2, 4, 8])
    ap.add_argument("--instances", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--randomization-k", type=int, default=100)
    ap.add_argument("--greedy-grid", type=int, default=360)
    args = ap.parse_args()

    budget = SinrBudget(1.0, 1.0)
    rng = np.random.default_rng(args.seed)
    print(f"{'L':>3} {'t* (joint)':>12} {'bisect dev':>11} {'rand/t*':>8} "
          f"{'greedy/t*':>10} {'u1 min/t*':>10} {'rand-base/t*':>13} "
          f"{'t_joint':>8} {'t_bisect':>9}")
    for L in args.elements:
        cfg = SystemConfig(L=L, reciprocity=Reciprocity.NON_RECIPROCAL)
        rows = []
        for _ in range(args.instances):
            ch = sample_channels(cfg, rng)
            forms = build_quadratic_forms(ch, budget)
            t0 = time.perf_counter()
            joint = sdp_maxmin(forms, tol=1e-4, method="joint")
            t1 = time.perf_counter()
            bis = sdp_maxmin(forms, tol=1e-4, method="bisect")
            t2 = time.perf_counter()
            _, rand_val = gaussian_randomization(joint.a_star, forms,
                                                 args.randomization_k, rng)
            greedy = greedy_iterative(ch, budget, k=args.greedy_grid)
            u1 = baseline_phases(ch, OptimMethod.U1_PHASE)
            rnd = baseline_phases(ch, OptimMethod.RANDOM, rng)
            t_star = joint.t_star
            rows.append([
                t_star,
                abs(bis.t_star - t_star) / t_star,
                rand_val / t_star,
                min(greedy.achieved) / t_star,
                min(sinr_nonreciprocal(ch, u1, budget)) / t_star,
                min(sinr_nonreciprocal(ch, rnd, budget)) / t_star,
                t1 - t0,
                t2 - t1,
            ])
        m = np.mean(rows, axis=0)
        print(f"{L:>3} {m[0]:>12.3f} {m[1]:>11.2e} {m[2]:>8.3f} {m[3]:>10.3f} "
              f"{m[4]:>10.3f} {m[5]:>13.3f} {m[6]:>7.2f}s {m[7]:>8.2f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
