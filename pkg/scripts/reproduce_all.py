#!/usr/bin/env python3
"""Run every bundled experiment preset into results/ (CSV + SVG)."""

import argparse
import pathlib
import sys
import time

from ris2way.cli import PRESETS, main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--trials-outage", type=int, default=10**5)
    ap.add_argument("--trials-se", type=int, default=10**3)
    ap.add_argument("--trials-opt", type=int, default=50)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for preset in PRESETS:
        t0 = time.time()
        rc = cli_main([
            "reproduce", preset, "--seed", str(args.seed),
            "--trials-outage", str(args.trials_outage),
            "--trials-se", str(args.trials_se),
            "--trials-opt", str(args.trials_opt),
            "--workers", str(args.workers),
            "--svg", "--out", str(out / f"{preset}.csv"),
        ])
        print(f"{preset}: exit {rc} ({time.time() - t0:.1f}s)")
        if rc != 0:
            return rc
    return 0


if __name__ == "__main__":
    sys.exit(main())
