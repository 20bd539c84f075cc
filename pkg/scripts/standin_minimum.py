"""Minimum-sensor search on the stand-in polygon (MBR 349 x 261 m, r_s = 15 m).

Writes the usual run outputs (sensors.csv, removals.csv, summary.json, ...)
into --out. Expect tens of minutes on one core.
"""

import argparse
import logging
from pathlib import Path

from wsn_deploy.config import load_config
from wsn_deploy.runner import run_minsensors

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(ROOT / "configs" / "standin_minsensors.cfg"))
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    config = load_config(args.config)
    if args.out:
        import dataclasses

        config = dataclasses.replace(config, output_dir=args.out)
    s = run_minsensors(config)
    print(f"K={s.final_k}  rho={s.coverage.rho:.6f} ({s.coverage.n_detected}/{s.coverage.n_targets})  "
          f"epochs={s.epochs}  {s.wall_time_s:.0f} s  (reference value: 53)")


if __name__ == "__main__":
    main()
