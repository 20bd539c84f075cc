"""Minimum sensor count against the overlapping radius r_a on a 100 x 100 m square."""

import argparse
import math
import time

from _common import THRESHOLDS, EvidentialSensingParams, Region, discretize
from wsn_deploy.minsensors import MinSensorsConfig, acquire_minimum
from wsn_deploy.optimizer import TrainingConfig, evaluate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r-s", type=float, default=15.0)
    ap.add_argument("--factors", type=float, nargs="+", default=[1.5, 1.75, 2.02, 2.25, 2.5])
    ap.add_argument("--side", type=float, default=100.0)
    args = ap.parse_args()

    region = Region.rectangle(args.side, args.side)
    grid = discretize(region)
    params = EvidentialSensingParams(r_s=args.r_s)
    for factor in args.factors:
        r_a = factor * args.r_s
        if r_a <= math.sqrt(2.0) * args.r_s:
            print(f"r_a={r_a:.2f}: skipped, must exceed sqrt(2) r_s")
            continue
        t0 = time.perf_counter()
        res = acquire_minimum(region, params, THRESHOLDS, MinSensorsConfig(r_a=r_a), grid=grid)
        rho = evaluate(res.field, grid, params, THRESHOLDS, TrainingConfig())[0].coverage_rate
        print(
            f"r_a={r_a:6.2f}  K {res.initial_k} -> {res.field.k}  rho {rho:.4f}  "
            f"passes {res.passes}  {time.perf_counter() - t0:.1f} s",
            flush=True,
        )


if __name__ == "__main__":
    main()
