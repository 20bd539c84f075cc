"""Case I: 20 sensors on a 50 x 50 m square, r_s = 4 m, over several seeds."""

import argparse
import time

from _common import (
    EvidentialSensingParams,
    Region,
    TrainingConfig,
    coverage_after_training,
    discretize,
    summarize,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--sensors", type=int, default=20)
    ap.add_argument("--side", type=float, default=50.0)
    ap.add_argument("--epochs", type=int, default=1000)
    args = ap.parse_args()

    region = Region.rectangle(args.side, args.side)
    grid = discretize(region)
    params = EvidentialSensingParams(r_s=4.0)
    config = TrainingConfig(max_epochs=args.epochs)
    rates = []
    for seed in range(args.seeds):
        t0 = time.perf_counter()
        rho, epochs, _ = coverage_after_training(region, grid, args.sensors, seed, params, config)
        rates.append(rho)
        print(f"seed {seed:2d}  rho {rho:.4f}  epochs {epochs:4d}  {time.perf_counter() - t0:.2f} s")
    print(summarize(rates), f" full coverage {sum(r == 1.0 for r in rates)}/{len(rates)}")


if __name__ == "__main__":
    main()
