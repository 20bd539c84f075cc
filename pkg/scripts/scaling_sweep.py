"""Final coverage against sensor count on a 100 x 100 m square (r_s = 4 m)."""

import argparse

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
    ap.add_argument("--counts", type=int, nargs="+", default=[10, 20, 30, 40, 50])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--side", type=float, default=100.0)
    args = ap.parse_args()

    region = Region.rectangle(args.side, args.side)
    grid = discretize(region)
    params = EvidentialSensingParams(r_s=4.0)
    config = TrainingConfig()
    for k in args.counts:
        rates = [coverage_after_training(region, grid, k, s, params, config)[0] for s in range(args.seeds)]
        print(f"K={k:3d}  {summarize(rates)}", flush=True)


if __name__ == "__main__":
    main()
