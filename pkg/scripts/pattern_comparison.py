"""Coverage before and after training for each initial deployment pattern."""

import argparse

import numpy as np

from _common import THRESHOLDS, EvidentialSensingParams, PatternSpec, Region, TrainingConfig, discretize
from wsn_deploy.optimizer import evaluate, train
from wsn_deploy.patterns import generate

PATTERNS = {
    "random": PatternSpec(),
    "centroid": PatternSpec(kind="centroid"),
    "boundary": PatternSpec(kind="boundary"),
    "gaussian": PatternSpec(kind="gaussian", mu=50.0, sigma_g=20.0),
    "logistic": PatternSpec(kind="logistic", mu=50.0, sigma_l=12.0),
    "uniform": PatternSpec(kind="uniform", a=0.0, b=100.0),
    "exponential": PatternSpec(kind="exponential", rate=1.0 / 40.0),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sensors", type=int, default=40)
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--side", type=float, default=100.0)
    args = ap.parse_args()

    region = Region.rectangle(args.side, args.side)
    grid = discretize(region)
    params = EvidentialSensingParams(r_s=4.0)
    config = TrainingConfig()
    for name, spec in PATTERNS.items():
        before, after = [], []
        for seed in range(args.seeds):
            f0 = generate(PatternSpec(**{**spec.__dict__, "seed": seed}), args.sensors, region)
            before.append(evaluate(f0, grid, params, THRESHOLDS, config)[0].coverage_rate)
            f, _ = train(f0, grid, params, THRESHOLDS, config)
            after.append(evaluate(f, grid, params, THRESHOLDS, config)[0].coverage_rate)
        print(f"{name:12s} initial {np.mean(before):.4f}  trained {np.mean(after):.4f}", flush=True)


if __name__ == "__main__":
    main()
