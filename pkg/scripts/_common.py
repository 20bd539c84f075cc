"""Shared setup for the experiment scripts."""

import numpy as np

from wsn_deploy.geometry import Region, discretize
from wsn_deploy.optimizer import TrainingConfig, evaluate, train
from wsn_deploy.patterns import PatternSpec, generate
from wsn_deploy.sensing import DetectionThresholds, EvidentialSensingParams

THRESHOLDS = DetectionThresholds()


def coverage_after_training(region, grid, k, seed, params, config, pattern=None):
    spec = pattern or PatternSpec()
    spec = PatternSpec(**{**spec.__dict__, "seed": seed})
    f, history = train(generate(spec, k, region), grid, params, THRESHOLDS, config)
    lb = evaluate(f, grid, params, THRESHOLDS, config)[0]
    return lb.coverage_rate, len(history), f


def summarize(values):
    values = np.asarray(values, dtype=float)
    sd = values.std(ddof=1) if len(values) > 1 else 0.0
    return f"mean {values.mean():.4f}  sd {sd:.4f}  min {values.min():.4f}"


__all__ = [
    "Region",
    "discretize",
    "TrainingConfig",
    "EvidentialSensingParams",
    "PatternSpec",
    "THRESHOLDS",
    "coverage_after_training",
    "summarize",
]
