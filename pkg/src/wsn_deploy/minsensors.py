"""Greedy search for the smallest sensor count that still covers a region.

Start from the square-lattice bound on the region's bounding box (by
default with sensors at the lattice cell centers, which already cover the
box without fusion), then
alternate: optimize positions, and strip sensors that have neighbours
within the overlapping radius (most neighbours first) until none do. Stop
once an optimization round leaves nothing to strip.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .field import SensorField, remove_sensor
from .geometry import Region, TargetGrid, discretize, k_mbr_min, mbr, partition_lattice
from .optimizer import TrainingConfig, train
from .patterns import PatternSpec, generate
from .sensing import DetectionThresholds, EvidentialSensingParams

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MinSensorsConfig:
    r_a: float
    training: TrainingConfig = field(default_factory=TrainingConfig)
    initial_count: Optional[int] = None
    # None seeds the partition lattice; a spec draws initial_count sensors from it
    pattern: Optional[PatternSpec] = None

    def check(self, r_s: float):
        # neighbours must be farther apart than the lattice pitch that covers without fusion
        if not self.r_a > math.sqrt(2.0) * r_s:
            raise ValueError(f"r_a={self.r_a} must exceed sqrt(2) * r_s = {math.sqrt(2.0) * r_s:.6g}")
        if self.initial_count is not None and self.initial_count < 1:
            raise ValueError("initial_count must be at least 1")


@dataclass(frozen=True)
class Removal:
    pass_index: int
    removed_id: int
    remaining_k: int


def _pair_distances(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt((diff**2).sum(axis=-1))


def neighbor_set(k: int, f: SensorField, r_a: float) -> set[int]:
    """Indices of the other sensors within ``r_a`` of sensor ``k``."""
    if not 0 <= k < f.k:
        raise IndexError(f"sensor index {k} out of range for K={f.k}")
    d = np.hypot(*(f.coords - f.coords[k]).T)
    return {int(i) for i in np.flatnonzero(d <= r_a) if i != k}


def neighbor_counts(f: SensorField, r_a: float) -> np.ndarray:
    close = _pair_distances(f.coords) <= r_a
    np.fill_diagonal(close, False)
    return close.sum(axis=1)


def strip_redundant(f: SensorField, r_a: float, pass_index: int = 1):
    """Remove the most-crowded sensor (lowest index on ties) until no sensor has a neighbour."""
    removals = []
    while f.k > 1:
        counts = neighbor_counts(f, r_a)
        if counts.max() == 0:
            break
        k = int(np.argmax(counts))
        removed = int(f.ids[k])
        f = remove_sensor(f, k)
        removals.append(Removal(pass_index, removed, f.k))
    return f, removals


@dataclass
class MinSensorsResult:
    field: SensorField
    removals: list[Removal]
    passes: int
    initial_k: int
    epochs: int
    # training history of every pass, concatenated
    history: list = field(default_factory=list)


def acquire_minimum(
    region: Region,
    params: EvidentialSensingParams,
    thresholds: DetectionThresholds,
    config: MinSensorsConfig,
    initial: Optional[SensorField] = None,
    grid: Optional[TargetGrid] = None,
) -> MinSensorsResult:
    """Run the optimize-then-strip loop until a pass removes nothing."""
    config.check(params.r_s)
    grid = grid if grid is not None else discretize(region)
    if initial is None:
        box = mbr(region)
        k0 = config.initial_count or k_mbr_min(box.length, box.width, params.r_s)
        if config.pattern is None and k0 == k_mbr_min(box.length, box.width, params.r_s):
            initial = SensorField(partition_lattice(region, params.r_s))
        else:
            initial = generate(config.pattern or PatternSpec(), k0, region)

    current = initial
    removals: list[Removal] = []
    passes = 0
    epochs = 0
    full_history = []
    while True:
        passes += 1
        current, history = train(current, grid, params, thresholds, config.training)
        epochs += len(history)
        full_history.extend(history)
        current, removed = strip_redundant(current, config.r_a, passes)
        removals.extend(removed)
        log.info("pass %d: removed %d, K=%d", passes, len(removed), current.k)
        if not removed:
            break
    return MinSensorsResult(current, removals, passes, initial.k, epochs, full_history)
