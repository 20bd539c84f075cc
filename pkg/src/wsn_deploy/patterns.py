"""Seeded initial deployment patterns.

Each axis of the continuous patterns is drawn independently from a
one-dimensional law, offset by the bounding box's lower-left corner, and
clamped into the box. Randomness comes from numpy's counter-based Philox
generator so that a (spec, k) pair maps to the same field everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import MissingParam
from .field import SensorField, read_coords
from .geometry import Region, mbr

RNG_ALGORITHM = "numpy.random.Philox(4x64-10)"

KINDS = ("random", "centroid", "boundary", "gaussian", "logistic", "uniform", "exponential", "file")

# PatternSpec fields each kind reads
_REQUIRED = {
    "random": (),
    "centroid": ("jitter",),
    "boundary": (),
    "gaussian": ("mu", "sigma_g"),
    "logistic": ("mu", "sigma_l"),
    "uniform": ("a", "b"),
    "exponential": ("rate",),
    "file": ("path",),
}


@dataclass(frozen=True)
class PatternSpec:
    kind: str = "random"
    mu: Optional[float] = 100.0
    sigma_g: Optional[float] = 35.0
    sigma_l: Optional[float] = 20.0
    a: Optional[float] = 0.0
    b: Optional[float] = 200.0
    rate: Optional[float] = 1.0 / 40.0
    jitter: Optional[float] = 2.0
    seed: int = 0
    path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown pattern kind {self.kind!r}; choose from {KINDS}")
        for name in _REQUIRED[self.kind]:
            if getattr(self, name) is None:
                raise MissingParam(f"pattern {self.kind!r} needs {name}")
        for name in ("sigma_g", "sigma_l", "rate"):
            if name in _REQUIRED[self.kind] and getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.kind == "centroid" and self.jitter < 0:
            raise ValueError("jitter must be non-negative")
        if self.kind == "uniform" and not self.b > self.a:
            raise ValueError("uniform pattern needs b > a")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _boundary(rng, k, lo, sx, sy) -> np.ndarray:
    # arc-length-uniform positions on the box perimeter, counterclockwise from lo
    s = rng.uniform(0.0, 2.0 * (sx + sy), size=k)
    out = np.empty((k, 2))
    for i, t in enumerate(s):
        if t < sx:
            out[i] = (t, 0.0)
        elif t < sx + sy:
            out[i] = (sx, t - sx)
        elif t < 2 * sx + sy:
            out[i] = (sx - (t - sx - sy), sy)
        else:
            out[i] = (0.0, sy - (t - 2 * sx - sy))
    return out + lo


def generate(spec: PatternSpec, k: int, region: Region) -> SensorField:
    """Place ``k`` sensors according to ``spec`` inside the region's bounding box."""
    if spec.kind == "file":
        return read_coords(spec.path)
    if k < 1:
        raise ValueError("need at least one sensor")
    box = mbr(region)
    lo, hi = box.lo, box.hi
    rng = make_rng(spec.seed)
    shape = (k, 2)

    if spec.kind == "random":
        pts = rng.uniform(lo, hi, size=shape)
    elif spec.kind == "centroid":
        pts = region.centroid() + rng.uniform(-spec.jitter, spec.jitter, size=shape)
    elif spec.kind == "boundary":
        pts = _boundary(rng, k, lo, box.size_x, box.size_y)
    elif spec.kind == "gaussian":
        pts = lo + rng.normal(spec.mu, spec.sigma_g, size=shape)
    elif spec.kind == "logistic":
        pts = lo + rng.logistic(spec.mu, spec.sigma_l, size=shape)
    elif spec.kind == "uniform":
        pts = lo + rng.uniform(spec.a, spec.b, size=shape)
    else:  # exponential, decaying away from the box's lower-left corner
        pts = lo + rng.exponential(1.0 / spec.rate, size=shape)
    return SensorField(np.clip(pts, lo, hi))
