"""Per-sensor detection models and the collaborative detection pipeline.

For one target the pipeline is: sort sensors by distance (ties by index),
fuse their detection masses in that order, open the prefix gate while each
rank's fusion efficiency stays at or above ``eta_th``, and call the target
detected when the fused probability of the gated prefix reaches ``p_th``.

:func:`collaborative_detect` walks that pipeline one target at a time with
the scalar evidence primitives, computing each efficiency from Hartley
entropies of whole masses. :func:`detect_all` does the same for a whole
grid with array operations and is what the optimizer uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyField
from .evidence import (
    EPS_ENTROPY,
    LOG2_3,
    MassFunction,
    combine_masses,
    fusion_efficiency_generic,
    hartley_entropy,
)


@dataclass(frozen=True)
class EvidentialSensingParams:
    r_s: float = 4.0
    lam: float = 0.07
    beta: float = 1.0

    def __post_init__(self):
        if not (self.r_s > 0 and self.lam > 0 and self.beta > 0):
            raise ValueError("r_s, lambda and beta must all be positive")


@dataclass(frozen=True)
class ProbabilisticSensingParams:
    r_s: float = 8.0
    r_e: float = 4.0
    alpha1: float = 0.07
    alpha2: float = 0.0
    beta1: float = 1.0
    beta2: float = 0.0

    def __post_init__(self):
        if not (self.r_s > self.r_e >= 0):
            raise ValueError("need r_s > r_e >= 0")


@dataclass(frozen=True)
class DetectionThresholds:
    p_th: float = 0.8
    eta_th: float = 0.2

    def __post_init__(self):
        if not (0.0 < self.p_th <= 1.0):
            raise ValueError(f"p_th={self.p_th} outside (0, 1]")
        if not (0.0 <= self.eta_th < 1.0):
            raise ValueError(f"eta_th={self.eta_th} outside [0, 1)")


def detect_prob_boolean(distance: float, r_s: float) -> int:
    return 1 if distance <= r_s else 0


def detect_prob_probabilistic(distance: float, params: ProbabilisticSensingParams) -> float:
    """Truncated attenuating model with an uncertain annulus of half-width r_e."""
    r_s, r_e = params.r_s, params.r_e
    if distance < r_s - r_e:
        return 1.0
    if distance >= r_s + r_e:
        return 0.0
    lam1 = r_e - (r_s - distance)
    lam2 = r_e + (r_s - distance)
    return math.exp(-params.alpha1 * lam1**params.beta1 / lam2**params.beta2 + params.alpha2)


def detect_prob_evidential(distance: float, params: EvidentialSensingParams) -> float:
    """1 inside the sensing range, exponential tail exp(-lam (d - r_s)^beta) outside."""
    if distance < params.r_s:
        return 1.0
    return math.exp(-params.lam * (distance - params.r_s) ** params.beta)


def detect_prob_evidential_array(d: np.ndarray, params: EvidentialSensingParams) -> np.ndarray:
    excess = np.maximum(d - params.r_s, 0.0)
    return np.exp(-params.lam * excess**params.beta)


def mass_from_prob(p: float) -> MassFunction:
    return MassFunction(p, 0.0, 1.0 - p)


@dataclass(frozen=True)
class DetectionEntry:
    """Outcome of collaborative detection for a single target."""

    fused_probability: float
    n_effect: int
    effective_ranks: tuple[int, ...]
    detected: bool


def collaborative_detect(
    target,
    sensors,
    params: EvidentialSensingParams,
    thresholds: DetectionThresholds,
) -> DetectionEntry:
    """Run the sort / gate / fuse / decide pipeline for one target.

    ``sensors`` is anything convertible to a (K, 2) array of coordinates.
    ``effective_ranks`` holds sensor indices in distance order.
    """
    pts = np.asarray(sensors, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise EmptyField("no sensors to detect with")
    tx, ty = float(target[0]), float(target[1])
    # same arithmetic as pairwise_distances so ties resolve identically
    dists = [math.sqrt((x - tx) * (x - tx) + (y - ty) * (y - ty)) for x, y in pts]
    order = sorted(range(len(pts)), key=lambda i: (dists[i], i))
    masses = [mass_from_prob(detect_prob_evidential(dists[i], params)) for i in order]

    # carry whole masses so the uncertainty product stays exact near certainty
    running = masses[0]
    n_effect = 1
    for new in masses[1:]:
        fused = combine_masses(running, new)
        geo = math.sqrt(hartley_entropy(running) * hartley_entropy(new))
        if fusion_efficiency_generic(hartley_entropy(fused), geo) < thresholds.eta_th:
            break
        running = fused
        n_effect += 1
    fused = running.m_d
    return DetectionEntry(
        fused_probability=fused,
        n_effect=n_effect,
        effective_ranks=tuple(order[:n_effect]),
        detected=fused >= thresholds.p_th,
    )


@dataclass
class DetectionReport:
    """Per-target detection results for a whole grid.

    ``order[j]`` lists sensor indices sorted by distance to target ``j``;
    the first ``n_effect[j]`` of them took part in the fusion.
    """

    fused: np.ndarray
    n_effect: np.ndarray
    order: np.ndarray
    detected: np.ndarray
    gates: np.ndarray

    def __len__(self):
        return len(self.fused)

    def entry(self, j: int) -> DetectionEntry:
        n = int(self.n_effect[j])
        return DetectionEntry(
            fused_probability=float(self.fused[j]),
            n_effect=n,
            effective_ranks=tuple(int(i) for i in self.order[j, :n]),
            detected=bool(self.detected[j]),
        )


def pairwise_distances(sensors: np.ndarray, targets: np.ndarray):
    """Sensor-minus-target offsets ``(dx, dy)`` and distances, each of shape (N, K)."""
    dx = sensors[None, :, 0] - targets[:, 0, None]
    dy = sensors[None, :, 1] - targets[:, 1, None]
    return dx, dy, np.sqrt(dx * dx + dy * dy)


def sort_by_distance(d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-row sensor order by ascending distance (equal distances by index)
    and the distances in that order."""
    order = np.argsort(d, axis=1)
    d_sorted = np.take_along_axis(d, order, axis=1)
    # quicksort is not stable; redo rows that contain exact ties
    tied = (d_sorted[:, 1:] == d_sorted[:, :-1]).any(axis=1)
    if tied.any():
        order[tied] = np.argsort(d[tied], axis=1, kind="stable")
        d_sorted[tied] = np.take_along_axis(d[tied], order[tied], axis=1)
    return order, d_sorted


def gate_outcomes(q_sorted: np.ndarray, eta_th: float):
    """Prefix-gate evaluation on distance-sorted detection probabilities.

    Returns ``(residual, gates, n_effect)`` where ``residual[:, k]`` is the
    product of (1 - q) over the first k+1 ranks and ``gates[:, k-1]`` says
    whether rank k+1 passes the efficiency threshold on its own.
    """
    residual = np.cumprod(1.0 - q_sorted, axis=1)
    n = len(q_sorted)
    if q_sorted.shape[1] == 1:
        return residual, np.zeros((n, 0), dtype=bool), np.ones(n, dtype=np.int64)
    # residual[:, k] = residual[:, k-1] * (1 - q_k) is the product under the
    # geometric-mean entropy, so the efficiency is 1 - sqrt(residual[:, k])
    root = np.sqrt(residual[:, 1:])
    degenerate = root * LOG2_3 < EPS_ENTROPY
    eta = np.where(degenerate, 0.0, 1.0 - root)
    gates = eta >= eta_th
    n_effect = 1 + np.cumprod(gates, axis=1).sum(axis=1)
    return residual, gates, n_effect


def detect_arrays(sensors: np.ndarray, targets: np.ndarray, params, thresholds):
    """:func:`detect_all` plus the intermediate arrays the optimizer reuses.

    Returns ``(dx, dy, d, d_sorted, q_sorted, report)``.
    """
    dx, dy, d = pairwise_distances(sensors, targets)
    order, d_sorted = sort_by_distance(d)
    q_sorted = detect_prob_evidential_array(d_sorted, params)
    residual, gates, n_effect = gate_outcomes(q_sorted, thresholds.eta_th)
    fused = 1.0 - np.take_along_axis(residual, (n_effect - 1)[:, None], axis=1)[:, 0]
    report = DetectionReport(
        fused=fused,
        n_effect=n_effect,
        order=order,
        detected=fused >= thresholds.p_th,
        gates=gates,
    )
    return dx, dy, d, d_sorted, q_sorted, report


def detect_all(
    sensors: np.ndarray,
    targets: np.ndarray,
    params: EvidentialSensingParams,
    thresholds: DetectionThresholds,
) -> DetectionReport:
    """Collaborative detection for every target at once."""
    sensors = np.asarray(sensors, dtype=float).reshape(-1, 2)
    if len(sensors) == 0:
        raise EmptyField("no sensors to detect with")
    targets = np.asarray(targets, dtype=float).reshape(-1, 2)
    return detect_arrays(sensors, targets, params, thresholds)[-1]
