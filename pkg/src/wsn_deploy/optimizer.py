"""Gradient-based placement of sensors.

One epoch is filter -> forward -> losses -> gradient -> Adam step. The
forward pass produces discrete structure per target (distance order, number
of fused sensors, gate outcomes) that is not differentiable. It is frozen
for the backward pass: the gradient is exact for the loss with that
structure held fixed, and the structure is recomputed next epoch.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EmptyField, StaleStructure
from .field import SensorField
from .geometry import Region, TargetGrid, mbr
from .sensing import (
    DetectionReport,
    DetectionThresholds,
    EvidentialSensingParams,
    detect_prob_evidential_array,
    detect_arrays,
    pairwise_distances,
)

try:
    from . import _kernels
except ImportError:  # numba missing: fall back to the array implementation
    _kernels = None

log = logging.getLogger(__name__)

DIST_GUARD = 1e-12


@dataclass(frozen=True)
class TrainingConfig:
    gamma_n: float = 3e5
    gamma_c: float = 1e3
    learning_rate: float = 3e-2
    max_epochs: int = 1000
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    early_stop_patience: int = 50
    # None: 1e-8 times the first epoch's loss
    early_stop_delta: Optional[float] = None

    def __post_init__(self):
        if not (self.gamma_n > 0 and self.gamma_c > 0):
            raise ValueError("loss weights must be positive")
        if not self.learning_rate > 0:
            raise ValueError("learning rate must be positive")
        if self.max_epochs < 0:
            raise ValueError("max_epochs must be non-negative")
        if not (0 <= self.adam_beta1 < 1 and 0 <= self.adam_beta2 < 1):
            raise ValueError("Adam decay rates must lie in [0, 1)")
        if self.early_stop_patience < 1:
            raise ValueError("early_stop_patience must be at least 1")


@dataclass
class OptimizerState:
    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int = 0

    @classmethod
    def zeros(cls, n: int) -> "OptimizerState":
        return cls(np.zeros(n), np.zeros(n), 0)


@dataclass(frozen=True)
class LossBreakdown:
    loss_ni: float
    loss_cov: float
    total: float
    coverage_rate: float


@dataclass
class NodeImportance:
    raw: np.ndarray
    normalized: np.ndarray


@dataclass(frozen=True, eq=False)
class FrozenStructure:
    """Discrete skeleton of one forward pass, held fixed while differentiating."""

    order: np.ndarray
    n_effect: np.ndarray
    gates: np.ndarray

    @property
    def k(self) -> int:
        return self.order.shape[1]


def filter_field(f: SensorField, region: Region) -> SensorField:
    """Clamp every sensor into the region's bounding box."""
    box = mbr(region)
    return f.with_coords(np.clip(f.coords, box.lo, box.hi))


def _participation(n_effect: np.ndarray, k: int) -> np.ndarray:
    # (N, K) mask over distance ranks: rank r fuses iff r < n_effect
    return np.arange(k)[None, :] < n_effect[:, None]


def _scatter(sorted_vals: np.ndarray, order: np.ndarray) -> np.ndarray:
    out = np.empty_like(sorted_vals)
    np.put_along_axis(out, order, sorted_vals, axis=1)
    return out


def _importance(fused, n_effect, order, part) -> NodeImportance:
    share = np.where(part, (fused / n_effect)[:, None], 0.0)
    raw = _scatter(share, order).sum(axis=0)
    s = raw.sum()
    k = len(raw)
    normalized = raw / s if s > 0 else np.full(k, 1.0 / k)
    return NodeImportance(raw=raw, normalized=normalized)


def node_importance(report: DetectionReport) -> NodeImportance:
    part = _participation(report.n_effect, report.order.shape[1])
    return _importance(report.fused, report.n_effect, report.order, part)


def loss_ni(ni: NodeImportance) -> float:
    """Mean squared deviation of normalized importance from the uniform share."""
    k = len(ni.normalized)
    return float(np.mean((ni.normalized - 1.0 / k) ** 2))


def loss_cov(report: DetectionReport) -> float:
    """Mean squared shortfall of fused detection probabilities from 1."""
    return float(np.mean((report.fused - 1.0) ** 2))


def _targets(grid) -> np.ndarray:
    if isinstance(grid, TargetGrid):
        return grid.targets
    return np.asarray(grid, dtype=float).reshape(-1, 2)


def _check_field(f: SensorField, targets: np.ndarray):
    if f.k == 0:
        raise EmptyField("no sensors")
    if len(targets) == 0:
        raise ValueError("no targets to detect")


def forward(
    f: SensorField,
    grid,
    params: EvidentialSensingParams,
    thresholds: DetectionThresholds,
) -> tuple[DetectionReport, NodeImportance, FrozenStructure]:
    """Evaluate collaborative detection on every target and credit the sensors."""
    targets = _targets(grid)
    _check_field(f, targets)
    report = detect_arrays(f.coords, targets, params, thresholds)[-1]
    frozen = FrozenStructure(order=report.order, n_effect=report.n_effect, gates=report.gates)
    return report, node_importance(report), frozen


def breakdown(report: DetectionReport, ni: NodeImportance, config: TrainingConfig) -> LossBreakdown:
    l_ni, l_cov = loss_ni(ni), loss_cov(report)
    return LossBreakdown(
        loss_ni=l_ni,
        loss_cov=l_cov,
        total=config.gamma_n * l_ni + config.gamma_c * l_cov,
        coverage_rate=float(np.mean(report.detected)),
    )


def _raw_importance_grad(ni: NodeImportance) -> np.ndarray:
    """d loss_ni / d raw importance, through the normalization."""
    k = len(ni.raw)
    s = ni.raw.sum()
    if s <= 0:
        return np.zeros(k)
    resid = (2.0 / k) * (ni.normalized - 1.0 / k)
    return (resid - np.dot(resid, ni.normalized)) / s


def _target_weights(g_sum, fused, n_effect, config) -> np.ndarray:
    """d total_loss / d fused probability, per target."""
    n_targets = len(fused)
    return config.gamma_n * g_sum / n_effect + config.gamma_c * (2.0 / n_targets) * (fused - 1.0)


def _gradient_arrays(dx, dy, d, d_sorted, q_sorted, order, n_effect, params, config) -> np.ndarray:
    n_targets, k = d.shape
    part = _participation(n_effect, k)
    a = np.where(part, 1.0 - q_sorted, 1.0)

    # product of (1 - q) over the other participating ranks
    before = np.empty_like(a)
    before[:, 0] = 1.0
    np.cumprod(a[:, :-1], axis=1, out=before[:, 1:])
    after = np.empty_like(a)
    after[:, -1] = 1.0
    np.cumprod(a[:, :0:-1], axis=1, out=after[:, -2::-1])
    dfused_dq = np.where(part, before * after, 0.0)
    fused = 1.0 - before[:, -1] * a[:, -1]

    ni = _importance(fused, n_effect, order, part)
    g_raw = _raw_importance_grad(ni)
    g_sum = np.where(part, g_raw[order], 0.0).sum(axis=1)
    w = _target_weights(g_sum, fused, n_effect, config)

    excess = d_sorted - params.r_s
    outside = excess > 0
    safe = np.where(outside, excess, 1.0)
    dq_dd = np.where(outside, -params.lam * params.beta * safe ** (params.beta - 1.0) * q_sorted, 0.0)

    coef = _scatter(w[:, None] * dfused_dq * dq_dd, order)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(d > DIST_GUARD, coef / d, 0.0)
    # fixed-order column sums over targets
    return np.column_stack([(scale * dx).sum(axis=0), (scale * dy).sum(axis=0)]).reshape(-1)


def gradient(
    f: SensorField,
    grid,
    frozen: FrozenStructure,
    config: TrainingConfig,
    params: EvidentialSensingParams,
    thresholds: DetectionThresholds,
) -> np.ndarray:
    """Gradient of the total loss w.r.t. (x1, y1, ..., xK, yK) with ``frozen`` held fixed."""
    targets = _targets(grid)
    _check_field(f, targets)
    if frozen.k != f.k or frozen.order.shape[0] != len(targets):
        raise StaleStructure(
            f"structure is for K={frozen.k}, N={frozen.order.shape[0]}; "
            f"field has K={f.k}, grid has N={len(targets)}"
        )
    dx, dy, d = pairwise_distances(f.coords, targets)
    d_sorted = np.take_along_axis(d, frozen.order, axis=1)
    q_sorted = detect_prob_evidential_array(d_sorted, params)
    return _gradient_arrays(dx, dy, d, d_sorted, q_sorted, frozen.order, frozen.n_effect, params, config)


def _epoch_numpy(coords, targets, params, thresholds, config):
    dx, dy, d, d_sorted, q_sorted, report = detect_arrays(coords, targets, params, thresholds)
    lb = breakdown(report, node_importance(report), config)
    grad = _gradient_arrays(dx, dy, d, d_sorted, q_sorted, report.order, report.n_effect, params, config)
    return lb, grad


def _epoch_compiled(coords, targets, params, thresholds, config):
    sx, sy = np.ascontiguousarray(coords[:, 0]), np.ascontiguousarray(coords[:, 1])
    tx, ty = np.ascontiguousarray(targets[:, 0]), np.ascontiguousarray(targets[:, 1])
    fused, n_effect, order, raw, coef = _kernels.detect_and_partials(
        sx, sy, tx, ty, params.r_s, params.lam, params.beta, thresholds.eta_th
    )
    k = len(raw)
    s = raw.sum()
    ni = NodeImportance(raw=raw, normalized=raw / s if s > 0 else np.full(k, 1.0 / k))
    l_ni = loss_ni(ni)
    l_cov = float(np.mean((fused - 1.0) ** 2))
    lb = LossBreakdown(
        loss_ni=l_ni,
        loss_cov=l_cov,
        total=config.gamma_n * l_ni + config.gamma_c * l_cov,
        coverage_rate=float(np.mean(fused >= thresholds.p_th)),
    )
    g_sum = _kernels.participant_sum(order, n_effect, _raw_importance_grad(ni))
    w = _target_weights(g_sum, fused, n_effect, config)
    grad = _kernels.accumulate_gradient(sx, sy, tx, ty, order, n_effect, coef, w)
    return lb, grad


def adam_step(
    f: SensorField,
    grad: np.ndarray,
    state: OptimizerState,
    config: TrainingConfig,
) -> SensorField:
    """Bias-corrected Adam update; advances ``state`` in place."""
    theta = f.flat()
    g = np.asarray(grad, dtype=float).reshape(-1)
    if g.shape != theta.shape or state.first_moment.shape != theta.shape:
        raise ValueError("gradient, state and field lengths disagree")
    b1, b2 = config.adam_beta1, config.adam_beta2
    state.step_count += 1
    t = state.step_count
    state.first_moment = b1 * state.first_moment + (1.0 - b1) * g
    state.second_moment = b2 * state.second_moment + (1.0 - b2) * g * g
    m_hat = state.first_moment / (1.0 - b1**t)
    v_hat = state.second_moment / (1.0 - b2**t)
    theta = theta - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_epsilon)
    return f.with_coords(theta.reshape(-1, 2))


def evaluate(
    f: SensorField,
    grid,
    params: EvidentialSensingParams,
    thresholds: DetectionThresholds,
    config: TrainingConfig,
) -> tuple[LossBreakdown, DetectionReport, NodeImportance]:
    report, ni, _ = forward(f, grid, params, thresholds)
    return breakdown(report, ni, config), report, ni


def train(
    initial: SensorField,
    grid: TargetGrid,
    params: EvidentialSensingParams,
    thresholds: DetectionThresholds,
    config: TrainingConfig,
    callback=None,
    compiled: bool = True,
) -> tuple[SensorField, list[LossBreakdown]]:
    """Optimize sensor positions; returns the chosen field and per-epoch losses.

    The returned field is the epoch with the highest coverage rate among
    those whose total loss does not exceed the first epoch's, ties going to
    the lower loss. Loss is only a surrogate for coverage, and this keeps
    a run from handing back a lower-loss layout that detects fewer targets.

    Stops after ``max_epochs`` or once the best loss has failed to improve by
    ``early_stop_delta`` for ``early_stop_patience`` consecutive epochs.
    ``callback(epoch, breakdown, field)`` is called after each evaluation.
    ``compiled=False`` forces the pure-numpy epoch.
    """
    _epoch = _epoch_compiled if compiled and _kernels is not None else _epoch_numpy
    targets = grid.targets
    _check_field(initial, targets)
    region = grid.region
    state = OptimizerState.zeros(2 * initial.k)
    current = filter_field(initial, region)
    best_field = current
    history: list[LossBreakdown] = []
    best = math.inf
    chosen = None
    delta = config.early_stop_delta
    stale = 0

    for epoch in range(config.max_epochs):
        current = filter_field(current, region)
        lb, grad = _epoch(current.coords, targets, params, thresholds, config)
        history.append(lb)
        if callback is not None:
            callback(epoch, lb, current)
        if delta is None:
            delta = 1e-8 * lb.total
        stale = stale + 1 if best - lb.total < delta else 0
        best = min(best, lb.total)
        key = (lb.coverage_rate, -lb.total)
        if lb.total <= history[0].total and (chosen is None or key > chosen):
            chosen, best_field = key, current

        current = adam_step(current, grad, state, config)
        if epoch % 100 == 0:
            log.debug("epoch %d total=%.6g coverage=%.4f", epoch, lb.total, lb.coverage_rate)
        if stale >= config.early_stop_patience:
            log.debug("early stop at epoch %d", epoch)
            break

    return best_field, history
