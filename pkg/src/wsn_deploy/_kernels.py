"""Compiled per-target loops for the training inner loop.

These compute exactly what ``optimizer.forward`` and ``optimizer.gradient``
compute with whole-array numpy operations, but in one cache-friendly pass
per target. The numpy versions stay the reference; tests pin the two
together.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .evidence import EPS_ENTROPY, LOG2_3

DIST_GUARD = 1e-12


INSERTION_MAX = 64


@njit(cache=True)
def _insertion_argsort(d, idx):
    # stable: equal distances keep index order
    for i in range(d.shape[0]):
        idx[i] = i
    for i in range(1, d.shape[0]):
        cur = idx[i]
        v = d[cur]
        j = i - 1
        while j >= 0 and d[idx[j]] > v:
            idx[j + 1] = idx[j]
            j -= 1
        idx[j + 1] = cur


@njit(cache=True)
def _sorted_target(d, q, a, idx, ds, before, order_row, coef_row, r_s, lam, beta, eta_th):
    """Full sort-and-gate for one target; returns (fused, n_effect)."""
    k = d.shape[0]
    if k <= INSERTION_MAX:
        _insertion_argsort(d, idx)
    else:
        idx[:] = np.argsort(d, kind="mergesort")
    res = 1.0
    m = 1
    open_gate = True
    for r in range(k):
        i = idx[r]
        order_row[r] = i
        ds[r] = d[i]
        res *= a[i]
        if r >= 1 and open_gate:
            root = math.sqrt(res)
            eta = 0.0 if root * LOG2_3 < EPS_ENTROPY else 1.0 - root
            if eta >= eta_th:
                m += 1
            else:
                open_gate = False
    acc = 1.0
    for r in range(m):
        before[r] = acc
        acc *= a[idx[r]]
    after = 1.0
    for r in range(m - 1, -1, -1):
        i = idx[r]
        excess = ds[r] - r_s
        if excess > 0.0 and ds[r] > DIST_GUARD:
            dq_dd = -lam * beta * excess ** (beta - 1.0) * q[i]
            coef_row[r] = before[r] * after * dq_dd / ds[r]
        after *= a[i]
    return 1.0 - acc, m


@njit(cache=True)
def detect_and_partials(sx, sy, tx, ty, r_s, lam, beta, eta_th):
    """First pass over targets.

    Returns ``fused``, ``n_effect``, ``order``, ``raw`` (unnormalized node
    importance) and ``coef[j, r]``: the derivative of target j's fused
    probability w.r.t. the distance of sensor ``order[j, r]``, divided by
    that distance (0 for non-participants).

    The rank-k efficiency only grows with k, so the prefix gate is decided
    at rank 2 unless the residual product falls under the zero-entropy
    floor. Outside that case the participants are the nearest sensor alone
    or every sensor, and no sort is needed: ``order`` then lists the
    nearest sensor first and the rest in index order. Only the first
    ``n_effect`` entries of each row are meaningful, as a set.
    """
    k = sx.shape[0]
    n = tx.shape[0]
    fused = np.empty(n)
    n_effect = np.empty(n, dtype=np.int64)
    order = np.empty((n, k), dtype=np.int64)
    coef = np.zeros((n, k))
    raw = np.zeros(k)
    d = np.empty(k)
    q = np.empty(k)
    a = np.empty(k)
    ds = np.empty(k)
    before = np.empty(k)
    idx = np.empty(k, dtype=np.int64)
    unit_beta = beta == 1.0

    for j in range(n):
        # distances, probabilities, the full residual and the two nearest (ties by index)
        total = 1.0
        i1 = -1
        i2 = -1
        for i in range(k):
            ex = sx[i] - tx[j]
            ey = sy[i] - ty[j]
            d[i] = math.sqrt(ex * ex + ey * ey)
            excess = d[i] - r_s
            if excess < 0.0:
                excess = 0.0
            q[i] = math.exp(-lam * (excess if unit_beta else excess**beta))
            a[i] = 1.0 - q[i]
            total *= a[i]
            if i1 < 0 or d[i] < d[i1]:
                i2 = i1
                i1 = i
            elif i2 < 0 or d[i] < d[i2]:
                i2 = i

        if k == 1:
            m = 1
        else:
            root = math.sqrt(a[i1] * a[i2])
            eta = 0.0 if root * LOG2_3 < EPS_ENTROPY else 1.0 - root
            if eta < eta_th:
                m = 1
            elif math.sqrt(total) * LOG2_3 >= EPS_ENTROPY:
                m = k
            else:
                m = -1

        if m == -1:
            f, m = _sorted_target(d, q, a, idx, ds, before, order[j], coef[j], r_s, lam, beta, eta_th)
        elif m == 1:
            order[j, 0] = i1
            r = 1
            for i in range(k):
                if i != i1:
                    order[j, r] = i
                    r += 1
            f = q[i1]
            excess = d[i1] - r_s
            if excess > 0.0 and d[i1] > DIST_GUARD:
                coef[j, 0] = -lam * beta * excess ** (beta - 1.0) * q[i1] / d[i1]
        else:
            # everyone fuses: exclusive products from prefix and suffix passes in index order
            acc = 1.0
            for i in range(k):
                before[i] = acc
                acc *= a[i]
            f = 1.0 - acc
            after = 1.0
            for i in range(k - 1, -1, -1):
                order[j, i] = i
                excess = d[i] - r_s
                if excess > 0.0 and d[i] > DIST_GUARD:
                    dq_dd = -lam * beta * excess ** (beta - 1.0) * q[i]
                    coef[j, i] = before[i] * after * dq_dd / d[i]
                after *= a[i]

        fused[j] = f
        n_effect[j] = m
        share = f / m
        for r in range(m):
            raw[order[j, r]] += share
    return fused, n_effect, order, raw, coef


@njit(cache=True)
def accumulate_gradient(sx, sy, tx, ty, order, n_effect, coef, weight):
    """Second pass: sum weight[j] * coef[j, r] * (sensor - target) per sensor."""
    k = sx.shape[0]
    gx = np.zeros(k)
    gy = np.zeros(k)
    for j in range(tx.shape[0]):
        w = weight[j]
        for r in range(n_effect[j]):
            i = order[j, r]
            c = w * coef[j, r]
            gx[i] += c * (sx[i] - tx[j])
            gy[i] += c * (sy[i] - ty[j])
    out = np.empty(2 * k)
    for i in range(k):
        out[2 * i] = gx[i]
        out[2 * i + 1] = gy[i]
    return out


@njit(cache=True)
def participant_sum(order, n_effect, values):
    """sum of values[sensor] over each target's participating sensors."""
    out = np.zeros(order.shape[0])
    for j in range(order.shape[0]):
        s = 0.0
        for r in range(n_effect[j]):
            s += values[order[j, r]]
        out[j] = s
    return out
