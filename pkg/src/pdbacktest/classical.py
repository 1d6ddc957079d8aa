"""Classical multiplicity adjustments of p-values.

FWER: Bonferroni, Holm, Hommel.  FDR: Benjamini-Hochberg, adaptive BH with a
lowest-slope estimate of the number of true nulls, Benjamini-Yekutieli.

Every function takes p-values along the last axis, so a ``(R, K)`` array is
adjusted row by row.  Ties are ordered by position (stable sort).
"""

from __future__ import annotations

import numpy as np


def _as_pvalues(pvs) -> np.ndarray:
    p = np.asarray(pvs, dtype=float)
    if p.ndim == 0:
        p = p[None]
    if p.shape[-1] == 0:
        raise ValueError("need at least one p-value")
    if np.any(~(p > 0)) or np.any(p > 1):
        raise ValueError("p-values must lie in (0, 1]")
    return p


def _sorted(p: np.ndarray):
    order = np.argsort(p, axis=-1, kind="stable")
    return order, np.take_along_axis(p, order, axis=-1)


def _unsort(values: np.ndarray, order: np.ndarray) -> np.ndarray:
    out = np.empty_like(values)
    np.put_along_axis(out, order, values, axis=-1)
    return out


def adjust_bonferroni(pvs) -> np.ndarray:
    p = _as_pvalues(pvs)
    return np.minimum(p.shape[-1] * p, 1.0)


def adjust_holm(pvs) -> np.ndarray:
    """Holm step-down: running max of ``(K - i + 1) * p_(i)``, capped at 1."""
    p = _as_pvalues(pvs)
    k = p.shape[-1]
    order, ps = _sorted(p)
    factors = k - np.arange(k)
    adj = np.minimum(np.maximum.accumulate(factors * ps, axis=-1), 1.0)
    return _unsort(adj, order)


def adjust_hommel(pvs) -> np.ndarray:
    """Hommel (1988) adjusted p-values.

    Uses the usual iterative formulation over subset sizes ``m = K..2``: the
    adjusted value is the largest, over ``m``, of the Simes-type bound for the
    subsets of size ``m`` containing the hypothesis.
    """
    p = _as_pvalues(pvs)
    k = p.shape[-1]
    order, ps = _sorted(p)
    idx = np.arange(1, k + 1)
    q = np.repeat(np.min(k * ps / idx, axis=-1, keepdims=True), k, axis=-1)
    pa = q.copy()
    for m in range(k - 1, 1, -1):
        head = k - m + 1  # indices 0..head-1
        tail = ps[..., head:]
        q1 = np.min(m * tail / np.arange(2, m + 1), axis=-1, keepdims=True)
        q = np.empty_like(ps)
        q[..., :head] = np.minimum(m * ps[..., :head], q1)
        q[..., head:] = q[..., head - 1 : head]
        pa = np.maximum(pa, q)
    adj = np.minimum(np.maximum(pa, ps), 1.0)
    return _unsort(adj, order)


def adjust_bh(pvs) -> np.ndarray:
    """Benjamini-Hochberg: running min from the top of ``K / i * p_(i)``."""
    p = _as_pvalues(pvs)
    k = p.shape[-1]
    order, ps = _sorted(p)
    scaled = k / np.arange(1, k + 1) * ps
    adj = np.minimum.accumulate(scaled[..., ::-1], axis=-1)[..., ::-1]
    return _unsort(np.minimum(adj, 1.0), order)


def estimate_m0(pvs) -> np.ndarray | int:
    """Lowest-slope estimate of the number of true null hypotheses.

    With sorted p-values, ``m(k) = (K + 1 - k) / (1 - p_(k))``; the scan stops at
    the first ``k >= 2`` where ``m(k)`` exceeds ``m(k - 1)`` and returns
    ``min(K, ceil(m(k)))``.  Without such a ``k`` (p-values equal to 1 carry no
    slope information and end the scan) the estimate is ``K``.
    """
    p = _as_pvalues(pvs)
    k = p.shape[-1]
    _, ps = _sorted(p)
    flat = ps.reshape(-1, k)
    out = np.full(flat.shape[0], k, dtype=int)
    with np.errstate(divide="ignore"):
        m = (k + 1 - np.arange(1, k + 1)) / (1.0 - flat)
    for row in range(flat.shape[0]):
        for j in range(1, k):
            if flat[row, j] >= 1.0:
                break
            if m[row, j] > m[row, j - 1]:
                out[row] = min(k, int(np.ceil(m[row, j] - 1e-12)))
                break
    if ps.ndim == 1:
        return int(out[0])
    return out.reshape(ps.shape[:-1])


def adjust_abh(pvs) -> np.ndarray:
    """Adaptive BH: BH-adjusted values scaled by ``m0_hat / K``, capped at 1."""
    p = _as_pvalues(pvs)
    k = p.shape[-1]
    m0 = np.asarray(estimate_m0(p), dtype=float)[..., None]
    return np.minimum(adjust_bh(p) * m0 / k, 1.0)


def adjust_by(pvs) -> np.ndarray:
    """Benjamini-Yekutieli: BH-adjusted values times the harmonic number H_K."""
    p = _as_pvalues(pvs)
    k = p.shape[-1]
    harmonic = np.sum(1.0 / np.arange(1, k + 1))
    return np.minimum(adjust_bh(p) * harmonic, 1.0)
