"""Global calibration tests: Hosmer-Lemeshow statistic with a Monte Carlo
null distribution, and global rejection derived from adjusted p-values."""

from __future__ import annotations

import numpy as np

from .minp import MinPInput


def _moments(n, pd):
    n = np.asarray(n, dtype=float)
    pd = np.asarray(pd, dtype=float)
    if np.any((pd <= 0) | (pd >= 1)):
        raise ValueError("HL statistic needs every pd strictly inside (0, 1)")
    return n * pd, n * pd * (1.0 - pd)


def hl_statistic(data: MinPInput) -> float:
    """Sum over classes of (observed - expected)^2 / variance under the forecast."""
    expected, variance = _moments(data.n, data.pd)
    o = np.asarray(data.defaults, dtype=float)
    return float(np.sum((o - expected) ** 2 / variance))


def hl_statistics(n, pd, defaults) -> np.ndarray:
    """Vectorised statistic for a ``(R, K)`` array of default counts."""
    expected, variance = _moments(n, pd)
    o = np.asarray(defaults, dtype=float)
    return np.sum((o - expected) ** 2 / variance, axis=-1)


def hl_null_sample(n, pd, n_sim: int, rng: np.random.Generator) -> np.ndarray:
    """``n_sim`` draws of the statistic with defaults simulated from the forecast."""
    n = np.asarray(n, dtype=np.int64)
    pd = np.asarray(pd, dtype=float)
    draws = rng.binomial(n, pd, size=(n_sim, n.size))
    return hl_statistics(n, pd, draws)


def mc_pvalue(observed, null_sample: np.ndarray):
    """Add-one Monte Carlo p-value ``(1 + #{T >= t_obs}) / (n_sim + 1)``.

    ``observed`` may be an array; the null sample is shared across it.
    """
    null_sorted = np.sort(null_sample)
    # a tiny relative slack keeps ties in the statistic counted as "as extreme"
    obs = np.asarray(observed, dtype=float)
    below = np.searchsorted(null_sorted, obs * (1 - 1e-12), side="left")
    exceed = null_sorted.size - below
    return (1.0 + exceed) / (null_sorted.size + 1.0)


def hl_exact_test(data: MinPInput, n_sim: int = 10_000, seed=None) -> float:
    """Monte Carlo (finite sample) Hosmer-Lemeshow p-value."""
    if n_sim < 1000:
        raise ValueError(f"n_sim must be at least 1000, got {n_sim}")
    rng = np.random.default_rng(seed)
    null = hl_null_sample(data.n, data.pd, n_sim, rng)
    return float(mc_pvalue(hl_statistic(data), null))


def global_reject(adjusted: dict, alpha: float = 0.05) -> dict:
    """Whether each method rejects the global hypothesis, i.e. any adjusted p <= alpha.

    Args:
        adjusted: mapping method name -> adjusted p-values.  An
            :class:`~pdbacktest.report.AdjustmentReport` ``.adjusted`` works;
            ``None`` entries (untested classes) are skipped.
    """
    out = {}
    for m, values in adjusted.items():
        tested = [v for v in values if v is not None]
        out[m] = bool(tested) and min(tested) <= alpha
    return out
