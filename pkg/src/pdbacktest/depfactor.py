"""Min-P under dependent defaults in the Gaussian one-factor model.

Borrower ``i`` has latent credit quality ``A_i = sqrt(rho) Z + sqrt(1 - rho) U_i``
with a common factor ``Z`` and defaults when ``A_i <= Phi^-1(pd)``.  Exact
minimum-p-value laws are no longer available, so they are estimated from one
simulated batch under the null; subset CDFs for the step-down procedure reuse
the same batch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .binomial import BinomialLaw, pvalue_table
from .minp import _share_ties
from .stepcdf import DiscreteCdf

#: replications per independent random stream
BATCH = 2000
#: cap on latent draws held in memory at once
_CHUNK_ELEMS = 2_000_000


@dataclass(frozen=True)
class OneFactorConfig:
    rho: float
    n: tuple
    pd: tuple
    n_sim: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")
        n = tuple(int(v) for v in self.n)
        pd = tuple(float(v) for v in self.pd)
        if len(n) != len(pd) or not n:
            raise ValueError("n and pd must be nonempty and of equal length")
        if any(v < 1 for v in n) or any(not 0 < p < 1 for p in pd):
            raise ValueError("need n >= 1 and pd in (0, 1) for every class")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "pd", pd)

    @property
    def K(self) -> int:
        return len(self.n)


def one_factor_sample(config: OneFactorConfig, rng: np.random.Generator) -> list:
    """One draw of every borrower's default indicator, grouped by class."""
    z = rng.standard_normal()
    out = []
    a, b = np.sqrt(config.rho), np.sqrt(1.0 - config.rho)
    for nj, pj in zip(config.n, config.pd):
        latent = a * z + b * rng.standard_normal(nj)
        out.append(latent <= ndtri(pj))
    return out


def one_factor_counts(n, pd, rho: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """``(size, K)`` default counts, each row from its own factor draw.

    Every borrower gets an idiosyncratic normal; counts are the number of
    latent values below the class threshold.
    """
    n = np.asarray(n, dtype=int)
    thresholds = ndtri(np.asarray(pd, dtype=float))
    a, b = np.sqrt(rho), np.sqrt(1.0 - rho)
    total = int(n.sum())
    owner = np.repeat(np.arange(n.size), n)
    per_borrower = thresholds[owner]
    out = np.zeros((size, n.size), dtype=int)
    rows = max(1, _CHUNK_ELEMS // max(total, 1))
    for start in range(0, size, rows):
        stop = min(size, start + rows)
        z = rng.standard_normal(stop - start)
        latent = a * z[:, None] + b * rng.standard_normal((stop - start, total))
        hit = latent <= per_borrower
        # per-class counts via cumulative sums over the borrower axis
        cum = np.concatenate([np.zeros((stop - start, 1), dtype=int), np.cumsum(hit, axis=1)], axis=1)
        edges = np.concatenate([[0], np.cumsum(n)])
        out[start:stop] = cum[:, edges[1:]] - cum[:, edges[:-1]]
    return out


def null_pvalues(config: OneFactorConfig) -> np.ndarray:
    """``(n_sim, K)`` per-class two-sided binomial p-values simulated under the null."""
    tables = [pvalue_table(BinomialLaw(nj, pj)) for nj, pj in zip(config.n, config.pd)]
    out = np.empty((config.n_sim, config.K))
    for b, start in enumerate(range(0, config.n_sim, BATCH)):
        size = min(BATCH, config.n_sim - start)
        rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(b,)))
        counts = one_factor_counts(config.n, config.pd, config.rho, rng, size)
        for j, t in enumerate(tables):
            out[start : start + size, j] = t[counts[:, j]]
    return out


def empirical_cdf(values) -> DiscreteCdf:
    xs, counts = np.unique(np.asarray(values, dtype=float), return_counts=True)
    return DiscreteCdf(xs, np.minimum(np.cumsum(counts) / counts.sum(), 1.0))


def simulated_minp_cdf(config: OneFactorConfig, null_pv: np.ndarray | None = None) -> DiscreteCdf:
    """Empirical CDF of the minimum p-value over all classes under the null."""
    if config.n_sim < 10_000:
        raise ValueError(f"n_sim must be at least 10000, got {config.n_sim}")
    if null_pv is None:
        null_pv = null_pvalues(config)
    return empirical_cdf(null_pv.min(axis=1))


def simulated_minp_adjust(pvalues, null_pv: np.ndarray, step_down: bool = True) -> np.ndarray:
    """Min-P adjusted p-values against a simulated null batch.

    Args:
        pvalues: observed per-class p-values, shape ``(K,)`` or ``(R, K)``.
        null_pv: ``(n_sim, K)`` null p-values from :func:`null_pvalues`.
        step_down: use the step-down procedure; otherwise single-step.
    """
    pv = np.atleast_2d(np.asarray(pvalues, dtype=float))
    # observed rows repeat as often as null rows do; adjust each distinct row once
    rows, inverse = np.unique(pv, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    r, k = rows.shape
    if step_down:
        order = np.argsort(rows, axis=1, kind="stable")
    else:
        order = np.tile(np.arange(k), (r, 1))
    out = np.empty_like(rows)
    full_min = np.sort(null_pv.min(axis=1))
    # sparse defaults make most null rows repeat; weight the distinct ones
    uniq, weight = np.unique(null_pv, axis=0, return_counts=True)
    weight = weight / weight.sum()
    for row in range(r):
        o = order[row]
        if step_down:
            # suffix minima over the null batch in this row's ordering
            suffix = np.minimum.accumulate(uniq[:, o[::-1]], axis=1)[:, ::-1]
            step = np.maximum.accumulate(np.minimum(weight @ (suffix <= rows[row, o]), 1.0))
            out[row, o] = _share_ties(rows[row, o][None, :], step[None, :])[0]
        else:
            out[row] = np.searchsorted(full_min, rows[row], side="right") / full_min.size
    out = out[inverse]
    return out if np.ndim(pvalues) == 2 else out[0]
