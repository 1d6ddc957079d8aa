"""Prototype portfolio, misclassification matrices and default sampling.

Rows of a misclassification matrix are true classes, columns the classes the
rating system assigned; ``matrix[i, j]`` counts borrowers of true class ``i``
rated as ``j``.  Defaults are counted per assigned class.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.stats import norm


@dataclass(frozen=True)
class PortfolioSpec:
    true_pds: np.ndarray
    class_probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.true_pds, dtype=float)
        q = np.asarray(self.class_probs, dtype=float)
        if p.ndim != 1 or p.shape != q.shape or p.size == 0:
            raise ValueError("true_pds and class_probs must be 1-d of equal length")
        if np.any(np.diff(p) <= 0) or p[0] <= 0 or p[-1] >= 1:
            raise ValueError("true_pds must be strictly increasing inside (0, 1)")
        if np.any(q < 0) or abs(q.sum() - 1.0) > 1e-9:
            raise ValueError("class_probs must be nonnegative and sum to 1")
        object.__setattr__(self, "true_pds", p)
        object.__setattr__(self, "class_probs", q)

    @property
    def K(self) -> int:
        return self.true_pds.size


def _read_portfolio_csv():
    with resources.files("pdbacktest.data").joinpath("portfolio.csv").open() as fh:
        return list(csv.DictReader(fh))


def prototype_spec() -> PortfolioSpec:
    """The 14-class prototype portfolio.

    The tabulated shares are rounded and sum to 1.001; they are renormalised.
    """
    rows = _read_portfolio_csv()
    shares = np.array([float(r["share"]) for r in rows])
    return PortfolioSpec(np.array([float(r["pd"]) for r in rows]), shares / shares.sum())


def fixture_counts_300() -> np.ndarray:
    """The reference N=300 portfolio realisation (true class counts)."""
    return np.array([int(r["n300"]) for r in _read_portfolio_csv()])


def largest_remainder(total: int, weights) -> np.ndarray:
    """Split ``total`` into integers proportional to ``weights`` (Hamilton method).

    Leftover units go to the largest fractional parts, ties to the lower index.
    """
    w = np.asarray(weights, dtype=float)
    if total < 0 or np.any(w < 0) or w.sum() <= 0:
        raise ValueError("need total >= 0 and nonnegative weights with positive sum")
    exact = total * w / w.sum()
    base = np.floor(exact).astype(int)
    short = total - base.sum()
    frac = exact - base
    winners = np.argsort(-frac, kind="stable")[:short]
    base[winners] += 1
    return base


def build_portfolio(spec: PortfolioSpec, n_pf: int, step: int = 100) -> np.ndarray:
    """True class counts for a portfolio of ``n_pf`` borrowers.

    Borrowers are added in blocks of ``step``; each block is split by largest
    remainder toward the target ``N * q``.  Counts are therefore nondecreasing
    class-wise along the ladder 100, 200, ... and always sum to ``n_pf``.
    """
    if n_pf < 1:
        raise ValueError(f"portfolio size must be >= 1, got {n_pf}")
    counts = np.zeros(spec.K, dtype=int)
    total = 0
    while total < n_pf:
        block = min(step, n_pf - total)
        total += block
        need = np.maximum(total * spec.class_probs - counts, 0.0)
        if need.sum() <= 0:
            need = spec.class_probs
        counts += largest_remainder(block, need)
    return counts


def upgrade_downgrade_matrix(counts, s: int) -> np.ndarray:
    """Every borrower of true class g is rated ``clip(g - s, 1, K)``."""
    counts = np.asarray(counts, dtype=int)
    k = counts.size
    if abs(s) > k:
        raise ValueError(f"|s| must not exceed K={k}, got {s}")
    assigned = np.clip(np.arange(k) - s, 0, k - 1)
    mat = np.zeros((k, k), dtype=int)
    mat[np.arange(k), assigned] = counts
    return mat


def dispersion_weights(k: int, h: float) -> np.ndarray:
    """Row-normalised Gaussian kernel weights ``phi(|i - j| / h)``."""
    if h < 0:
        raise ValueError(f"dispersion h must be >= 0, got {h}")
    if h == 0:
        return np.eye(k)
    dist = np.abs(np.subtract.outer(np.arange(k), np.arange(k)))
    w = norm.pdf(dist / h)
    return w / w.sum(axis=1, keepdims=True)


def dispersion_matrix(counts, h: float) -> np.ndarray:
    """``round(n_i * w_ij(h))`` with halves rounded away from zero.

    Row sums may drift from ``n_i`` by rounding.
    """
    counts = np.asarray(counts, dtype=float)
    w = dispersion_weights(counts.size, h)
    return np.floor(counts[:, None] * w + 0.5).astype(int)


def sample_defaults(matrix, true_pds, rng: np.random.Generator, size=None) -> np.ndarray:
    """Default counts per assigned class, one independent binomial per cell.

    With ``size=R`` an ``(R, K)`` array of replications is returned.
    """
    mat = np.asarray(matrix, dtype=np.int64)
    p = np.asarray(true_pds, dtype=float)[:, None] * np.ones_like(mat, dtype=float)
    shape = mat.shape if size is None else (size,) + mat.shape
    return rng.binomial(mat, p, size=shape).sum(axis=-2)


def assigned_sample(matrix, true_pds):
    """Tested sample implied by a misclassification matrix.

    Returns:
        (classes, n_hat, pd): 1-based indices of the assigned classes with at
        least one borrower, their column sums, and their forecast PDs.
    """
    mat = np.asarray(matrix, dtype=int)
    n_hat = mat.sum(axis=0)
    keep = np.flatnonzero(n_hat > 0)
    return keep + 1, n_hat[keep], np.asarray(true_pds, dtype=float)[keep]
