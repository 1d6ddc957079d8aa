"""Right-continuous discrete step CDFs and minimum-p-value distributions.

A :class:`DiscreteCdf` is stored as its jump points ``xs`` and the value the
function takes from each jump onwards, ``ys``.  Combining several p-value
CDFs evaluates each of them on the union of their jump points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .binomial import PValueLaw

#: abscissae closer than this are treated as the same jump point
UNION_ATOL = 1e-15


@dataclass(frozen=True)
class DiscreteCdf:
    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float)
        ys = np.array(self.ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size == 0:
            raise ValueError("xs and ys must be nonempty 1-d arrays of equal length")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("xs must be strictly increasing")
        if np.any(np.diff(ys) < 0):
            raise ValueError("ys must be nondecreasing")
        if ys[0] < 0 or ys[-1] > 1:
            raise ValueError("ys must lie in [0, 1]")
        xs.flags.writeable = False
        ys.flags.writeable = False
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    def __call__(self, x):
        return evaluate(self, x)

    def __len__(self) -> int:
        return self.xs.size


def from_pvalue_law(law: PValueLaw) -> DiscreteCdf:
    """CDF of a discrete p-value: jumps at the support, running mass sums."""
    return DiscreteCdf(law.support, np.minimum(np.cumsum(law.mass), 1.0))


def evaluate(cdf: DiscreteCdf, x):
    """Right-continuous evaluation; 0 below the first jump.

    Accepts a scalar or an array of abscissae.
    """
    idx = np.searchsorted(cdf.xs, x, side="right") - 1
    vals = np.where(idx >= 0, cdf.ys[np.maximum(idx, 0)], 0.0)
    if np.ndim(vals) == 0:
        return float(vals)
    return vals


def union_support(cdfs: Sequence[DiscreteCdf]) -> np.ndarray:
    """Sorted union of all jump points, merging near-duplicates."""
    xs = np.sort(np.concatenate([c.xs for c in cdfs]))
    keep = np.ones(xs.size, dtype=bool)
    keep[1:] = np.diff(xs) > UNION_ATOL
    return xs[keep]


def tabulate(cdfs: Sequence[DiscreteCdf]):
    """Union grid and the matrix of every CDF evaluated on it (one row each)."""
    if len(cdfs) == 0:
        raise ValueError("need at least one CDF")
    grid = union_support(cdfs)
    # evaluate slightly above each grid point so merged near-duplicates count
    probe = grid + UNION_ATOL
    return grid, np.vstack([evaluate(c, probe) for c in cdfs])


def combine_ind(cdfs: Sequence[DiscreteCdf]) -> DiscreteCdf:
    """Distribution of the minimum of independent p-values: 1 - prod(1 - F_i)."""
    grid, ys = tabulate(cdfs)
    return DiscreteCdf(grid, 1.0 - np.prod(1.0 - ys, axis=0))


def combine_bonf(cdfs: Sequence[DiscreteCdf]) -> DiscreteCdf:
    """Bonferroni upper bound on the minimum-p-value CDF: min(sum F_i, 1)."""
    grid, ys = tabulate(cdfs)
    return DiscreteCdf(grid, np.minimum(ys.sum(axis=0), 1.0))


def critical_value(cdf: DiscreteCdf, alpha: float) -> Optional[float]:
    """Largest jump point ``x`` with ``F(x) <= alpha``.

    Returns None when even the smallest attainable value has ``F > alpha``,
    i.e. no rejection is possible at this level.
    """
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha!r}")
    ok = np.flatnonzero(cdf.ys <= alpha)
    if ok.size == 0:
        return None
    return float(cdf.xs[ok[-1]])
