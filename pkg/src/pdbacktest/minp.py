"""Discrete Min-P adjustments built on exact binomial p-value laws.

Single-step: ``pv'_j = F(pv_j)`` where ``F`` is the CDF of the minimum p-value
over all classes.  Step-down: classes are processed in increasing p-value
order, and the ``i``-th step evaluates the minimum-p CDF of the classes not yet
processed at their smallest observed p-value; adjusted values are the running
maximum of these.

The minimum-p CDF is formed either under independence (``"independence"``)
or from the Bonferroni bound (``"bonferroni"``).

:class:`MinPEngine` is a vectorised equivalent for repeated evaluation on one
fixed set of class laws, as needed inside simulations.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .binomial import ALTERNATIVES, BinomialLaw, pvalue_law, pvalue_table
from .stepcdf import (
    DiscreteCdf,
    combine_bonf,
    combine_ind,
    evaluate,
    from_pvalue_law,
    tabulate,
)

MODES = ("independence", "bonferroni")


@dataclass(frozen=True)
class MinPInput:
    """Per-class exposures, forecast PDs and observed defaults."""

    n: tuple
    pd: tuple
    defaults: tuple
    alternative: str = "two-sided"

    def __post_init__(self):
        n = tuple(int(v) for v in self.n)
        pd = tuple(float(v) for v in self.pd)
        defaults = tuple(int(v) for v in self.defaults)
        if not (len(n) == len(pd) == len(defaults)) or not n:
            raise ValueError("n, pd and defaults must be nonempty and of equal length")
        if self.alternative not in ALTERNATIVES:
            raise ValueError(f"alternative must be one of {ALTERNATIVES}, got {self.alternative!r}")
        for j, (nj, pj, oj) in enumerate(zip(n, pd, defaults)):
            if nj < 1:
                raise ValueError(f"class {j}: exposure must be >= 1, got {nj}")
            if not 0.0 < pj < 1.0:
                raise ValueError(f"class {j}: pd must lie in (0, 1), got {pj}")
            if not 0 <= oj <= nj:
                raise ValueError(f"class {j}: defaults {oj} outside 0..{nj}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "pd", pd)
        object.__setattr__(self, "defaults", defaults)

    def __len__(self) -> int:
        return len(self.n)

    @property
    def laws(self) -> list:
        return [BinomialLaw(nj, pj) for nj, pj in zip(self.n, self.pd)]

    def pvalues(self) -> np.ndarray:
        return np.array(
            [pvalue_table(law, self.alternative)[o] for law, o in zip(self.laws, self.defaults)]
        )


def _combiner(mode: str):
    if mode == "independence":
        return combine_ind
    if mode == "bonferroni":
        return combine_bonf
    raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def class_cdfs(data: MinPInput) -> list:
    """Null CDF of each class's p-value."""
    return [from_pvalue_law(pvalue_law(law, data.alternative)) for law in data.laws]


def minp_cdf(cdfs: Sequence[DiscreteCdf], mode: str = "bonferroni") -> DiscreteCdf:
    return _combiner(mode)(cdfs)


def minp_single_step(data: MinPInput, mode: str = "bonferroni") -> np.ndarray:
    """Single-step Min-P adjusted p-values (d-Ind / d-Bonf)."""
    combine = _combiner(mode)
    full = combine(class_cdfs(data))
    return np.asarray(evaluate(full, data.pvalues()), dtype=float)


def minp_step_down(data: MinPInput, mode: str = "bonferroni") -> np.ndarray:
    """Step-down Min-P adjusted p-values (sd-d-Bonf for ``mode="bonferroni"``).

    Each subset CDF is rebuilt from the class CDFs of the remaining classes.
    """
    combine = _combiner(mode)
    cdfs = class_cdfs(data)
    pv = data.pvalues()
    order = np.argsort(pv, kind="stable")
    adjusted = np.empty(len(pv))
    running = 0.0
    for step, j in enumerate(order):
        remaining = order[step:]
        f_sub = combine([cdfs[i] for i in remaining])
        running = max(running, evaluate(f_sub, pv[remaining].min()))
        adjusted[j] = running
    sorted_adj = _share_ties(pv[order][None, :], adjusted[order][None, :])[0]
    adjusted[order] = sorted_adj
    return adjusted


def _share_ties(sorted_pv: np.ndarray, step: np.ndarray) -> np.ndarray:
    """Give tied raw p-values the largest adjusted value of their tie group.

    Both arrays are ``(R, K)`` in ascending p-value order; the running maximum
    makes the last member of each group its largest.
    """
    step = step.copy()
    for b in range(step.shape[1] - 2, -1, -1):
        tied = sorted_pv[:, b] == sorted_pv[:, b + 1]
        step[tied, b] = step[tied, b + 1]
    return step


class MinPEngine:
    """Min-P adjustments for many default vectors on fixed class laws.

    All class CDFs are tabulated once on the union grid of attainable
    p-values, so each adjustment reduces to table lookups.

    Args:
        n: exposures per class.
        pd: forecast PDs per class.
        alternative: binomial test direction.
    """

    def __init__(self, n: Sequence[int], pd: Sequence[float], alternative: str = "two-sided"):
        self.laws = [BinomialLaw(int(a), float(b)) for a, b in zip(n, pd)]
        if not self.laws:
            raise ValueError("need at least one class")
        self.cdfs = [from_pvalue_law(pvalue_law(law, alternative)) for law in self.laws]
        self.pv_tables = [pvalue_table(law, alternative) for law in self.laws]

    @cached_property
    def _grid(self):
        grid, ys = tabulate(self.cdfs)
        # index of every attainable (class, outcome) p-value on the grid
        idx = [np.searchsorted(grid, t + 1e-15, side="right") - 1 for t in self.pv_tables]
        return grid, ys, idx

    def pvalues(self, defaults: np.ndarray) -> np.ndarray:
        """Raw p-values for a ``(R, K)`` array of default counts."""
        defaults = np.atleast_2d(defaults)
        return np.column_stack([t[defaults[:, j]] for j, t in enumerate(self.pv_tables)])

    def _grid_index(self, defaults: np.ndarray) -> np.ndarray:
        _, _, idx = self._grid
        return np.column_stack([idx[j][defaults[:, j]] for j in range(len(self.laws))])

    def single_step(self, defaults, mode: str = "bonferroni") -> np.ndarray:
        defaults = np.atleast_2d(np.asarray(defaults, dtype=int))
        _, ys, _ = self._grid
        gi = self._grid_index(defaults)
        if mode == "independence":
            full = 1.0 - np.prod(1.0 - ys, axis=0)
        elif mode == "bonferroni":
            full = np.minimum(ys.sum(axis=0), 1.0)
        else:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        return full[gi]

    def step_down(self, defaults, mode: str = "bonferroni") -> np.ndarray:
        defaults = np.atleast_2d(np.asarray(defaults, dtype=int))
        _, ys, _ = self._grid
        r, k = defaults.shape
        pv = self.pvalues(defaults)
        gi = self._grid_index(defaults)
        order = np.argsort(pv, axis=1, kind="stable")
        gi_sorted = np.take_along_axis(gi, order, axis=1)
        # vals[r, a, b] = F_{order[r, a]} at the grid point of the b-th smallest p-value
        vals = ys[order[:, :, None], gi_sorted[:, None, :]]
        # step b only uses classes ranked b or later
        keep = np.tril(np.ones((k, k), dtype=bool))
        if mode == "bonferroni":
            step = np.minimum(np.where(keep, vals, 0.0).sum(axis=1), 1.0)
        elif mode == "independence":
            step = 1.0 - np.where(keep, 1.0 - vals, 1.0).prod(axis=1)
        else:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        step = np.maximum.accumulate(step, axis=1)
        step = _share_ties(np.take_along_axis(pv, order, axis=1), step)
        out = np.empty_like(step)
        np.put_along_axis(out, order, step, axis=1)
        return out
