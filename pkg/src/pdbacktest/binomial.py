"""Binomial kernels and the exact two-sided binomial test.

The two-sided p-value is the "minimum likelihood" variant: the total mass of
all outcomes that are at most as likely as the observed one.  A small relative
tolerance absorbs floating point noise when comparing likelihoods.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

#: relative tolerance used when deciding whether an outcome is "as likely"
LIKELIHOOD_RTOL = 1e-7

ALTERNATIVES = ("two-sided", "greater", "less")


@dataclass(frozen=True)
class BinomialLaw:
    """Bin(n, p) law of the default count of one rating class."""

    n: int
    p: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"n must be a nonnegative integer, got {self.n!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "p", float(self.p))

    def pmf(self) -> np.ndarray:
        """Masses for k = 0..n as a read-only array."""
        return _pmf_vector(self.n, self.p)

    def cdf(self) -> np.ndarray:
        return np.minimum(np.cumsum(self.pmf()), 1.0)


@dataclass(frozen=True)
class PValueLaw:
    """Null distribution of a discrete p-value.

    Attributes:
        support: strictly increasing attainable p-values.
        mass: probability of each support point.
    """

    support: np.ndarray
    mass: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=float)
        mass = np.asarray(self.mass, dtype=float)
        if support.ndim != 1 or support.shape != mass.shape or support.size == 0:
            raise ValueError("support and mass must be nonempty 1-d arrays of equal length")
        if np.any(np.diff(support) <= 0):
            raise ValueError("support must be strictly increasing")
        if support[0] <= 0 or support[-1] > 1:
            raise ValueError("support must lie in (0, 1]")
        if abs(mass.sum() - 1.0) > 1e-12:
            raise ValueError(f"masses sum to {mass.sum()!r}, expected 1")
        support.flags.writeable = False
        mass.flags.writeable = False
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "mass", mass)

    def cdf(self, x: float) -> float:
        """P(PV <= x)."""
        idx = np.searchsorted(self.support, x, side="right")
        return float(self.mass[:idx].sum())


def _log_pmf(n: int, p: float, k: np.ndarray) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if p == 0.0:
        return np.where(k == 0, 0.0, -np.inf)
    if p == 1.0:
        return np.where(k == n, 0.0, -np.inf)
    log_choose = gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)
    return log_choose + k * np.log(p) + (n - k) * np.log1p(-p)


@lru_cache(maxsize=4096)
def _pmf_vector(n: int, p: float) -> np.ndarray:
    out = np.exp(_log_pmf(n, p, np.arange(n + 1)))
    out.flags.writeable = False
    return out


@lru_cache(maxsize=4096)
def _pvalue_vector(n: int, p: float, alternative: str = "two-sided") -> np.ndarray:
    if alternative == "greater":
        pv = np.minimum(np.cumsum(_pmf_vector(n, p)[::-1])[::-1], 1.0)
    elif alternative == "less":
        pv = np.minimum(np.cumsum(_pmf_vector(n, p)), 1.0)
    elif alternative == "two-sided":
        pv = _two_sided_vector(n, p)
    else:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}, got {alternative!r}")
    # outcomes whose mass underflows still get a positive p-value
    pv = np.maximum(pv, np.finfo(float).tiny)
    pv.flags.writeable = False
    return pv


def _two_sided_vector(n: int, p: float) -> np.ndarray:
    # Cumulating the masses in ascending likelihood order gives, for every
    # outcome, the mass of all outcomes at most as likely.  Outcomes tied in
    # likelihood therefore get bit-identical p-values.
    pmf = _pmf_vector(n, p)
    order = np.argsort(pmf, kind="stable")
    sorted_pmf = pmf[order]
    cum = np.cumsum(sorted_pmf)
    last = np.searchsorted(sorted_pmf, pmf * (1.0 + LIKELIHOOD_RTOL), side="right") - 1
    pv = np.minimum(cum[last], 1.0)
    # the most likely outcome always collects the whole mass
    pv[pmf * (1.0 + LIKELIHOOD_RTOL) >= pmf.max()] = 1.0
    return pv


def _check_outcome(law: BinomialLaw, k) -> int:
    if int(k) != k or not 0 <= k <= law.n:
        raise ValueError(f"outcome {k!r} outside 0..{law.n}")
    return int(k)


def binom_pmf(law: BinomialLaw, k: int) -> float:
    """P(X = k) for X ~ law, evaluated in log space."""
    k = _check_outcome(law, k)
    return float(np.exp(_log_pmf(law.n, law.p, np.array([k]))[0]))


def two_sided_pvalue(law: BinomialLaw, x: int) -> float:
    """Exact two-sided binomial p-value of observing ``x`` successes.

    Sums the masses of all outcomes ``k`` with
    ``pmf(k) <= pmf(x) * (1 + 1e-7)``; the result is capped at 1.
    """
    x = _check_outcome(law, x)
    return float(_pvalue_vector(law.n, law.p)[x])


def pvalue_table(law: BinomialLaw, alternative: str = "two-sided") -> np.ndarray:
    """p-values of every outcome 0..n, indexed by outcome."""
    return _pvalue_vector(law.n, law.p, alternative)


def one_sided_pvalue(law: BinomialLaw, x: int, alternative: str = "greater") -> float:
    """Tail p-value: P(X >= x) for ``"greater"`` (PD underestimated), P(X <= x) for ``"less"``."""
    x = _check_outcome(law, x)
    if alternative not in ("greater", "less"):
        raise ValueError(f"one-sided alternative must be 'greater' or 'less', got {alternative!r}")
    return float(_pvalue_vector(law.n, law.p, alternative)[x])


def pvalue_law(law: BinomialLaw, alternative: str = "two-sided") -> PValueLaw:
    """Null distribution of the binomial test p-value under ``law``.

    Outcomes sharing a p-value are merged and their masses added.
    """
    pv = _pvalue_vector(law.n, law.p, alternative)
    pmf = _pmf_vector(law.n, law.p)
    support, inverse = np.unique(pv, return_inverse=True)
    mass = np.bincount(inverse, weights=pmf, minlength=support.size)
    # zero-mass points (p in {0, 1}) are not attainable
    keep = mass > 0
    support, mass = support[keep], mass[keep]
    return PValueLaw(support, mass / mass.sum())
