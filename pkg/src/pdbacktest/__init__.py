"""Validation of credit default probability forecasts with multiple testing procedures."""

from .binomial import BinomialLaw, PValueLaw, binom_pmf, pvalue_law, two_sided_pvalue
from .classical import (
    adjust_abh,
    adjust_bh,
    adjust_bonferroni,
    adjust_by,
    adjust_holm,
    adjust_hommel,
    estimate_m0,
)
from .globaltest import global_reject, hl_exact_test, hl_statistic
from .minp import MinPEngine, MinPInput, minp_single_step, minp_step_down
from .report import AdjustmentReport, build_report
from .stepcdf import DiscreteCdf, combine_bonf, combine_ind, critical_value, evaluate, from_pvalue_law

__version__ = "0.1.0"

__all__ = [
    "AdjustmentReport",
    "BinomialLaw",
    "DiscreteCdf",
    "MinPEngine",
    "MinPInput",
    "PValueLaw",
    "adjust_abh",
    "adjust_bh",
    "adjust_bonferroni",
    "adjust_by",
    "adjust_holm",
    "adjust_hommel",
    "binom_pmf",
    "build_report",
    "combine_bonf",
    "combine_ind",
    "critical_value",
    "estimate_m0",
    "evaluate",
    "from_pvalue_law",
    "global_reject",
    "hl_exact_test",
    "hl_statistic",
    "minp_single_step",
    "minp_step_down",
    "pvalue_law",
    "two_sided_pvalue",
]
