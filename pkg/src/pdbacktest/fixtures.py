"""Bundled data sets: the ten-class worked example and the S&P rating backtests.

S&P PDs are stored in basis points (``units`` column) and converted to
probabilities on loading.  ``flags`` lists the procedures that flagged a class,
by their position in :data:`pdbacktest.report.DEFAULT_METHODS` counted from 1,
written like ``"1--8"`` or ``"4,5,8"``.
"""

from __future__ import annotations

import csv
import io
from importlib import resources

APPROACHES = ("cluster", "duration")
UNITS = {"prob": 1.0, "bps": 1e-4, "pct": 1e-2}


def read_text(name: str) -> str:
    return resources.files("pdbacktest.data").joinpath(name).read_text(encoding="utf-8")


def _rows(name: str) -> list:
    return list(csv.DictReader(io.StringIO(read_text(name))))


def parse_flags(text: str) -> set:
    """``"1--3,6"`` -> ``{1, 2, 3, 6}``."""
    out = set()
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "--" in part:
            lo, hi = part.split("--")
            out.update(range(int(lo), int(hi) + 1))
        else:
            out.add(int(part))
    return out


def table_sample() -> dict:
    """Columns of the ten-class worked example (PDs as probabilities)."""
    rows = _rows("table_single_realization.csv")
    return {
        "class": [r["class"] for r in rows],
        "label": [r["label"] for r in rows],
        "n": [int(r["n"]) for r in rows],
        "pd": [float(r["pd"]) for r in rows],
        "defaults": [int(r["defaults"]) for r in rows],
    }


def table_expected() -> dict:
    """Reference adjusted p-values of the worked example, keyed by row name."""
    rows = list(csv.reader(io.StringIO(read_text("table_single_realization_expected.csv"))))
    header = rows[0][1:]
    return {r[0]: dict(zip(header, map(float, r[1:]))) for r in rows[1:]}


def sp_years(approach: str) -> list:
    _check(approach)
    return sorted({int(r["year"]) for r in _rows(f"sp_{approach}.csv")})


def sp_sample(approach: str, year: int) -> dict:
    """One year of one S&P table, PDs converted to probabilities."""
    _check(approach)
    rows = [r for r in _rows(f"sp_{approach}.csv") if int(r["year"]) == year]
    if not rows:
        raise KeyError(f"no S&P data for {approach} {year}")
    return {
        "class": [r["class"] for r in rows],
        "label": [r["label"] for r in rows],
        "n": [int(r["n"]) for r in rows],
        "pd": [float(r["pd"]) * UNITS[r["units"]] for r in rows],
        "pd_raw": [r["pd"] for r in rows],
        "units": [r["units"] for r in rows],
        "defaults": [int(r["defaults"]) for r in rows],
        "flags": [parse_flags(r["flags"]) for r in rows],
    }


def sp_hl_pvalues() -> dict:
    """Reference HL p-values keyed by ``(approach, year)``."""
    return {(r["approach"], int(r["year"])): float(r["hl_pvalue"]) for r in _rows("sp_hl_pvalues.csv")}


def _check(approach):
    if approach not in APPROACHES:
        raise ValueError(f"approach must be one of {APPROACHES}, got {approach!r}")
