"""Monte Carlo study of the procedures on the prototype portfolio.

For each portfolio size and alternative (an upgrade-downgrade shift or a
dispersion bandwidth) the misclassification matrix is built once, defaults are
simulated from the true PDs, and every procedure tests the forecast PDs of the
assigned classes.

Shift labels are the negated formula shift: label ``s`` maps to
``upgrade_downgrade_matrix(counts, -s)``, so ``s = -3`` moves every borrower
three grades toward the low-PD end (the reference N=300 example).

Replication ``r`` draws from its own stream ``SeedSequence(seed, spawn_key=(r,))``
so results do not depend on the number of workers; the same stream is reused at
every grid point (common random numbers).
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .depfactor import one_factor_counts
from .globaltest import hl_null_sample, hl_statistics, mc_pvalue
from .minp import MinPEngine
from .portfolio import (
    assigned_sample,
    build_portfolio,
    dispersion_matrix,
    fixture_counts_300,
    prototype_spec,
    upgrade_downgrade_matrix,
)
from .report import DEFAULT_METHODS, METHOD_LABELS, adjust_many, check_methods

log = logging.getLogger(__name__)

ALTERNATIVES = ("shift", "dispersion")
#: replications handled per task; fixed so chunking never changes results
CHUNK = 1000
# distinct spawn key for the shared HL reference sample
_HL_STREAM = 2**31 - 1


@dataclass
class ExperimentConfig:
    """Settings of a simulation run.

    Attributes:
        sizes: portfolio sizes N_PF.
        alternative: ``"shift"`` or ``"dispersion"``.
        values: shift labels or bandwidths h.
        alpha: multiple level.
        n_sim: replications per grid point.
        seed: base seed.
        methods: procedure keys (see ``report.METHOD_LABELS``).
        hl_n_sim: size of the simulated HL null sample per grid point.
        use_fixture: take the reference N=300 portfolio instead of the quota
            allocation when N=300.
        rho: if set, simulate defaults from the one-factor model.
        workers: process count; 1 runs inline.
    """

    sizes: list = field(default_factory=lambda: [300])
    alternative: str = "shift"
    values: list = field(default_factory=lambda: [0])
    alpha: float = 0.05
    n_sim: int = 10_000
    seed: int = 20100101
    methods: list = field(default_factory=lambda: list(DEFAULT_METHODS))
    hl_n_sim: int = 2000
    use_fixture: bool = True
    rho: float | None = None
    workers: int = 1

    def __post_init__(self):
        if self.alternative not in ALTERNATIVES:
            raise ValueError(f"alternative must be one of {ALTERNATIVES}, got {self.alternative!r}")
        if int(self.n_sim) < 1:
            raise ValueError(f"n_sim must be >= 1, got {self.n_sim}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.sizes or any(int(n) < 1 for n in self.sizes):
            raise ValueError("sizes must be a nonempty list of positive integers")
        if not self.values:
            raise ValueError("values must be nonempty")
        if self.alternative == "shift" and any(v != int(v) or abs(v) > 5 for v in self.values):
            raise ValueError("shift values must be integers in [-5, 5]")
        if self.alternative == "dispersion" and any(v < 0 for v in self.values):
            raise ValueError("dispersion values must be >= 0")
        if self.rho is not None and not 0 < self.rho < 1:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")
        if self.hl_n_sim < 1:
            raise ValueError("hl_n_sim must be >= 1")
        self.methods = list(check_methods(self.methods))
        self.sizes = [int(n) for n in self.sizes]
        self.n_sim = int(self.n_sim)


@dataclass
class GridResult:
    """Aggregates for one (method, N_PF, alternative value) cell."""

    method: str
    n_pf: int
    alternative: str
    value: float
    classes: list
    class_reject_freq: list
    avg_rejections: float
    avg_rejections_se: float
    global_reject_freq: float
    global_reject_se: float
    fwer: float
    fdr: float
    n_sim: int

    @property
    def label(self) -> str:
        return METHOD_LABELS.get(self.method, self.method.upper())


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list

    def get(self, method: str, n_pf: int | None = None, value=None) -> GridResult:
        for r in self.rows:
            if r.method == method and (n_pf is None or r.n_pf == n_pf) and (
                value is None or r.value == value
            ):
                return r
        raise KeyError((method, n_pf, value))

    def to_records(self) -> list:
        return [asdict(r) for r in self.rows]

    def to_json_dict(self) -> dict:
        return {"config": asdict(self.config), "rows": self.to_records()}


def scenario_matrix(n_pf: int, alternative: str, value, use_fixture: bool = True) -> np.ndarray:
    """Misclassification matrix of one grid point."""
    if use_fixture and n_pf == 300:
        counts = fixture_counts_300()
    else:
        counts = build_portfolio(prototype_spec(), n_pf)
    if alternative == "shift":
        return upgrade_downgrade_matrix(counts, -int(value))
    return dispersion_matrix(counts, float(value))


def true_nulls(matrix: np.ndarray, classes) -> np.ndarray:
    """True where the assigned class holds only borrowers from that same true class."""
    mat = np.asarray(matrix)
    cols = np.asarray(classes) - 1
    off_diag = mat[:, cols].sum(axis=0) - mat[cols, cols]
    return off_diag == 0


def _simulate_chunk(args):
    matrix, true_pds, reps, seed, rho = args
    cells = np.argwhere(matrix > 0)
    cell_n = matrix[cells[:, 0], cells[:, 1]]
    cell_p = true_pds[cells[:, 0]]
    k = matrix.shape[1]
    out = np.zeros((len(reps), k), dtype=int)
    for row, r in enumerate(reps):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(int(r),)))
        if rho is None:
            draws = rng.binomial(cell_n, cell_p)
        else:
            draws = one_factor_counts(cell_n, cell_p, rho, rng, 1)[0]
        np.add.at(out[row], cells[:, 1], draws)
    return out


def simulate_defaults(matrix, true_pds, n_sim: int, seed: int, rho=None, workers: int = 1):
    """``(n_sim, K)`` default counts per assigned class."""
    matrix = np.asarray(matrix, dtype=np.int64)
    true_pds = np.asarray(true_pds, dtype=float)
    tasks = [
        (matrix, true_pds, range(s, min(n_sim, s + CHUNK)), seed, rho)
        for s in range(0, n_sim, CHUNK)
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_simulate_chunk, tasks))
    else:
        parts = [_simulate_chunk(t) for t in tasks]
    return np.concatenate(parts, axis=0)


def _run_grid(config: ExperimentConfig, with_hl: bool) -> list:
    spec = prototype_spec()
    rows = []
    for n_pf in config.sizes:
        for value in config.values:
            matrix = scenario_matrix(n_pf, config.alternative, value, config.use_fixture)
            classes, n_hat, pd = assigned_sample(matrix, spec.true_pds)
            defaults = simulate_defaults(
                matrix, spec.true_pds, config.n_sim, config.seed, config.rho, config.workers
            )[:, classes - 1]
            engine = MinPEngine(n_hat, pd)
            adjusted = adjust_many(engine, defaults, config.methods)
            is_null = true_nulls(matrix, classes)
            log.info("N=%d %s=%s: %d classes", n_pf, config.alternative, value, len(classes))
            decisions = {m: a <= config.alpha for m, a in adjusted.items()}
            if with_hl:
                rng = np.random.default_rng(
                    np.random.SeedSequence(config.seed, spawn_key=(_HL_STREAM,))
                )
                null = hl_null_sample(n_hat, pd, config.hl_n_sim, rng)
                hl_p = mc_pvalue(hl_statistics(n_hat, pd, defaults), null)
                hl_dec = (hl_p <= config.alpha)[:, None] & np.ones(len(classes), dtype=bool)
                decisions["hl"] = hl_dec
            for m, dec in decisions.items():
                rows.append(_aggregate(m, n_pf, config, value, classes, dec, is_null))
    return rows


def _aggregate(method, n_pf, config, value, classes, dec, is_null) -> GridResult:
    n = dec.shape[0]
    count = dec.sum(axis=1)
    any_rej = dec.any(axis=1)
    false = (dec & is_null).sum(axis=1)
    glob = float(any_rej.mean())
    return GridResult(
        method=method,
        n_pf=n_pf,
        alternative=config.alternative,
        value=float(value),
        classes=[int(c) for c in classes],
        class_reject_freq=[float(v) for v in dec.mean(axis=0)],
        avg_rejections=float(count.mean()),
        avg_rejections_se=float(count.std(ddof=1) / np.sqrt(n)) if n > 1 else float("nan"),
        global_reject_freq=glob,
        global_reject_se=float(np.sqrt(glob * (1 - glob) / n)),
        fwer=float((false > 0).mean()),
        fdr=float((false / np.maximum(count, 1)).mean()),
        n_sim=n,
    )


def run_identification(config: ExperimentConfig) -> ExperimentResult:
    """Per-class rejection rates and average rejection counts for every method."""
    return ExperimentResult(config, _run_grid(config, with_hl=False))


def run_global_power(config: ExperimentConfig) -> ExperimentResult:
    """Probability of rejecting the global hypothesis, MTPs and the exact HL test.

    The HL decision compares each replication's statistic with one simulated
    null sample of size ``hl_n_sim`` per grid point (method key ``"hl"``).
    """
    return ExperimentResult(config, _run_grid(config, with_hl=True))
