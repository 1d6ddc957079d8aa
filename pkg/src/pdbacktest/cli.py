"""Command line front end.

    pdbacktest validate INPUT.csv [--alpha A] [--methods m1,m2] [--format csv|json] [--hl]
    pdbacktest simulate CONFIG [--format csv|json] [--out FILE]
    pdbacktest power CONFIG [--format csv|json] [--out FILE]
    pdbacktest fixture {table,sp} [--approach duration|cluster] [--year Y]

Exit codes: 0 success, 1 usage or configuration error, 2 invalid input data.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import logging
import sys
from .experiments import ExperimentConfig, run_global_power, run_identification
from .fixtures import UNITS, read_text, sp_sample
from .globaltest import hl_exact_test
from .minp import MinPInput
from .report import DEFAULT_METHODS, METHOD_LABELS, build_report, check_methods

log = logging.getLogger("pdbacktest")

INPUT_COLUMNS = ("class", "label", "n", "pd", "defaults")
CONFIG_REQUIRED = ("sizes", "alternative", "values", "alpha", "n_sim", "seed", "methods")
CONFIG_OPTIONAL = ("rho", "hl_n_sim", "use_fixture", "workers")


class UsageError(Exception):
    """Bad command line or configuration (exit code 1)."""


class DataError(Exception):
    """Invalid validation data (exit code 2)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def read_validation_csv(text: str) -> dict:
    """Parse a validation sample; PDs are converted to probabilities.

    An optional ``units`` column (``prob``, ``bps`` or ``pct``) gives the PD
    unit per row; without it PDs are probabilities.
    """
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    missing = [c for c in INPUT_COLUMNS if c not in header]
    if missing:
        raise DataError(f"line 1: missing column(s) {', '.join(missing)}")
    out = {k: [] for k in INPUT_COLUMNS}
    for row in reader:
        line = reader.line_num
        if None in row or any(row[c] is None for c in INPUT_COLUMNS):
            raise DataError(f"line {line}: wrong number of fields")
        try:
            n = int(row["n"])
            d = int(row["defaults"])
            pd = float(row["pd"])
        except ValueError as exc:
            raise DataError(f"line {line}: {exc}") from None
        unit = (row.get("units") or "prob").strip().lower()
        if unit not in UNITS:
            raise DataError(f"line {line}: unknown units {unit!r}")
        pd *= UNITS[unit]
        if n < 0:
            raise DataError(f"line {line}: n must be >= 0, got {n}")
        if not 0.0 < pd < 1.0:
            raise DataError(f"line {line}: pd must lie in (0, 1), got {pd}")
        if not 0 <= d <= n:
            raise DataError(f"line {line}: defaults {d} outside 0..{n}")
        out["class"].append(row["class"])
        out["label"].append(row["label"])
        out["n"].append(n)
        out["pd"].append(pd)
        out["defaults"].append(d)
    if not out["n"]:
        raise DataError("no data rows")
    return out


def _fmt(v):
    return "" if v is None else repr(float(v))


def report_to_csv(report) -> str:
    buf = io.StringIO()
    if report.hl_pvalue is not None:
        buf.write(f"# hl_pvalue={report.hl_pvalue!r}\n")
    w = csv.writer(buf, lineterminator="\n")
    methods = report.methods
    w.writerow(
        ["class", "label", "n", "pd", "defaults", "pvalue"]
        + methods
        + [f"reject_{m}" for m in methods]
    )
    for i in range(len(report.class_ids)):
        rej = [report.rejected(m)[i] for m in methods]
        w.writerow(
            [report.class_ids[i], report.labels[i], report.n[i], repr(report.pd[i]), report.defaults[i]]
            + [_fmt(report.raw[i])]
            + [_fmt(report.adjusted[m][i]) for m in methods]
            + ["" if r is None else int(r) for r in rej]
        )
    return buf.getvalue()


def _parse_methods(text: str) -> tuple:
    try:
        return check_methods([m for m in text.split(",") if m.strip()])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_validate(args) -> str:
    methods = _parse_methods(args.methods)
    try:
        with open(args.input, encoding="utf-8") as fh:
            data = read_validation_csv(fh.read())
    except OSError as exc:
        raise UsageError(str(exc)) from None
    hl = None
    alternative = "greater" if args.one_sided else "two-sided"
    if args.hl:
        active = [i for i, n in enumerate(data["n"]) if n > 0]
        sample = MinPInput(
            [data["n"][i] for i in active],
            [data["pd"][i] for i in active],
            [data["defaults"][i] for i in active],
        )
        hl = hl_exact_test(sample, n_sim=args.hl_sims, seed=args.seed)
    report = build_report(
        data["class"],
        data["label"],
        data["n"],
        data["pd"],
        data["defaults"],
        alpha=args.alpha,
        methods=methods,
        hl_pvalue=hl,
        alternative=alternative,
    )
    if args.format == "json":
        return report.to_json(indent=2) + "\n"
    return report_to_csv(report)


def load_config(path: str) -> ExperimentConfig:
    """Read a flat ``key = value`` file; lists are comma separated."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_string("[run]\n" + fh.read())
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    raw = dict(parser["run"])
    for key in CONFIG_REQUIRED:
        if key not in raw or not raw[key].strip():
            raise UsageError(f"config is missing required field '{key}'")
    unknown = set(raw) - set(CONFIG_REQUIRED) - set(CONFIG_OPTIONAL)
    if unknown:
        raise UsageError(f"unknown config field(s): {', '.join(sorted(unknown))}")

    def floats(key):
        return [float(v) for v in raw[key].split(",") if v.strip()]

    try:
        kwargs = dict(
            sizes=[int(v) for v in floats("sizes")],
            alternative=raw["alternative"].strip().lower(),
            values=floats("values"),
            alpha=float(raw["alpha"]),
            n_sim=int(raw["n_sim"]),
            seed=int(raw["seed"]),
            methods=[m for m in raw["methods"].split(",") if m.strip()],
        )
        if kwargs["alternative"] == "shift":
            kwargs["values"] = [int(v) for v in kwargs["values"]]
        if "rho" in raw and raw["rho"].strip():
            kwargs["rho"] = float(raw["rho"])
        if "hl_n_sim" in raw:
            kwargs["hl_n_sim"] = int(raw["hl_n_sim"])
        if "workers" in raw:
            kwargs["workers"] = int(raw["workers"])
        if "use_fixture" in raw:
            kwargs["use_fixture"] = parser.getboolean("run", "use_fixture")
        return ExperimentConfig(**kwargs)
    except ValueError as exc:
        raise UsageError(f"invalid config: {exc}") from None


def result_to_csv(result) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n_classes = 14
    w.writerow(
        [
            "method", "label", "n_pf", "alternative", "value", "avg_rejections",
            "avg_rejections_se", "global_reject_freq", "global_reject_se", "fwer", "fdr", "n_sim",
        ]
        + [f"class_{j}" for j in range(1, n_classes + 1)]
    )
    for r in result.rows:
        freq = dict(zip(r.classes, r.class_reject_freq))
        w.writerow(
            [
                r.method, METHOD_LABELS.get(r.method, "HL"), r.n_pf, r.alternative, r.value,
                r.avg_rejections, r.avg_rejections_se, r.global_reject_freq,
                r.global_reject_se, r.fwer, r.fdr, r.n_sim,
            ]
            + [freq.get(j, "") for j in range(1, n_classes + 1)]
        )
    return buf.getvalue()


def _run_study(args, runner) -> str:
    config = load_config(args.config)
    if args.workers:
        config.workers = args.workers
    result = runner(config)
    if args.format == "json":
        return json.dumps(result.to_json_dict(), indent=2) + "\n"
    return result_to_csv(result)


def cmd_simulate(args) -> str:
    return _run_study(args, run_identification)


def cmd_power(args) -> str:
    return _run_study(args, run_global_power)


def sp_validation_csv(approach: str, year: int) -> str:
    """One year of the S&P backtest as a validation input (PDs in bps)."""
    try:
        data = sp_sample(approach, year)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["class", "label", "n", "pd", "units", "defaults"])
    for row in zip(data["class"], data["label"], data["n"], data["pd_raw"], data["units"], data["defaults"]):
        w.writerow(row)
    return buf.getvalue()


def cmd_fixture(args) -> str:
    if args.name == "table":
        return read_text("table_single_realization.csv")
    if args.name == "table-expected":
        return read_text("table_single_realization_expected.csv")
    return sp_validation_csv(args.approach, args.year)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pdbacktest", description="Multiple-testing validation of PD forecasts.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="test a validation sample")
    v.add_argument("input")
    v.add_argument("--alpha", type=float, default=0.05)
    v.add_argument("--methods", default=",".join(DEFAULT_METHODS))
    v.add_argument("--format", choices=("csv", "json"), default="csv")
    v.add_argument("--hl", action="store_true", help="add the Monte Carlo HL p-value")
    v.add_argument("--hl-sims", type=int, default=10_000)
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--one-sided", action="store_true", help="upper-tail binomial tests")
    v.add_argument("--out")
    v.set_defaults(func=cmd_validate)

    for name, func, helptext in (
        ("simulate", cmd_simulate, "rejection rates and average rejections"),
        ("power", cmd_power, "power for the global hypothesis, incl. HL"),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("config")
        s.add_argument("--format", choices=("csv", "json"), default="csv")
        s.add_argument("--workers", type=int, default=0)
        s.add_argument("--out")
        s.set_defaults(func=func)

    f = sub.add_parser("fixture", help="print a bundled data set")
    f.add_argument("name", choices=("table", "table-expected", "sp"))
    f.add_argument("--approach", choices=("duration", "cluster"), default="duration")
    f.add_argument("--year", type=int, default=2008)
    f.add_argument("--out")
    f.set_defaults(func=cmd_fixture)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # usage errors exit 1 via _Parser.error; --help exits 0
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    alpha = getattr(args, "alpha", None)
    if alpha is not None and not 0 < alpha < 1:
        print("pdbacktest: error: alpha must lie in (0, 1)", file=sys.stderr)
        return 1
    try:
        text = args.func(args)
    except UsageError as exc:
        print(f"pdbacktest: error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"pdbacktest: invalid data: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # configuration values rejected by the library
        print(f"pdbacktest: error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
