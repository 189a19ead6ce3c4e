"""Command-line front door: ingest a CSV series, run adequacy tests at a
chosen (p, q, m), run condition diagnostics, or drive a simulation study.

Subcommands
-----------
test            fit once, evaluate any subset of {bp, lb, rw, el, wel}
simulate-study  run a size/power grid from a JSON config
diagnose        ARCH-LM screen, weight-moment proxy, Lyapunov exponent

Exit codes: 0 success (whatever the test decisions), 1 bad request,
2 model fit failure.
"""

import argparse
import csv as csv_module
import io
import json
import math
import sys
from dataclasses import dataclass

from .classic_tests import portmanteau, residual_acf, rw_bootstrap_test
from .diagnostics import arch_lm, lyapunov_exponent, weight_moment_check, weight_moment_terms
from .el_engine import ElInfeasibleError, profile_el_test, self_weights
from .estimation import DegenerateDesignError, ls_fit, residuals_and_gradient
from .mc_harness import ExperimentConfig, METHODS, run_experiment, summarize, write_outputs
from .model_core import GarchSpec, TimeSeries
from .stats_util import derive_seed

__all__ = ["RunConfig", "ingest_csv", "run_tests", "main"]

_STAR_LEVELS = ((0.01, "***"), (0.05, "**"), (0.10, "*"))


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class RunConfig:
    """Validated request for the `test` subcommand."""

    input: str
    column: object = 0
    transform: str = "none"
    p: int = 1
    q: int = 1
    m: int = 2
    tests: tuple = ("lb", "el", "wel")
    levels: tuple = (0.10, 0.05)
    seed: int = 0
    output_format: str = "text"
    rw_B: int = 500

    def __post_init__(self):
        if not self.tests:
            raise CliError(1, "at least one test must be selected")
        unknown = set(self.tests) - set(METHODS)
        if unknown:
            raise CliError(1, f"unknown tests {sorted(unknown)}; choose from {METHODS}")
        if self.m < 1:
            raise CliError(1, f"m must be >= 1, got {self.m}")
        if self.p < 0 or self.q < 0:
            raise CliError(1, "orders must be nonnegative")
        if self.transform not in ("none", "log_return"):
            raise CliError(1, f"unknown transform {self.transform!r}")
        if self.output_format not in ("text", "json", "csv"):
            raise CliError(1, f"unknown format {self.output_format!r}")


def _fmt12(x):
    """Round-trip a float through 12 significant digits (report precision)."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return None
    return float(f"{x:.12g}")


def _stars(p_value):
    for threshold, mark in _STAR_LEVELS:
        if p_value < threshold:
            return mark
    return ""


def ingest_csv(path, column=0, transform="none"):
    """Parse one numeric column of a CSV file into a TimeSeries.

    A header row is auto-detected (first row with a non-numeric cell);
    `column` may be a 0-based index or a header name.  `log_return` maps
    prices to ln(P_t / P_{t-1}), shortening the series by one; nonpositive
    prices and non-numeric cells raise with the offending file row number.
    """
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            records = [row for row in csv_module.reader(fh) if row]
    except OSError as exc:
        raise CliError(1, f"cannot read {path!r}: {exc}") from exc
    if not records:
        raise CliError(1, f"{path!r} is empty")

    def is_number(cell):
        try:
            float(cell)
            return True
        except ValueError:
            return False

    has_header = any(not is_number(cell) for cell in records[0])
    names = [cell.strip() for cell in records[0]] if has_header else None
    if isinstance(column, str) and column.strip().lstrip("-").isdigit():
        column = int(column)
    if isinstance(column, str):
        if names is None or column not in names:
            raise CliError(1, f"column {column!r} not found (header: {names})")
        col_idx = names.index(column)
    else:
        col_idx = int(column)

    data_rows = records[1:] if has_header else records
    first_row_number = 2 if has_header else 1
    values = []
    for offset, row in enumerate(data_rows):
        row_number = first_row_number + offset
        if col_idx >= len(row):
            raise CliError(1, f"row {row_number} has no column {col_idx}")
        cell = row[col_idx]
        try:
            values.append(float(cell))
        except ValueError:
            raise CliError(1, f"non-numeric cell {cell!r} at row {row_number}") from None

    if transform == "log_return":
        out = []
        for offset in range(1, len(values)):
            prev, cur = values[offset - 1], values[offset]
            if prev <= 0 or cur <= 0:
                bad = first_row_number + (offset if cur <= 0 else offset - 1)
                raise CliError(1, f"nonpositive price at row {bad} under log_return")
            out.append(math.log(cur / prev))
        values = out
    elif transform != "none":
        raise CliError(1, f"unknown transform {transform!r}")
    if len(values) < 30:
        raise CliError(1, f"need at least 30 observations after transform, got {len(values)}")
    return TimeSeries(values)


def run_tests(cfg):
    """Fit once and evaluate every selected test on the shared fit.

    Returns the report bundle as a dict with the stable shape
    {series: {n, transform}, fit: {theta, converged}, tests: [...]};
    numeric fields are rounded to 12 significant digits.
    """
    x = ingest_csv(cfg.input, cfg.column, cfg.transform)
    try:
        fit = ls_fit(x, cfg.p, cfg.q)
    except (ValueError, DegenerateDesignError) as exc:
        raise CliError(2, f"model fit failed: {exc}") from exc
    if not fit.converged:
        raise CliError(2, f"model fit did not converge (score norm {fit.score_norm:.3e})")

    pack = residuals_and_gradient(fit.theta_hat, x)
    entries = []
    for meth in (m for m in METHODS if m in cfg.tests):
        try:
            if meth in ("bp", "lb"):
                acf = residual_acf(pack.eps, cfg.m)
                report = portmanteau(acf, "BoxPierce" if meth == "bp" else "LjungBox")
                stat, p_value = report.stat, report.p_value
            elif meth == "rw":
                report = rw_bootstrap_test(
                    x, fit, cfg.m, cfg.rw_B, seed=derive_seed(cfg.seed, 1)
                )
                stat, p_value = report.stat, report.p_value
            else:
                out = profile_el_test(
                    x, cfg.p, cfg.q, cfg.m,
                    mode="EL" if meth == "el" else "WeL",
                    fit=fit,
                )
                stat, p_value = out.stat, out.p_value
            entries.append({
                "name": meth, "m": cfg.m,
                "stat": _fmt12(stat), "p_value": _fmt12(p_value),
            })
        except ElInfeasibleError as exc:
            entries.append({
                "name": meth, "m": cfg.m, "stat": None, "p_value": None,
                "failed": str(exc),
            })

    theta = fit.theta_hat
    return {
        "series": {"n": len(x), "transform": cfg.transform},
        "fit": {
            "theta": {
                "mu": _fmt12(theta.mu),
                "phi": [_fmt12(v) for v in theta.phi],
                "psi": [_fmt12(v) for v in theta.psi],
            },
            "converged": fit.converged,
        },
        "tests": entries,
    }


def _render_tests_text(bundle):
    lines = []
    series = bundle["series"]
    theta = bundle["fit"]["theta"]
    lines.append(f"series: n={series['n']} transform={series['transform']}")
    lines.append(
        "fit: mu={:.6g} phi=[{}] psi=[{}] converged={}".format(
            theta["mu"],
            ", ".join(f"{v:.6g}" for v in theta["phi"]),
            ", ".join(f"{v:.6g}" for v in theta["psi"]),
            bundle["fit"]["converged"],
        )
    )
    lines.append(f"{'test':>6} {'m':>3} {'stat':>14} {'p_value':>12}  signif")
    for entry in bundle["tests"]:
        if entry.get("failed"):
            lines.append(f"{entry['name']:>6} {entry['m']:>3} {'failed':>14} {'--':>12}  ({entry['failed']})")
        else:
            lines.append(
                f"{entry['name']:>6} {entry['m']:>3} {entry['stat']:>14.6g} "
                f"{entry['p_value']:>12.6g}  {_stars(entry['p_value'])}"
            )
    lines.append("signif codes: * p<0.1, ** p<0.05, *** p<0.01")
    return "\n".join(lines) + "\n"


def _render_tests_csv(bundle):
    buf = io.StringIO()
    writer = csv_module.writer(buf, lineterminator="\n")
    writer.writerow(["name", "m", "stat", "p_value", "signif"])
    for entry in bundle["tests"]:
        if entry.get("failed"):
            writer.writerow([entry["name"], entry["m"], "", "", "failed"])
        else:
            writer.writerow([
                entry["name"], entry["m"],
                f"{entry['stat']:.12g}", f"{entry['p_value']:.12g}",
                _stars(entry["p_value"]),
            ])
    return buf.getvalue()


def _cmd_test(args):
    tests = tuple(t for t in (s.strip() for s in args.tests.split(",")) if t)
    cfg = RunConfig(
        input=args.input, column=args.column, transform=args.transform,
        p=args.p, q=args.q, m=args.m, tests=tests, seed=args.seed,
        output_format=args.format, rw_B=args.rw_B,
    )
    bundle = run_tests(cfg)
    if cfg.output_format == "json":
        sys.stdout.write(json.dumps(bundle, indent=2) + "\n")
    elif cfg.output_format == "csv":
        sys.stdout.write(_render_tests_csv(bundle))
    else:
        sys.stdout.write(_render_tests_text(bundle))
    return 0


def _cmd_simulate_study(args):
    cfg = ExperimentConfig.from_json_file(args.config)
    if args.reps is not None:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "reps": args.reps})
    if args.seed is not None:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "root_seed": args.seed})
    rows = run_experiment(cfg, workers=args.workers)
    title = (
        f"(a,b)=({','.join(format(v, 'g') for v in cfg.garch.a)};"
        f"{','.join(format(v, 'g') for v in cfg.garch.b)}) m={cfg.m} reps={cfg.reps}"
    )
    if args.out:
        write_outputs(rows, args.out, config=cfg, title=title)
    sys.stdout.write(summarize(rows, title=title).text)
    return 0


def _cmd_diagnose(args):
    x = ingest_csv(args.input, args.column, args.transform)
    xv = x.values
    centered = xv - xv.mean()
    report = {}
    lm = arch_lm(centered, args.arch_lags)
    report["arch_lm"] = {
        "lags": lm.m, "stat": _fmt12(lm.stat), "p_value": _fmt12(lm.p_value),
    }
    w = self_weights(x)
    terms = weight_moment_terms(x, w)
    full = float(terms.mean())
    last_half = float(terms[terms.size // 2:].mean())
    gap = abs(last_half - full) / full if full > 0 else math.inf
    report["weight_moment"] = {
        "mean": _fmt12(weight_moment_check(x, w)),
        "last_half_mean": _fmt12(last_half),
        "relative_gap": _fmt12(gap),
        "stable": bool(gap <= 0.20),
        "m_x": _fmt12(w.m_x),
    }
    if args.lyapunov:
        try:
            a_str, b_str = args.lyapunov.split(",")
            garch = GarchSpec(omega=1.0, a=(float(a_str),), b=(float(b_str),))
        except ValueError as exc:
            raise CliError(1, f"--lyapunov expects 'a,b', got {args.lyapunov!r}") from exc
        est = lyapunov_exponent(garch, seed=args.seed)
        report["lyapunov"] = {
            "a": float(a_str), "b": float(b_str),
            "nu_star_hat": _fmt12(est.nu_star_hat),
            "std_err": _fmt12(est.std_err),
            "T": est.T, "reps": est.reps,
            "strictly_stationary": bool(est.nu_star_hat < 0),
        }
    if args.format == "json":
        sys.stdout.write(json.dumps(report, indent=2) + "\n")
    else:
        lines = [f"arch_lm: lags={lm.m} stat={lm.stat:.6g} p_value={lm.p_value:.6g} {_stars(lm.p_value)}"]
        wm = report["weight_moment"]
        lines.append(
            f"weight_moment: mean={wm['mean']:.6g} last_half={wm['last_half_mean']:.6g} "
            f"gap={wm['relative_gap']:.3g} stable={wm['stable']}"
        )
        if "lyapunov" in report:
            ly = report["lyapunov"]
            lines.append(
                f"lyapunov(a={ly['a']:g}, b={ly['b']:g}): nu*={ly['nu_star_hat']:.6g} "
                f"se={ly['std_err']:.3g} stationary={ly['strictly_stationary']}"
            )
        sys.stdout.write("\n".join(lines) + "\n")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="elbox",
        description="Portmanteau adequacy tests for ARMA models with possibly "
                    "heavy-tailed GARCH errors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="run adequacy tests on a CSV series")
    t.add_argument("--input", required=True, help="CSV file with the series")
    t.add_argument("--column", default="0", help="column index or header name (default: 0)")
    t.add_argument("--transform", choices=("none", "log_return"), default="none")
    t.add_argument("--p", type=int, default=1, help="AR order (default 1)")
    t.add_argument("--q", type=int, default=1, help="MA order (default 1)")
    t.add_argument("--m", type=int, default=2, help="number of tested lags (default 2)")
    t.add_argument("--tests", default="lb,el,wel",
                   help="comma list from {bp,lb,rw,el,wel} (default lb,el,wel)")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--format", choices=("text", "json", "csv"), default="text")
    t.add_argument("--rw-B", dest="rw_B", type=int, default=500,
                   help="bootstrap replicates for the rw test (default 500)")
    t.set_defaults(func=_cmd_test)

    s = sub.add_parser("simulate-study", help="run a size/power study from a JSON config")
    s.add_argument("--config", required=True, help="ExperimentConfig JSON file")
    s.add_argument("--out", default=None, help="output directory for rows.csv and summary.json")
    s.add_argument("--reps", type=int, default=None, help="override replication count")
    s.add_argument("--seed", type=int, default=None, help="override the root seed")
    s.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: ELBOX_WORKERS env var or CPU count)")
    s.set_defaults(func=_cmd_simulate_study)

    d = sub.add_parser("diagnose", help="condition diagnostics for a CSV series")
    d.add_argument("--input", required=True)
    d.add_argument("--column", default="0")
    d.add_argument("--transform", choices=("none", "log_return"), default="none")
    d.add_argument("--arch-lags", dest="arch_lags", type=int, default=4)
    d.add_argument("--lyapunov", default=None, metavar="A,B",
                   help="estimate the Lyapunov exponent for GARCH(1,1) coefficients a,b")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--format", choices=("text", "json"), default="text")
    d.set_defaults(func=_cmd_diagnose)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
