"""Monte Carlo harness for size/power studies over a (mu, n, c) grid.

Each replication simulates one series, fits the ARMA model at the orders of
the generating process, runs the requested tests on the shared fit, and
records rejections at each level.  Per-replication seeds are derived from
the root seed and the grid position, so results are byte-identical no matter
how replications are scheduled across workers.

Failure policy: replications whose fit fails (or whose simulation explodes)
are excluded from a method's denominator; empirical-likelihood replications
whose moment constraint is infeasible stay in the denominator as
non-rejections (the conservative choice).  All failures are tallied in the
`failures` column.
"""

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from .classic_tests import portmanteau, residual_acf, rw_bootstrap_test
from .el_engine import ElInfeasibleError, profile_el_test, self_weights
from .estimation import DegenerateDesignError, ls_fit, residuals_and_gradient
from .model_core import ArmaSpec, DgpConfig, GarchSpec, SimulationError, simulate
from .stats_util import derive_seed

__all__ = [
    "ExperimentConfig",
    "ExperimentRow",
    "MethodOutcome",
    "run_experiment",
    "run_experiment_detailed",
    "rows_to_csv",
    "rows_from_csv",
    "summarize",
    "write_outputs",
    "resolve_workers",
    "METHODS",
]

METHODS = ("bp", "lb", "rw", "el", "wel")
WORKERS_ENV_VAR = "ELBOX_WORKERS"


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid definition for one study block (one GARCH case, one lag count)."""

    arma: ArmaSpec
    garch: GarchSpec
    mus: tuple
    ns: tuple
    cs: tuple
    m: int
    reps: int
    levels: tuple = (0.10, 0.05)
    methods: tuple = ("rw", "el", "wel")
    bootstrap_B: int = 500
    root_seed: int = 20240801
    burn_in: int = 500

    def __post_init__(self):
        object.__setattr__(self, "mus", tuple(float(v) for v in self.mus))
        object.__setattr__(self, "ns", tuple(int(v) for v in self.ns))
        object.__setattr__(self, "cs", tuple(float(v) for v in self.cs))
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.reps < 100:
            raise ValueError(f"reps must be >= 100, got {self.reps}")
        if not self.mus or not self.ns or not self.cs:
            raise ValueError("mus, ns and cs must be nonempty")
        if any(not 0.0 < lv < 1.0 for lv in self.levels):
            raise ValueError(f"levels must lie in (0, 1), got {self.levels}")
        if any(not math.isfinite(v) for v in self.mus + self.cs):
            raise ValueError("grid values must be finite")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}; choose from {METHODS}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if "rw" in self.methods and self.bootstrap_B < 200:
            raise ValueError(f"bootstrap_B must be >= 200, got {self.bootstrap_B}")

    def cells(self):
        for mu_i, mu in enumerate(self.mus):
            for n_i, n in enumerate(self.ns):
                for c_i, c in enumerate(self.cs):
                    yield (mu_i, n_i, c_i), (mu, n, c)

    def to_dict(self):
        return {
            "arma": {"mu": self.arma.mu, "phi": list(self.arma.phi), "psi": list(self.arma.psi)},
            "garch": {"omega": self.garch.omega, "a": list(self.garch.a), "b": list(self.garch.b)},
            "mus": list(self.mus),
            "ns": list(self.ns),
            "cs": list(self.cs),
            "m": self.m,
            "reps": self.reps,
            "levels": list(self.levels),
            "methods": list(self.methods),
            "bootstrap_B": self.bootstrap_B,
            "root_seed": self.root_seed,
            "burn_in": self.burn_in,
        }

    @classmethod
    def from_dict(cls, data):
        arma = ArmaSpec(
            mu=data["arma"].get("mu", 0.0),
            phi=tuple(data["arma"].get("phi", ())),
            psi=tuple(data["arma"].get("psi", ())),
        )
        garch = GarchSpec(
            omega=data["garch"]["omega"],
            a=tuple(data["garch"].get("a", ())),
            b=tuple(data["garch"].get("b", ())),
        )
        kwargs = {
            key: data[key]
            for key in ("levels", "methods", "bootstrap_B", "root_seed", "burn_in")
            if key in data
        }
        return cls(
            arma=arma,
            garch=garch,
            mus=tuple(data["mus"]),
            ns=tuple(data["ns"]),
            cs=tuple(data["cs"]),
            m=int(data["m"]),
            reps=int(data["reps"]),
            **kwargs,
        )

    @classmethod
    def from_json_file(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class MethodOutcome:
    status: str  # "ok", "el_infeasible", "fit_failure", "error"
    stat: float = math.nan
    p_value: float = math.nan


@dataclass(frozen=True)
class ExperimentRow:
    mu: float
    n: int
    c: float
    method: str
    level: float
    rejection_rate: float
    reps_completed: int
    failures: int


def resolve_workers(workers=None):
    if workers is None:
        env = os.environ.get(WORKERS_ENV_VAR)
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(workers))


def _run_rep(cfg, task):
    """One replication: simulate, fit once, run every requested method."""
    (mu_i, n_i, c_i), rep = task
    mu = cfg.mus[mu_i]
    n = cfg.ns[n_i]
    c = cfg.cs[c_i]
    p, q = cfg.arma.p, cfg.arma.q
    outcomes = {}
    try:
        dgp = DgpConfig(
            arma=replace(cfg.arma, mu=mu),
            garch=cfg.garch,
            c=c,
            n=n,
            burn_in=cfg.burn_in,
            seed=derive_seed(cfg.root_seed, mu_i, n_i, c_i, rep, 0),
        )
        x = simulate(dgp)
        fit = ls_fit(x, p, q)
        if not fit.converged:
            raise DegenerateDesignError("fit did not converge")
    except (ValueError, DegenerateDesignError, SimulationError):
        return task, {meth: MethodOutcome(status="fit_failure") for meth in cfg.methods}

    pack = None
    weights = None
    for meth in cfg.methods:
        try:
            if meth in ("bp", "lb"):
                if pack is None:
                    pack = residuals_and_gradient(fit.theta_hat, x)
                acf = residual_acf(pack.eps, cfg.m)
                rep_out = portmanteau(acf, "BoxPierce" if meth == "bp" else "LjungBox")
                outcomes[meth] = MethodOutcome("ok", rep_out.stat, rep_out.p_value)
            elif meth == "rw":
                rep_out = rw_bootstrap_test(
                    x, fit, cfg.m, cfg.bootstrap_B,
                    seed=derive_seed(cfg.root_seed, mu_i, n_i, c_i, rep, 1),
                )
                outcomes[meth] = MethodOutcome("ok", rep_out.stat, rep_out.p_value)
            elif meth in ("el", "wel"):
                if meth == "wel" and weights is None:
                    weights = self_weights(x)
                out = profile_el_test(
                    x, p, q, cfg.m,
                    mode="EL" if meth == "el" else "WeL",
                    fit=fit,
                    weights=weights if meth == "wel" else None,
                )
                outcomes[meth] = MethodOutcome("ok", out.stat, out.p_value)
        except ElInfeasibleError:
            outcomes[meth] = MethodOutcome(status="el_infeasible")
        except (ValueError, RuntimeError):
            outcomes[meth] = MethodOutcome(status="error")
    return task, outcomes


def _collect(cfg, workers):
    tasks = [(cell, rep) for cell, _ in cfg.cells() for rep in range(cfg.reps)]
    results = {}
    workers = resolve_workers(workers)
    if workers == 1 or len(tasks) == 1:
        for task in tasks:
            key, outcomes = _run_rep(cfg, task)
            results[key] = outcomes
    else:
        chunk = max(1, len(tasks) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for key, outcomes in pool.map(_RepRunner(cfg), tasks, chunksize=chunk):
                results[key] = outcomes
    return results


class _RepRunner:
    """Picklable wrapper binding the config for pool workers."""

    def __init__(self, cfg):
        self.cfg = cfg

    def __call__(self, task):
        return _run_rep(self.cfg, task)


def _aggregate(cfg, results):
    rows = []
    details = {}
    for cell, (mu, n, c) in cfg.cells():
        for meth in cfg.methods:
            per_rep = [results[(cell, rep)][meth] for rep in range(cfg.reps)]
            details.setdefault(cell, {})[meth] = per_rep
            in_denominator = [o for o in per_rep if o.status in ("ok", "el_infeasible")]
            denom = len(in_denominator)
            failures = sum(1 for o in per_rep if o.status != "ok")
            for level in cfg.levels:
                count = sum(
                    1 for o in in_denominator if o.status == "ok" and o.p_value <= level
                )
                rate = count / denom if denom else 0.0
                rows.append(
                    ExperimentRow(
                        mu=mu, n=n, c=c, method=meth, level=level,
                        rejection_rate=rate, reps_completed=denom, failures=failures,
                    )
                )
    return rows, details


def run_experiment(cfg, workers=None):
    """Run the grid and return aggregated rows (deterministic for a fixed
    root seed, independent of the worker count)."""
    results = _collect(cfg, workers)
    rows, _ = _aggregate(cfg, results)
    return rows


def run_experiment_detailed(cfg, workers=None):
    """Like run_experiment, also returning per-replication outcomes keyed by
    grid cell and method (used for distributional checks)."""
    results = _collect(cfg, workers)
    return _aggregate(cfg, results)


_CSV_FIELDS = ("mu", "n", "c", "method", "level", "rate", "reps", "failures")


def rows_to_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CSV_FIELDS)
    for row in rows:
        writer.writerow([
            repr(row.mu), row.n, repr(row.c), row.method, repr(row.level),
            repr(row.rejection_rate), row.reps_completed, row.failures,
        ])
    return buf.getvalue()


def rows_from_csv(text):
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != _CSV_FIELDS:
        raise ValueError(f"unexpected CSV header {header}")
    rows = []
    for rec in reader:
        rows.append(
            ExperimentRow(
                mu=float(rec[0]), n=int(rec[1]), c=float(rec[2]), method=rec[3],
                level=float(rec[4]), rejection_rate=float(rec[5]),
                reps_completed=int(rec[6]), failures=int(rec[7]),
            )
        )
    return rows


@dataclass(frozen=True)
class Summary:
    text: str
    csv: str
    json: str


def summarize(rows, title=None):
    """Render rows as an aligned text table (mu, n, c rows; method x level
    columns, grouped by level as in the study tables), plus CSV and JSON."""
    if not rows:
        raise ValueError("no rows to summarize")
    levels = sorted({row.level for row in rows}, reverse=True)
    methods = []
    for row in rows:
        if row.method not in methods:
            methods.append(row.method)
    cells = []
    for row in rows:
        key = (row.mu, row.n, row.c)
        if key not in cells:
            cells.append(key)
    table = {}
    flagged = set()
    for row in rows:
        table[(row.mu, row.n, row.c, row.method, row.level)] = row
        if row.reps_completed and row.failures > 0.05 * (row.reps_completed + row.failures):
            flagged.add((row.mu, row.n, row.c, row.method))

    header = f"{'mu':>6} {'n':>6} {'c':>6}"
    for level in levels:
        header += " |"
        for meth in methods:
            header += f" {meth + '@' + format(level, 'g'):>9}"
    lines = []
    if title:
        lines.append(title)
    lines.append(header)
    lines.append("-" * len(header))
    for mu, n, c in cells:
        line = f"{mu:>6g} {n:>6d} {c:>6g}"
        for level in levels:
            line += " |"
            for meth in methods:
                row = table.get((mu, n, c, meth, level))
                if row is None:
                    line += f" {'--':>9}"
                else:
                    mark = "!" if (mu, n, c, meth) in flagged else ""
                    line += f" {format(row.rejection_rate, '.3f') + mark:>9}"
        lines.append(line)
    text = "\n".join(lines) + "\n"
    payload = {"title": title, "rows": [asdict(row) for row in rows]}
    return Summary(text=text, csv=rows_to_csv(rows), json=json.dumps(payload, indent=2))


def write_outputs(rows, outdir, config=None, title=None):
    """Write rows.csv and summary.json under outdir; returns the two paths."""
    os.makedirs(outdir, exist_ok=True)
    summary = summarize(rows, title=title)
    csv_path = os.path.join(outdir, "rows.csv")
    json_path = os.path.join(outdir, "summary.json")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(summary.csv)
    payload = json.loads(summary.json)
    if config is not None:
        payload["config"] = config.to_dict()
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return csv_path, json_path
