"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The Monte Carlo fixtures share 1000-replication grids over the studied
data-generating processes; every per-replication seed derives from the fixed
root seeds below, so the whole suite is reproducible run to run and across
worker counts.
"""

import math
import time

import numpy as np
import pytest
import scipy.stats

from elbox.diagnostics import lyapunov_exponent
from elbox.el_engine import dual_solve
from elbox.estimation import residuals_and_gradient
from elbox.mc_harness import (
    ExperimentConfig,
    resolve_workers,
    rows_to_csv,
    run_experiment,
    run_experiment_detailed,
)
from elbox.model_core import ArmaSpec, GarchSpec, check_stationarity
from elbox.stats_util import derive_seed, spawn_rng

PAPER_ARMA = ArmaSpec(0.0, (0.3,), (0.4,))
GARCH_FINITE = GarchSpec(0.2, (0.1,), (0.15,))
GARCH_INFINITE = GarchSpec(0.2, (0.33,), (0.66,))
REPS = 1000
ROOT = 20250810


def _study(garch, cs, m, methods, root, bootstrap_B=500):
    return ExperimentConfig(
        arma=PAPER_ARMA,
        garch=garch,
        mus=(0.0,),
        ns=(400,),
        cs=cs,
        m=m,
        reps=REPS,
        levels=(0.10, 0.05),
        methods=methods,
        bootstrap_B=bootstrap_B,
        root_seed=root,
    )


def _timed_detailed(cfg):
    start = time.time()
    rows, details = run_experiment_detailed(cfg)
    return rows, details, time.time() - start


@pytest.fixture(scope="module")
def fin_m2():
    cfg = _study(GARCH_FINITE, (0.0, 5.0, 10.0, 15.0), 2, ("el", "wel"), ROOT + 1)
    return _timed_detailed(cfg)


@pytest.fixture(scope="module")
def fin_m2_rw():
    cfg = _study(GARCH_FINITE, (0.0,), 2, ("rw",), ROOT + 2)
    return _timed_detailed(cfg)


@pytest.fixture(scope="module")
def inf_m2():
    cfg = _study(GARCH_INFINITE, (0.0,), 2, ("el", "wel"), ROOT + 3)
    return _timed_detailed(cfg)


@pytest.fixture(scope="module")
def fin_m6():
    cfg = _study(GARCH_FINITE, (0.0,), 6, ("el", "wel"), ROOT + 4)
    return _timed_detailed(cfg)


@pytest.fixture(scope="module")
def inf_m6():
    cfg = _study(GARCH_INFINITE, (0.0,), 6, ("wel",), ROOT + 5)
    return _timed_detailed(cfg)


def _rate(rows, method, level, c=0.0):
    for row in rows:
        if row.method == method and row.level == level and row.c == c:
            return row.rejection_rate
    raise KeyError((method, level, c))


def _stats(details, method, c_index=0):
    outcomes = details[(0, 0, c_index)][method]
    return np.array([o.stat for o in outcomes if o.status == "ok"])


def _criterion(num, ok, detail):
    print(f"ACCEPTANCE CRITERION {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


class TestCriterion1FiniteVarianceSize:
    def test_finite_variance_size(self, fin_m2):
        rows, _, elapsed = fin_m2
        el_10 = _rate(rows, "el", 0.10)
        el_05 = _rate(rows, "el", 0.05)
        wel_10 = _rate(rows, "wel", 0.10)
        ok = (
            abs(el_10 - 0.094) <= 0.03
            and abs(el_05 - 0.049) <= 0.02
            and abs(wel_10 - 0.104) <= 0.03
        )
        _criterion(
            1,
            ok,
            f"EL@0.10={el_10:.3f} (target 0.094±0.03), EL@0.05={el_05:.3f} "
            f"(target 0.049±0.02), WeL@0.10={wel_10:.3f} (target 0.104±0.03); "
            f"grid of 4 c-values took {elapsed / 60:.1f} min on "
            f"{resolve_workers()} workers",
        )


class TestTable31WelAt005:
    def test_wel_at_005_matches_reference(self, fin_m2):
        # companion check from the study-table examples (not a numbered
        # criterion): WeL at tau=0.05 in the same cell, reference 0.053
        rows, _, _ = fin_m2
        wel_05 = _rate(rows, "wel", 0.05)
        ok = abs(wel_05 - 0.053) <= 0.025
        print(f"TABLE 3.1 COMPANION: {'PASS' if ok else 'FAIL'} - WeL@0.05={wel_05:.3f} (target 0.053±0.025)")
        assert ok


class TestCriterion2RwUndersize:
    def test_rw_bootstrap_undersized(self, fin_m2_rw):
        rows, _, elapsed = fin_m2_rw
        rate = _rate(rows, "rw", 0.10)
        ok = rate <= 0.05
        _criterion(
            2,
            ok,
            f"RW bootstrap (B=500) rejects {rate:.3f} at tau=0.10 "
            f"(must be <= 0.05; paper reports 0.017); {elapsed / 60:.1f} min",
        )


class TestCriterion3InfiniteVarianceContrast:
    def test_el_oversized_wel_nominal(self, inf_m2):
        rows, _, _ = inf_m2
        el_10 = _rate(rows, "el", 0.10)
        wel_10 = _rate(rows, "wel", 0.10)
        ok = el_10 >= 0.15 and abs(wel_10 - 0.106) <= 0.035
        _criterion(
            3,
            ok,
            f"EL@0.10={el_10:.3f} (criterion: >= 0.15; paper 0.211), "
            f"WeL@0.10={wel_10:.3f} (target 0.106±0.035)",
        )


class TestCriterion4PowerMonotonicity:
    def test_power_increases_with_c(self, fin_m2):
        rows, _, _ = fin_m2
        el_rates = [_rate(rows, "el", 0.10, c) for c in (0.0, 5.0, 10.0, 15.0)]
        wel_c15 = _rate(rows, "wel", 0.10, 15.0)
        increasing = all(a < b for a, b in zip(el_rates, el_rates[1:]))
        ok = increasing and el_rates[-1] >= 0.85 and wel_c15 >= 0.60
        _criterion(
            4,
            ok,
            f"EL rates over c=(0,5,10,15): {[round(r, 3) for r in el_rates]} "
            f"(strictly increasing={increasing}, c=15 >= 0.85), WeL c=15 = "
            f"{wel_c15:.3f} (>= 0.60)",
        )


class TestCriterion5Chi2Calibration:
    def test_ks_distance_to_chi2(self, fin_m2, inf_m2, fin_m6, inf_m6):
        cells = [
            ("finite, EL, m=2", _stats(fin_m2[1], "el"), 2),
            ("finite, WeL, m=2", _stats(fin_m2[1], "wel"), 2),
            ("infinite, WeL, m=2", _stats(inf_m2[1], "wel"), 2),
            ("finite, EL, m=6", _stats(fin_m6[1], "el"), 6),
            ("finite, WeL, m=6", _stats(fin_m6[1], "wel"), 6),
            ("infinite, WeL, m=6", _stats(inf_m6[1], "wel"), 6),
        ]
        details = []
        ok = True
        for label, stats, m in cells:
            ks = scipy.stats.kstest(stats, scipy.stats.chi2(m).cdf).statistic
            details.append(f"{label}: KS={ks:.4f} ({stats.size} reps)")
            ok = ok and ks < 0.06
        _criterion(5, ok, "; ".join(details) + " (all must be < 0.06)")


class TestCriterion6DualSolverExactness:
    def test_random_hull_matrices(self):
        rng = np.random.default_rng(606)
        worst_residual = 0.0
        for _ in range(1000):
            N = int(rng.integers(25, 150))
            d = int(rng.integers(1, 7))
            rows = rng.standard_normal((N, d))
            res = dual_solve(rows)
            assert res.feasible
            assert res.neg2log >= 0.0
            worst_residual = max(worst_residual, res.residual)
        ok = worst_residual < 1e-8
        _criterion(
            "6a",
            ok,
            f"1000 random moment matrices: max first-order residual "
            f"{worst_residual:.2e} (< 1e-8), all ratio statistics >= 0",
        )

    def test_scalar_case_from_criterion(self):
        # Criterion text: rows {2, -1, -1} must return lambda = -0.25 +- 1e-9.
        # The rows sum to zero, so lambda = 0 is the exact unique root of
        # sum_t z_t / (1 + lambda z_t) = 0 on the feasible interval; the
        # quoted -0.25 is not a solution of that equation.  Asserted as
        # stated; see the decisions ledger for the analysis.
        res = dual_solve(np.array([2.0, -1.0, -1.0]))
        got = float(res.lam[0])
        ok = abs(got - (-0.25)) <= 1e-9
        _criterion(
            "6b",
            ok,
            f"scalar rows (2,-1,-1): lambda={got!r} (criterion demands -0.25; "
            f"the exact root of the dual equation is 0)",
        )


class TestCriterion7GradientCorrectness:
    def test_finite_difference_check(self):
        rng = np.random.default_rng(707)
        worst = 0.0
        checked = 0
        while checked < 100:
            p = int(rng.integers(0, 3))
            q = int(rng.integers(0, 3))
            theta = ArmaSpec(
                mu=float(rng.uniform(-1.0, 1.0)),
                phi=tuple(rng.uniform(-0.6, 0.6, p)),
                psi=tuple(rng.uniform(-0.6, 0.6, q)),
            )
            if not check_stationarity(theta).ok:
                continue
            x = rng.standard_normal(200)
            pack = residuals_and_gradient(theta, x)
            h = 1e-6
            vec = theta.to_vector()
            for j in range(vec.size):
                up, dn = vec.copy(), vec.copy()
                up[j] += h
                dn[j] -= h
                fd = (
                    residuals_and_gradient(ArmaSpec.from_vector(up, p, q), x).eps
                    - residuals_and_gradient(ArmaSpec.from_vector(dn, p, q), x).eps
                ) / (2 * h)
                rel = np.max(
                    np.abs(fd - pack.grad[:, j]) / np.maximum(np.abs(pack.grad[:, j]), 1e-3)
                )
                worst = max(worst, rel)
            checked += 1
        ok = worst < 1e-5
        _criterion(
            7,
            ok,
            f"100 random (theta, X) pairs: worst relative gradient error "
            f"{worst:.2e} (< 1e-5)",
        )


class TestCriterion8LyapunovDiagnostic:
    def test_finite_variance_case(self):
        est = lyapunov_exponent(GARCH_FINITE, T=10_000, reps=16, seed=808)
        ok = est.nu_star_hat < 0.0 and abs(est.nu_star_hat) > 3.0 * est.std_err
        _criterion(
            "8a",
            ok,
            f"(a,b)=(0.1,0.15): nu*={est.nu_star_hat:.4f}, se={est.std_err:.2e} "
            f"(negative and |nu*| > 3 se)",
        )

    def test_deterministic_case(self):
        est = lyapunov_exponent(GarchSpec(1.0, (0.0,), (0.5,)), T=10_000, reps=16, seed=809)
        err = abs(est.nu_star_hat - math.log(0.5))
        ok = err <= 1e-6
        _criterion(
            "8b",
            ok,
            f"(a,b)=(0,0.5): nu*={est.nu_star_hat:.12f} vs ln(0.5), error {err:.2e} (<= 1e-6)",
        )


class TestCriterion9Determinism:
    def test_worker_count_invariance_byte_identical(self):
        cfg = ExperimentConfig(
            arma=PAPER_ARMA,
            garch=GARCH_FINITE,
            mus=(0.0,),
            ns=(100,),
            cs=(0.0, 5.0),
            m=2,
            reps=100,
            levels=(0.10, 0.05),
            methods=("el", "rw"),
            bootstrap_B=200,
            root_seed=ROOT + 9,
            burn_in=200,
        )
        csv_one = rows_to_csv(run_experiment(cfg, workers=1))
        csv_two = rows_to_csv(run_experiment(cfg, workers=2))
        ok = csv_one == csv_two
        _criterion(
            9,
            ok,
            f"identical CSV bytes across worker counts 1 and 2 "
            f"({len(csv_one)} bytes)",
        )
