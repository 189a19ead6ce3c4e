"""Executable condition checks: a Monte Carlo Lyapunov exponent for the
GARCH companion matrix (strict stationarity when negative), a finite-sample
proxy for the weight-moment condition behind the weighted test, and an
ARCH-LM screen for conditional heteroskedasticity.
"""

import math
from dataclasses import dataclass

import numpy as np

from .classic_tests import _report
from .stats_util import chi2_sf, spawn_rng

__all__ = [
    "LyapunovEstimate",
    "XiSeries",
    "lyapunov_exponent",
    "weight_moment_check",
    "weight_moment_terms",
    "xi_series",
    "arch_lm",
]

_RENORM_EVERY = 50


@dataclass(frozen=True)
class LyapunovEstimate:
    nu_star_hat: float
    std_err: float
    T: int
    reps: int


@dataclass(frozen=True)
class XiSeries:
    """xi_{rho,t} = 1 + sum_{i=1}^{t-1} rho^i |X_{t-i}|, truncated at the history."""

    xi: np.ndarray
    rho: float


def _companion_dimension(garch):
    r = max(garch.r, 1)
    s = max(garch.s, 1)
    return r + s - 1


def _fill_companion(out, garch, eta2):
    """Companion matrix of the squared-volatility recursion.

    The state is (sigma_t^2..sigma_{t-s+1}^2, eps_{t-1}^2..eps_{t-r+1}^2);
    the top row carries (a_1 eta_t^2 + b_1, b_2..b_s, a_2..a_r), below it sit
    the shift rows of the sigma^2 block, then the eps_t^2 = eta_t^2 sigma_t^2
    feed row and the shift rows of the eps^2 block.  Missing a or b blocks
    (r = 0 or s = 0) are treated as a single zero coefficient, which drops
    the corresponding rows and columns.
    """
    a = garch.a if garch.r else (0.0,)
    b = garch.b if garch.s else (0.0,)
    r, s = len(a), len(b)
    out[:, :] = 0.0
    out[0, 0] = a[0] * eta2 + b[0]
    for j in range(2, s + 1):
        out[0, j - 1] = b[j - 1]
    for i in range(2, r + 1):
        out[0, s + i - 2] = a[i - 1]
    for j in range(1, s):
        out[j, j - 1] = 1.0
    if r >= 2:
        out[s, 0] = eta2
        for i in range(1, r - 1):
            out[s + i, s + i - 1] = 1.0
    return out


def lyapunov_exponent(garch, T=10_000, reps=16, seed=0, renorm_every=_RENORM_EVERY):
    """Estimate the top Lyapunov exponent of the GARCH companion product.

    Each of the `reps` independent paths evaluates (1/T) ln ||A_1 ... A_T||
    (max-abs norm) with standard normal eta_t, renormalizing the running
    product by its norm every `renorm_every` steps and accumulating the log
    norms; scalar renormalization commutes with the product, so the estimate
    does not depend on the renormalization period.  The estimate is the mean
    over paths and std_err the standard error across paths (floored at the
    smallest positive normal so it stays positive for deterministic inputs).
    """
    if T < 1_000:
        raise ValueError(f"T must be >= 1000, got {T}")
    if reps < 10:
        raise ValueError(f"reps must be >= 10, got {reps}")
    if garch.r + garch.s == 0:
        raise ValueError("lyapunov_exponent needs at least one ARCH or GARCH coefficient")
    k = _companion_dimension(garch)
    path_estimates = np.empty(reps)
    A = np.empty((k, k))
    for rep in range(reps):
        rng = spawn_rng(seed, rep)
        eta2 = rng.standard_normal(T) ** 2
        M = np.eye(k)
        acc = 0.0
        for t in range(T):
            _fill_companion(A, garch, eta2[t])
            M = A @ M
            if (t + 1) % renorm_every == 0:
                nrm = float(np.max(np.abs(M)))
                if not math.isfinite(nrm) or nrm == 0.0:
                    raise RuntimeError(f"companion product degenerated at step {t + 1}")
                acc += math.log(nrm)
                M /= nrm
        nrm = float(np.max(np.abs(M)))
        if not math.isfinite(nrm) or nrm == 0.0:
            raise RuntimeError(f"companion product degenerated at step {T}")
        path_estimates[rep] = (acc + math.log(nrm)) / T
    se = float(np.std(path_estimates, ddof=1) / math.sqrt(reps))
    se = max(se, float(np.finfo(float).tiny))
    return LyapunovEstimate(
        nu_star_hat=float(path_estimates.mean()),
        std_err=se,
        T=T,
        reps=reps,
    )


def xi_series(x, rho=0.95):
    """Finite-sample xi_{rho,t}; xi_1 = 1 and xi_{t+1} = 1 + rho (|X_t| + xi_t - 1)."""
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho!r}")
    ax = np.abs(np.asarray(x, dtype=float))
    tail = np.empty(ax.size)
    tail[0] = 0.0
    for t in range(1, ax.size):
        tail[t] = rho * (ax[t - 1] + tail[t - 1])
    return XiSeries(xi=1.0 + tail, rho=rho)


def weight_moment_terms(x, w, rho=0.95, delta=0.05):
    """Per-time-point terms w_t^{-4} xi_{rho,t}^{4+delta} for t = 1..n."""
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta!r}")
    xi = xi_series(x, rho).xi
    return w.w ** -4.0 * xi ** (4.0 + delta)


def weight_moment_check(x, w, rho=0.95, delta=0.05):
    """Sample mean of w_{t}^{-4} xi_{rho,t}^{4+delta}, a finite-sample proxy
    for the moment condition that justifies the weighted test.

    A bounded running mean is the informal pass signal; callers can compare
    the last-half mean of `weight_moment_terms` with the full mean and flag
    instability when they differ by more than 20%.
    """
    return float(np.mean(weight_moment_terms(x, w, rho, delta)))


def arch_lm(eps, lags):
    """Engle's LM screen for ARCH effects.

    Regresses eps_t^2 on an intercept and eps_{t-1}^2..eps_{t-lags}^2; the
    statistic is (number of regression rows) * R^2, referred to a
    chi-squared(lags) upper tail.
    """
    e = np.asarray(eps, dtype=float)
    n = e.size
    if lags < 1:
        raise ValueError(f"lags must be >= 1, got {lags}")
    if n <= 10 * lags:
        raise ValueError(f"need length(eps) > {10 * lags}, got {n}")
    e2 = e ** 2
    y = e2[lags:]
    cols = [np.ones(n - lags)]
    cols += [e2[lags - k: n - k] for k in range(1, lags + 1)]
    design = np.column_stack(cols)
    tss = float(((y - y.mean()) ** 2).sum())
    if tss <= 0.0:
        raise ValueError("zero-variance regressand")
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        raise ValueError("collinear design in the ARCH-LM regression")
    resid = y - design @ coef
    r2 = 1.0 - float(resid @ resid) / tss
    nobs = y.size
    stat = nobs * r2
    return _report("arch_lm", lags, stat, chi2_sf(stat, lags))
