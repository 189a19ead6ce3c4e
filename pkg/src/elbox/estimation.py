"""Conditional residual recursion with analytic gradients, and the
least-squares ARMA fit defined by the estimating equations
sum_t eps_t(theta) * d eps_t(theta)/d theta = 0.

Residual convention
-------------------
Residuals are computed recursively for t = 1..n with zero presample values
for both X and eps:

    eps_t(theta) = X_t - mu - sum_i phi_i X_{t-i} - sum_j psi_j eps_{t-j},

and the gradient obeys the companion recursion

    d eps_t / d theta = -(1, X_{t-1..t-p}, eps_{t-1..t-q})^T
                        - sum_j psi_j d eps_{t-j} / d theta,

with zero presample gradients.  Parameter order is (mu, phi_1..phi_p,
psi_1..psi_q) throughout.

The fit minimizes the conditional sum of squares over t = p+1..n, i.e. the
first p residuals (the only ones touching zero-padded X lags) are excluded
from the objective and score.  This makes exact deterministic AR data
recover its coefficients exactly and makes a location shift of the data move
only the intercept.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .model_core import ArmaSpec, check_stationarity

__all__ = [
    "ResidualPack",
    "FitResult",
    "residuals_and_gradient",
    "ls_fit",
    "DegenerateDesignError",
]

SCORE_TOL_PER_OBS = 1e-6
_ARMIJO_C = 1e-4
_STEP_TOL = 1e-10
_MAX_ITER = 200


class DegenerateDesignError(RuntimeError):
    """Raised when the Gauss-Newton design has no usable rank."""


@dataclass(frozen=True)
class ResidualPack:
    """Residual sequence eps_t(theta) and its n x (p+q+1) parameter gradient."""

    eps: np.ndarray
    grad: np.ndarray

    @property
    def n(self):
        return self.eps.size


@dataclass(frozen=True)
class FitResult:
    theta_hat: ArmaSpec
    score_norm: float
    iterations: int
    converged: bool


def _lagged(values, lag):
    """values shifted down by `lag` with zero fill at the front."""
    out = np.zeros_like(values)
    if lag < values.size:
        out[lag:] = values[: values.size - lag]
    return out


def residuals_only(theta, x):
    """eps_t(theta) without the gradient (cheaper for bootstrap inner loops)."""
    xv = np.asarray(x, dtype=float)
    u = xv - theta.mu
    for i, phi_i in enumerate(theta.phi, start=1):
        u -= phi_i * _lagged(xv, i)
    return lfilter([1.0], np.r_[1.0, theta.psi], u)


def residuals_and_gradient(theta, x):
    """Evaluate eps_t(theta) and d eps_t/d theta for the whole sample.

    Both recursions are IIR filters with denominator (1, psi_1..psi_q) and
    zero initial conditions, so they are evaluated with scipy's lfilter.
    """
    xv = np.asarray(x, dtype=float)
    p, q = theta.p, theta.q
    n = xv.size
    if n <= p + q:
        raise ValueError(f"need more than p+q={p + q} observations, got {n}")
    ma = np.r_[1.0, theta.psi]

    u = xv - theta.mu
    for i, phi_i in enumerate(theta.phi, start=1):
        u -= phi_i * _lagged(xv, i)
    eps = lfilter([1.0], ma, u)

    grad = np.empty((n, 1 + p + q))
    grad[:, 0] = lfilter([1.0], ma, -np.ones(n))
    for i in range(1, p + 1):
        grad[:, i] = lfilter([1.0], ma, -_lagged(xv, i))
    for j in range(1, q + 1):
        grad[:, p + j] = lfilter([1.0], ma, -_lagged(eps, j))
    return ResidualPack(eps=eps, grad=grad)


def _hr_start(xv, p, q):
    """Hannan-Rissanen style starting point: a long autoregression supplies
    residual proxies, then X_t is regressed on its own lags and the lagged
    proxies.  Rank-deficient designs fall back to the minimum-norm solution."""
    n = xv.size
    if p + q == 0:
        return ArmaSpec(mu=float(np.mean(xv)), phi=(), psi=())

    if q == 0:
        ehat = None
    else:
        h = int(min(max(p + q + 1, round(10 * np.log10(n))), n // 4))
        cols = [np.ones(n - h)] + [xv[h - i: n - i] for i in range(1, h + 1)]
        design = np.column_stack(cols)
        coef, *_ = np.linalg.lstsq(design, xv[h:], rcond=None)
        ehat = np.zeros(n)
        ehat[h:] = xv[h:] - design @ coef

    start = (h + q) if q else p
    cols = [np.ones(n - start)]
    cols += [xv[start - i: n - i] for i in range(1, p + 1)]
    if q:
        cols += [ehat[start - j: n - j] for j in range(1, q + 1)]
    design = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(design, xv[start:], rcond=None)
    theta = ArmaSpec(mu=coef[0], phi=tuple(coef[1:1 + p]), psi=tuple(coef[1 + p:]))

    shrink = 0
    while not check_stationarity(theta).ok and shrink < 200:
        theta = ArmaSpec(
            mu=theta.mu,
            phi=tuple(0.95 * v for v in theta.phi),
            psi=tuple(0.95 * v for v in theta.psi),
        )
        shrink += 1
    if not check_stationarity(theta).ok:
        theta = ArmaSpec(mu=float(np.mean(xv)), phi=(0.0,) * p, psi=(0.0,) * q)
    return theta


def ls_fit(x, p, q, init=None, max_iter=_MAX_ITER):
    """Fit an ARMA(p, q) by Gauss-Newton on the conditional sum of squares.

    The returned theta solves sum_{t>p} eps_t d eps_t/d theta = 0 up to an
    infinity-norm below 1e-6 * n when `converged` is True.  Steps are
    backtracked (Armijo constant 1e-4) and additionally halved until the
    iterate stays inside the admissible region, so the estimate always
    passes `check_stationarity`.

    Parameters
    ----------
    x : TimeSeries or array-like
    p, q : int
        Model orders, both >= 0.
    init : ArmaSpec, optional
        Starting point; defaults to a Hannan-Rissanen style estimate.
    """
    xv = np.asarray(x, dtype=float)
    n = xv.size
    if p < 0 or q < 0:
        raise ValueError("orders must be nonnegative")
    if n < 10 * (p + q + 1):
        raise ValueError(f"need at least {10 * (p + q + 1)} observations for p={p}, q={q}, got {n}")

    theta = init if init is not None else _hr_start(xv, p, q)
    if init is not None and not check_stationarity(theta).ok:
        raise ValueError("init lies outside the admissible region")
    ncond = p
    score_tol = SCORE_TOL_PER_OBS * n

    vec = theta.to_vector()
    pack = residuals_and_gradient(theta, xv)
    e = pack.eps[ncond:]
    J = pack.grad[ncond:]
    rank = np.linalg.matrix_rank(J)
    if rank < J.shape[1]:
        raise DegenerateDesignError(
            f"degenerate design: Gauss-Newton design has rank {rank} < {J.shape[1]}"
        )
    sse = float(e @ e)
    score = J.T @ e
    score_norm = float(np.max(np.abs(score))) if score.size else 0.0

    iterations = 0
    for iterations in range(1, max_iter + 1):
        if score_norm < 0.01 * score_tol:
            break
        direction, *_ = np.linalg.lstsq(J, -e, rcond=1e-10)
        slope = 2.0 * float(score @ direction)  # directional derivative of the SSE
        if slope >= 0.0:
            break
        step = 1.0
        accepted = False
        while step >= _STEP_TOL:
            cand_vec = vec + step * direction
            cand = ArmaSpec.from_vector(cand_vec, p, q)
            if check_stationarity(cand).ok:
                cand_pack = residuals_and_gradient(cand, xv)
                ce = cand_pack.eps[ncond:]
                cand_sse = float(ce @ ce)
                if np.isfinite(cand_sse) and cand_sse <= sse + _ARMIJO_C * step * slope:
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            break
        vec, theta, pack, sse = cand_vec, cand, cand_pack, cand_sse
        e = pack.eps[ncond:]
        J = pack.grad[ncond:]
        score = J.T @ e
        score_norm = float(np.max(np.abs(score))) if score.size else 0.0
        if np.max(np.abs(step * direction)) < _STEP_TOL:
            break

    return FitResult(
        theta_hat=theta,
        score_norm=score_norm,
        iterations=iterations,
        converged=bool(score_norm < score_tol),
    )
