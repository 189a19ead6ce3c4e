"""Empirical-likelihood portmanteau machinery: causal self-weights, auxiliary
moment vectors, the inner Lagrange-multiplier dual solve, and the outer
profile minimization over the ARMA parameters.

Test statistics
---------------
For lags l = 1..m the auxiliary vector stacks the least-squares score with
the lag products, evaluated at the null value of the tested autocovariances:

    Z_t = ( eps_t * d eps_t/d theta ,  eps_t eps_{t-1}, ..., eps_t eps_{t-m} ),

for t = m+1..n.  The empirical-likelihood ratio at a parameter point theta is

    2 * sum_t log(1 + lambda^T Z_t),   with  sum_t Z_t / (1 + lambda^T Z_t) = 0,

and the reported statistic is its minimum over theta, started at the
least-squares fit.  Under the null it is asymptotically chi-squared with m
degrees of freedom.

The weighted variant divides the score block by w_{t-1}^2 and the lag-l
product by w_{t-1} w_{t-1-l}, where

    w_t = max{ M_X, sum_{i=0}^{t} exp(-(ln(i+1))^2) |X_{t-i}| }

and M_X is the 90% sample quantile of |X|.  The weights are causal in X and
bounded below by M_X, which keeps the chi-squared limit valid when the error
variance is infinite.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .estimation import residuals_and_gradient, ls_fit
from .model_core import ArmaSpec
from .stats_util import chi2_sf, empirical_quantile

__all__ = [
    "SelfWeights",
    "MomentMatrix",
    "DualResult",
    "ElOutcome",
    "self_weights",
    "moment_vectors",
    "dual_solve",
    "profile_el_test",
    "DualSolveError",
    "ElInfeasibleError",
]

DUAL_GRAD_TOL = 1e-9
DUAL_MAX_ITER = 100
_MIN_STEP = 1e-14
_OUTER_FATOL = 1e-6
_OUTER_MAXFEV = 500


class DualSolveError(RuntimeError):
    """Inner Newton solve failed to converge on a feasible problem."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class ElInfeasibleError(RuntimeError):
    """The moment constraint was infeasible at every trial parameter point."""


@dataclass(frozen=True)
class SelfWeights:
    """Causal weights w_1..w_n plus the truncation floor M_X (used as w_0)."""

    w: np.ndarray
    m_x: float

    @property
    def n(self):
        return self.w.size

    def padded(self):
        """w_0..w_n with w_0 = M_X, for lag-boundary lookups."""
        return np.concatenate(([self.m_x], self.w))


@dataclass(frozen=True)
class MomentMatrix:
    """Auxiliary vectors, one row per usable time point (t = m+1..n)."""

    rows: np.ndarray
    mode: str
    m: int

    @property
    def n_rows(self):
        return self.rows.shape[0]

    @property
    def dim(self):
        return self.rows.shape[1]


@dataclass(frozen=True)
class DualResult:
    lam: np.ndarray
    neg2log: float
    residual: float
    feasible: bool
    iterations: int


@dataclass(frozen=True)
class ElOutcome:
    stat: float
    lam: np.ndarray
    theta_hat_el: ArmaSpec
    p_value: float
    converged: bool
    inner_residual: float
    outer_iterations: int
    mode: str
    m: int


def _decay_coefficients(n):
    i = np.arange(n)
    return np.exp(-np.log(i + 1.0) ** 2)


def self_weights(x, quantile_level=0.9, m_x=None):
    """Compute the causal self-weighting sequence.

    w_t = max{M_X, sum_{i=0}^{t} exp(-(ln(i+1))^2) |X_{t-i}|} with natural
    logarithms and zero presample |X|; M_X defaults to the nearest-rank
    sample quantile of |X| at `quantile_level`.

    Parameters
    ----------
    x : TimeSeries or array-like
    quantile_level : float
        Level of the sample quantile of |X| used as the floor M_X.
    m_x : float, optional
        Explicit floor override (useful for prefix-consistency checks and
        unit-weight test hooks).
    """
    xv = np.abs(np.asarray(x, dtype=float))
    if xv.size == 0:
        raise ValueError("empty series")
    if m_x is None:
        m_x = empirical_quantile(xv, quantile_level)
    m_x = float(m_x)
    if m_x <= 0:
        raise ValueError("degenerate series: M_X = 0 violates inf w_t > 0")
    sums = np.convolve(_decay_coefficients(xv.size), xv)[: xv.size]
    w = np.maximum(m_x, sums)
    return SelfWeights(w=w, m_x=m_x)


def moment_vectors(pack, m, weights=None):
    """Stack the auxiliary vectors for t = m+1..n into an (n-m) x (p+q+1+m) matrix.

    Without weights, row t is (eps_t * grad_t, eps_t eps_{t-1}, ..., eps_t eps_{t-m});
    with weights the score block carries w_{t-1}^{-2} and the lag-l block
    w_{t-1}^{-1} w_{t-1-l}^{-1}, with w_0 = M_X at the boundary.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    eps = pack.eps
    n = eps.size
    k = pack.grad.shape[1]
    d = k + m
    if n - m <= d:
        raise ValueError(f"insufficient sample for m lags: n-m={n - m} <= d={d}")
    e = eps[m:]
    rows = np.empty((n - m, d))
    rows[:, :k] = e[:, None] * pack.grad[m:]
    for l in range(1, m + 1):
        rows[:, k + l - 1] = e * eps[m - l: n - l]
    mode = "unweighted"
    if weights is not None:
        if weights.n != n:
            raise ValueError(f"weights length {weights.n} != series length {n}")
        wp = weights.padded()
        w_prev = wp[m:n]
        rows[:, :k] *= (w_prev ** -2.0)[:, None]
        for l in range(1, m + 1):
            rows[:, k + l - 1] /= w_prev * wp[m - l: n - l]
        mode = "weighted"
    return MomentMatrix(rows=rows, mode=mode, m=m)


def dual_solve(Z, tol=DUAL_GRAD_TOL, max_iter=DUAL_MAX_ITER):
    """Solve the empirical-likelihood dual for one moment matrix.

    Maximizes f(lambda) = sum_t log(1 + lambda^T Z_t) by damped Newton steps
    with backtracking that keeps every 1 + lambda^T Z_t >= 1/N.  f is concave
    on that slice, so accepted steps increase f monotonically from f(0) = 0
    and the returned -2 log ratio, 2 f(lambda*), is nonnegative.

    If zero is not interior to the convex hull of the rows, f is unbounded
    along the separating direction; the solver detects this through an exact
    certificate (an iterate lambda != 0 with min_t lambda^T Z_t >= 0) or a
    collapsed line search, and reports feasible=False with neg2log = +inf.

    Returns a DualResult; raises DualSolveError if the iteration budget is
    exhausted on an apparently feasible problem.
    """
    rows = Z.rows if isinstance(Z, MomentMatrix) else np.asarray(Z, dtype=float)
    if rows.ndim == 1:
        rows = rows[:, None]
    if not np.isfinite(rows).all():
        raise ValueError("moment matrix must be finite")
    N, d = rows.shape
    floor = 1.0 / N

    lam = np.zeros(d)
    u = np.ones(N)  # u_t = 1 + lam . Z_t, maintained >= floor throughout
    f = 0.0
    residual = math.inf
    prev_residual = math.inf
    refining = False
    for it in range(1, max_iter + 1):
        g = rows.T @ (1.0 / u)
        residual = float(np.max(np.abs(g)))
        if residual < tol:
            return DualResult(
                lam=lam, neg2log=max(2.0 * f, 0.0), residual=residual,
                feasible=True, iterations=it - 1,
            )
        if it > 1 and float(u.min()) >= 1.0:
            # every lam . Z_t >= 0: lam separates the rows from the origin,
            # so 0 is not interior to the hull and f is unbounded above.
            return DualResult(
                lam=lam, neg2log=math.inf, residual=residual, feasible=False,
                iterations=it - 1,
            )
        if refining and residual >= prev_residual:
            # pure Newton refinement hit the floating-point floor
            if residual < 1e-8:
                return DualResult(
                    lam=lam, neg2log=max(2.0 * f, 0.0), residual=residual,
                    feasible=True, iterations=it - 1,
                )
            raise DualSolveError(
                f"dual Newton stalled at residual {residual:.3e}", residual=residual
            )
        prev_residual = residual

        W = rows / u[:, None]
        H = W.T @ W
        try:
            direction = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            direction = None
        if direction is None or not np.isfinite(direction).all():
            direction = np.linalg.lstsq(H, g, rcond=None)[0]
        slope = float(g @ direction)
        if slope <= 0.0:
            direction = g
            slope = float(g @ g)
        # once the predicted ascent falls below the resolution of f, Armijo
        # can no longer certify progress; switch to feasibility-only Newton
        # steps and monitor the gradient instead
        refining = slope <= 1e-13 * (1.0 + abs(f))
        zd = rows @ direction
        step = 1.0
        accepted = False
        while step >= _MIN_STEP:
            u_new = u + step * zd
            if u_new.min() >= floor:
                f_new = float(np.log(u_new).sum())
                if refining or f_new >= f + 1e-4 * step * slope:
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            if float(u.min()) >= 1.0 - tol and it > 1:
                return DualResult(
                    lam=lam, neg2log=math.inf, residual=residual, feasible=False,
                    iterations=it,
                )
            raise DualSolveError(
                f"dual Newton stalled after {it} iterations (residual {residual:.3e})",
                residual=residual,
            )
        lam = lam + step * direction
        u, f = u_new, f_new

    if float(u.min()) >= 1.0 - tol:
        return DualResult(
            lam=lam, neg2log=math.inf, residual=residual, feasible=False,
            iterations=max_iter,
        )
    raise DualSolveError(
        f"dual Newton did not converge in {max_iter} iterations (residual {residual:.3e})",
        residual=residual,
    )


def _initial_simplex(center, scale):
    k = center.size
    sim = np.tile(center, (k + 1, 1))
    for i in range(k):
        sim[i + 1, i] += scale
    return sim


def profile_el_test(x, p, q, m, mode="EL", fit=None, weights=None):
    """Profile empirical-likelihood portmanteau test for m lags.

    Minimizes the dual -2 log ratio over theta with Nelder-Mead, started at
    the least-squares fit (computed when not supplied) with an initial
    simplex scale of 0.5/sqrt(n), convergence on a value spread below 1e-6,
    at most 500 evaluations, and one restart from the best vertex.  The
    p-value is the chi-squared(m) upper tail of the statistic; reject at
    level a when p_value <= a.

    Parameters
    ----------
    x : TimeSeries or array-like
    p, q : int
        ARMA orders of the fitted model.
    m : int
        Number of tested lags (degrees of freedom of the reference law).
    mode : {"EL", "WeL"}
        Unweighted or self-weighted auxiliary vectors.
    fit : FitResult, optional
        Reuse an existing least-squares fit.
    weights : SelfWeights, optional
        Explicit weights for mode="WeL" (forcing unit weights reproduces
        mode="EL" exactly).
    """
    if mode not in ("EL", "WeL"):
        raise ValueError(f"mode must be 'EL' or 'WeL', got {mode!r}")
    xv = np.asarray(x, dtype=float)
    n = xv.size
    if fit is None:
        fit = ls_fit(xv, p, q)
    if mode == "WeL" and weights is None:
        weights = self_weights(xv)
    use_weights = weights if mode == "WeL" else None

    def objective(vec):
        theta = ArmaSpec.from_vector(vec, p, q)
        pack = residuals_and_gradient(theta, xv)
        if not np.isfinite(pack.eps).all() or not np.isfinite(pack.grad).all():
            return math.inf
        Z = moment_vectors(pack, m, use_weights)
        if not np.isfinite(Z.rows).all():
            return math.inf
        try:
            res = dual_solve(Z)
        except DualSolveError:
            return math.inf
        return res.neg2log if res.feasible else math.inf

    theta0 = fit.theta_hat.to_vector()
    scale = 0.5 / math.sqrt(n)
    best = theta0
    iterations = 0
    with np.errstate(invalid="ignore"):  # inf-valued vertices at infeasible points
        for _ in range(2):
            result = minimize(
                objective,
                best,
                method="Nelder-Mead",
                options=dict(
                    initial_simplex=_initial_simplex(best, scale),
                    xatol=math.inf,
                    fatol=_OUTER_FATOL,
                    maxfev=_OUTER_MAXFEV,
                    maxiter=10 * _OUTER_MAXFEV,
                ),
            )
            best = result.x
            iterations += int(result.nit)

    theta_best = ArmaSpec.from_vector(best, p, q)
    pack = residuals_and_gradient(theta_best, xv)
    Z = moment_vectors(pack, m, use_weights)
    try:
        final = dual_solve(Z)
    except DualSolveError as exc:
        raise ElInfeasibleError("EL infeasible at every trial point") from exc
    if not final.feasible or not math.isfinite(final.neg2log):
        raise ElInfeasibleError("EL infeasible at every trial point")

    stat = final.neg2log
    return ElOutcome(
        stat=stat,
        lam=final.lam,
        theta_hat_el=theta_best,
        p_value=chi2_sf(stat, m),
        converged=bool(fit.converged and final.feasible and final.residual < 1e-8),
        inner_residual=final.residual,
        outer_iterations=iterations,
        mode=mode,
        m=m,
    )
