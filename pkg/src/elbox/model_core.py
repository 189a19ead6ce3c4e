"""ARMA and GARCH parameter records, stationarity checks, and simulation of
ARMA series driven by GARCH errors, including a local moving-average
alternative in the innovation sequence.

Model conventions
-----------------
The observed series follows

    X_t = mu + sum_i phi_i X_{t-i} + sum_j psi_j eps_{t-j} + eps_t,

and the errors follow a GARCH(r, s) process

    eps_t = eta_t sigma_t,
    sigma_t^2 = omega + sum_i a_i eps_{t-i}^2 + sum_j b_j sigma_{t-j}^2,

where eta_t are i.i.d. innovations with mean zero and unit variance.  The
simulator builds eta_t from standard normals e_t as

    eta_t = (k e_{t-1} + e_t) / sqrt(1 + k^2),   k = c / sqrt(n),

so c = 0 gives exactly i.i.d. standard normal eta, while c > 0 injects
lag-one dependence of magnitude c/sqrt(n) without changing the variance.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

__all__ = [
    "ArmaSpec",
    "GarchSpec",
    "DgpConfig",
    "TimeSeries",
    "StationarityReport",
    "check_stationarity",
    "simulate",
    "SimulationError",
]

ROOT_MARGIN = 1e-8


class SimulationError(RuntimeError):
    """Raised when a simulated path produces a non-finite value."""


def _as_float_tuple(seq, name):
    vals = tuple(float(v) for v in seq)
    if any(not math.isfinite(v) for v in vals):
        raise ValueError(f"{name} coefficients must all be finite, got {vals}")
    return vals


@dataclass(frozen=True)
class ArmaSpec:
    """ARMA(p, q) parameters: intercept mu, AR coefficients phi, MA coefficients psi."""

    mu: float = 0.0
    phi: tuple = ()
    psi: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "mu", float(self.mu))
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu!r}")
        object.__setattr__(self, "phi", _as_float_tuple(self.phi, "phi"))
        object.__setattr__(self, "psi", _as_float_tuple(self.psi, "psi"))

    @property
    def p(self):
        return len(self.phi)

    @property
    def q(self):
        return len(self.psi)

    @property
    def k(self):
        """Number of free parameters (mu, phi..., psi...)."""
        return 1 + self.p + self.q

    def to_vector(self):
        return np.array((self.mu,) + self.phi + self.psi, dtype=float)

    @classmethod
    def from_vector(cls, vec, p, q):
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (1 + p + q,):
            raise ValueError(f"expected vector of length {1 + p + q}, got shape {vec.shape}")
        return cls(mu=vec[0], phi=tuple(vec[1:1 + p]), psi=tuple(vec[1 + p:]))


@dataclass(frozen=True)
class GarchSpec:
    """GARCH(r, s) parameters.

    omega must be strictly positive; the ARCH coefficients a and GARCH
    coefficients b must be nonnegative.  Zero entries are accepted so that
    degenerate and deterministic volatility recursions remain expressible.
    """

    omega: float
    a: tuple = ()
    b: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "a", _as_float_tuple(self.a, "a"))
        object.__setattr__(self, "b", _as_float_tuple(self.b, "b"))
        if not math.isfinite(self.omega) or self.omega <= 0:
            raise ValueError(f"omega must be finite and > 0, got {self.omega!r}")
        if any(v < 0 for v in self.a):
            raise ValueError(f"a coefficients must be >= 0, got {self.a}")
        if any(v < 0 for v in self.b):
            raise ValueError(f"b coefficients must be >= 0, got {self.b}")

    @property
    def r(self):
        return len(self.a)

    @property
    def s(self):
        return len(self.b)

    @property
    def persistence(self):
        return sum(self.a) + sum(self.b)


@dataclass(frozen=True)
class DgpConfig:
    """One fully specified data-generating process.

    c is the local-alternative drift (c = 0 is the null of uncorrelated
    innovations); n is the returned sample size; burn_in initial points are
    simulated and discarded.  The output is a pure function of this record.
    """

    arma: ArmaSpec
    garch: GarchSpec
    c: float = 0.0
    n: int = 400
    burn_in: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.n < 50:
            raise ValueError(f"n must be >= 50, got {self.n}")
        if self.burn_in < 0:
            raise ValueError(f"burn_in must be >= 0, got {self.burn_in}")
        if not math.isfinite(float(self.c)):
            raise ValueError(f"c must be finite, got {self.c!r}")


class TimeSeries:
    """An immutable finite-valued series; the sample size is fixed at construction."""

    __slots__ = ("_values",)

    def __init__(self, values):
        arr = np.array(values, dtype=float, copy=True)
        if arr.ndim != 1:
            raise ValueError(f"expected a 1-d sequence, got shape {arr.shape}")
        if arr.size and not np.isfinite(arr).all():
            bad = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise ValueError(f"non-finite value at index {bad}")
        arr.flags.writeable = False
        self._values = arr

    @property
    def values(self):
        return self._values

    @property
    def n(self):
        return self._values.size

    def __len__(self):
        return self._values.size

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._values
        return self._values.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return self._values.shape == other._values.shape and bool(
            np.all(self._values == other._values)
        )

    def __repr__(self):
        return f"TimeSeries(n={self.n})"


@dataclass(frozen=True)
class StationarityReport:
    ok: bool
    min_root_modulus_ar: float
    min_root_modulus_ma: float
    common_root: bool


def _poly_roots(tail_coeffs, sign):
    """Roots of 1 + sign * sum_k c_k z^k for tail coefficients c_1..c_d."""
    coeffs = np.array([1.0] + [sign * c for c in tail_coeffs], dtype=float)
    # ascending order; strip trailing zeros so the effective degree is right
    nz = np.flatnonzero(coeffs)
    coeffs = coeffs[: nz[-1] + 1]
    if coeffs.size <= 1:
        return np.empty(0, dtype=complex)
    return np.roots(coeffs[::-1])


def check_stationarity(spec):
    """Check the admissibility of an ARMA parameter point.

    Requires every root of phi(z) = 1 - sum phi_i z^i and of
    psi(z) = 1 + sum psi_j z^j to lie strictly outside the unit circle
    (modulus > 1 + 1e-8), and the two polynomials to share no root
    (minimum pairwise root distance > 1e-8).  Root moduli come from
    numpy's companion-matrix eigenvalue solver.  A degree-zero polynomial
    has no roots and reports modulus +inf.
    """
    ar_roots = _poly_roots(spec.phi, -1.0)
    ma_roots = _poly_roots(spec.psi, +1.0)
    min_ar = float(np.min(np.abs(ar_roots))) if ar_roots.size else math.inf
    min_ma = float(np.min(np.abs(ma_roots))) if ma_roots.size else math.inf
    common = False
    if ar_roots.size and ma_roots.size:
        dists = np.abs(ar_roots[:, None] - ma_roots[None, :])
        common = bool(dists.min() <= ROOT_MARGIN)
    ok = (min_ar > 1.0 + ROOT_MARGIN) and (min_ma > 1.0 + ROOT_MARGIN) and not common
    return StationarityReport(
        ok=ok,
        min_root_modulus_ar=min_ar,
        min_root_modulus_ma=min_ma,
        common_root=common,
    )


def _simulate_garch_errors(garch, eta, sigma2_init):
    """Run the volatility recursion; eps and sigma^2 start from zero presample
    values and sigma2_init respectively."""
    a, b = garch.a, garch.b
    r, s = len(a), len(b)
    omega = garch.omega
    T = eta.size
    eps = np.empty(T)
    sig2 = np.empty(T)
    for t in range(T):
        v = omega
        for i in range(r):
            k = t - 1 - i
            if k >= 0:
                v += a[i] * eps[k] * eps[k]
        for j in range(s):
            k = t - 1 - j
            v += b[j] * (sig2[k] if k >= 0 else sigma2_init)
        if not math.isfinite(v):
            raise SimulationError(f"volatility recursion exploded at index {t + 1}")
        sig2[t] = v
        eps[t] = eta[t] * math.sqrt(v)
    return eps, sig2


def simulate(cfg):
    """Simulate a TimeSeries of length cfg.n from the configured DGP.

    Standard normals e_0..e_T (T = burn_in + n) seed the innovation
    construction eta_t = (k e_{t-1} + e_t)/sqrt(1 + k^2) with k = c/sqrt(n).
    The volatility recursion starts from sigma_0^2 = omega/(1 - persistence)
    when the persistence is below one, else omega; presample eps and X are
    zero, and the first burn_in points are discarded.
    """
    report = check_stationarity(cfg.arma)
    if not report.ok:
        raise ValueError(f"ARMA spec fails the stationarity check: {report}")
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    T = cfg.burn_in + cfg.n
    e = rng.standard_normal(T + 1)
    k = cfg.c / math.sqrt(cfg.n)
    eta = (k * e[:-1] + e[1:]) / math.sqrt(1.0 + k * k)

    garch = cfg.garch
    if garch.persistence < 1.0:
        sigma2_init = garch.omega / (1.0 - garch.persistence)
    else:
        sigma2_init = garch.omega
    eps, _ = _simulate_garch_errors(garch, eta, sigma2_init)

    arma = cfg.arma
    rhs = arma.mu + lfilter(np.r_[1.0, arma.psi], [1.0], eps)
    x = lfilter([1.0], np.r_[1.0, -np.asarray(arma.phi, dtype=float)], rhs)
    if not np.isfinite(x).all():
        bad = int(np.flatnonzero(~np.isfinite(x))[0])
        raise SimulationError(f"ARMA recursion exploded at index {bad + 1}")
    return TimeSeries(x[cfg.burn_in:])
