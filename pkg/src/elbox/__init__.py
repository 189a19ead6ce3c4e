"""elbox: empirical-likelihood portmanteau tests for ARMA model adequacy,
with self-weighting for possibly infinite-variance GARCH errors, classic
Box-Pierce / Ljung-Box / random-weight-bootstrap baselines, condition
diagnostics, and a reproducible Monte Carlo harness.
"""

from .classic_tests import AcfVector, TestReport, portmanteau, residual_acf, rw_bootstrap_test
from .diagnostics import (
    LyapunovEstimate,
    XiSeries,
    arch_lm,
    lyapunov_exponent,
    weight_moment_check,
    xi_series,
)
from .el_engine import (
    DualResult,
    DualSolveError,
    ElInfeasibleError,
    ElOutcome,
    MomentMatrix,
    SelfWeights,
    dual_solve,
    moment_vectors,
    profile_el_test,
    self_weights,
)
from .estimation import (
    DegenerateDesignError,
    FitResult,
    ResidualPack,
    ls_fit,
    residuals_and_gradient,
)
from .mc_harness import (
    ExperimentConfig,
    ExperimentRow,
    run_experiment,
    run_experiment_detailed,
    summarize,
)
from .model_core import (
    ArmaSpec,
    DgpConfig,
    GarchSpec,
    SimulationError,
    StationarityReport,
    TimeSeries,
    check_stationarity,
    simulate,
)
from .stats_util import chi2_quantile, chi2_sf, derive_seed, empirical_quantile, spawn_rng

__version__ = "0.1.0"

__all__ = [
    "ArmaSpec", "GarchSpec", "DgpConfig", "TimeSeries", "StationarityReport",
    "check_stationarity", "simulate", "SimulationError",
    "ResidualPack", "FitResult", "residuals_and_gradient", "ls_fit",
    "DegenerateDesignError",
    "SelfWeights", "MomentMatrix", "DualResult", "ElOutcome",
    "self_weights", "moment_vectors", "dual_solve", "profile_el_test",
    "DualSolveError", "ElInfeasibleError",
    "AcfVector", "TestReport", "residual_acf", "portmanteau", "rw_bootstrap_test",
    "LyapunovEstimate", "XiSeries", "lyapunov_exponent", "weight_moment_check",
    "xi_series", "arch_lm",
    "ExperimentConfig", "ExperimentRow", "run_experiment", "run_experiment_detailed",
    "summarize",
    "chi2_sf", "chi2_quantile", "empirical_quantile", "derive_seed", "spawn_rng",
    "__version__",
]
