"""Optimal sampling of a Wiener source over a random-delay channel.

Solves the optimal threshold fixed points for signal-difference and
age-based sampling policies, and verifies them against event-driven
Monte Carlo simulation of the source, the FIFO service queue, and the
remote MMSE estimator.
"""

from .service import (
    Deterministic,
    DiscreteFinite,
    Exponential,
    LogNormalUnitMean,
    ess_inf,
    mean,
    parse_service,
    format_service,
    quantile,
    sample,
    second_moment,
)
from .kernels import (
    MomentFunctionals,
    ToleranceError,
    functionals_age,
    functionals_signal,
    gauss_kernel_max2,
    gauss_kernel_max4,
    moment_functionals,
)
from .solver import (
    ConvergenceError,
    ThresholdSolution,
    asymptotic_ratio_check,
    scan_sign_changes,
    solve_age_threshold,
    solve_signal_threshold,
    zero_wait_age_optimal,
    zero_wait_mse_optimal,
)
from .simulate import (
    AgeThreshold,
    Periodic,
    SignalThreshold,
    SimConfig,
    SimResult,
    ZeroWait,
    simulate_policy,
)
from .checks import (
    CheckReport,
    format_report,
    run_suite,
    verify_interval_decomposition,
    verify_stopping_identity,
    verify_threshold_moments,
    verify_wald_moments,
)

__version__ = "0.1.0"

__all__ = [
    "Deterministic",
    "Exponential",
    "LogNormalUnitMean",
    "DiscreteFinite",
    "sample",
    "mean",
    "second_moment",
    "ess_inf",
    "quantile",
    "parse_service",
    "format_service",
    "MomentFunctionals",
    "ToleranceError",
    "gauss_kernel_max2",
    "gauss_kernel_max4",
    "functionals_signal",
    "functionals_age",
    "moment_functionals",
    "ThresholdSolution",
    "ConvergenceError",
    "solve_signal_threshold",
    "solve_age_threshold",
    "zero_wait_mse_optimal",
    "zero_wait_age_optimal",
    "asymptotic_ratio_check",
    "scan_sign_changes",
    "Periodic",
    "ZeroWait",
    "AgeThreshold",
    "SignalThreshold",
    "SimConfig",
    "SimResult",
    "simulate_policy",
    "CheckReport",
    "format_report",
    "run_suite",
    "verify_stopping_identity",
    "verify_threshold_moments",
    "verify_interval_decomposition",
    "verify_wald_moments",
    "__version__",
]
