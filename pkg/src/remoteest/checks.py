"""Self-validation suite: stopping identities, moment checks, orderings.

Each check simulates both sides of an exact relation and reports the
measured discrepancy against an allowance that combines a fixed budget
for grid bias with four standard errors of Monte Carlo noise. The
relations validated:

* stopping identity: E[integral of W^2 up to tau] = E[W_tau^4]/6 for a
  stopping time tau (fixed horizon, or two-sided barrier at sqrt(beta));
* Wald moments of the stopped value W_Y: mean 0, second moment E[Y],
  fourth moment 3 E[Y^2];
* signal-threshold interval moments: E[interval] and E[(stamp
  increment)^4] against the quadrature functionals;
* interval decomposition: the per-delivery-interval integral of the
  squared deviation equals (1/6) E[(stamp increment)^4] +
  E[interval] E[Y], evaluated on shared sample paths.

Suites bundle these at the documented budgets along with solver
postconditions and simulated policy orderings.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _mc
from .kernels import functionals_age, functionals_signal
from .service import (
    Exponential,
    ServiceDistribution,
    _dist_params,
    format_service,
    mean,
    sample,
    second_moment,
)
from .simulate import (
    AgeThreshold,
    Periodic,
    SignalThreshold,
    SimConfig,
    ZeroWait,
    simulate_policy,
)
from .solver import solve_age_threshold, solve_signal_threshold

__all__ = [
    "CheckReport",
    "format_report",
    "verify_stopping_identity",
    "verify_threshold_moments",
    "verify_interval_decomposition",
    "verify_wald_moments",
    "run_identity_suite",
    "run_solver_suite",
    "run_ordering_suite",
    "run_suite",
]

_REL_FLOOR = 1e-12


@dataclass(frozen=True)
class CheckReport:
    """One validated relation.

    err and tol share a convention: relative to rhs when rhs is
    meaningfully nonzero, absolute otherwise (detail says which).
    For one-sided ordering checks err is signed and may be negative.
    """

    name: str
    lhs: float
    rhs: float
    err: float
    tol: float
    passed: bool
    detail: str = ""


def format_report(report: CheckReport) -> str:
    status = "PASS" if report.passed else "FAIL"
    line = (f"[{report.name}] lhs={report.lhs:.6g} rhs={report.rhs:.6g} "
            f"err={report.err:.3g} tol={report.tol:.3g} {status}")
    if report.detail:
        line += f" ({report.detail})"
    return line


def _mean_se(total: float, total_sq: float, n: int) -> tuple[float, float]:
    m = total / n
    if n < 2:
        return m, 0.0
    var = max((total_sq - n * m * m) / (n - 1), 0.0)
    return m, math.sqrt(var / n)


def _two_sided(name: str, lhs: float, rhs: float, se: float,
               floor: float, detail: str) -> CheckReport:
    if abs(rhs) > _REL_FLOOR:
        err = abs(lhs - rhs) / abs(rhs)
        tol = max(floor, 4.0 * se / abs(rhs))
    else:
        err = abs(lhs - rhs)
        tol = max(4.0 * se, _REL_FLOOR)
        detail = (detail + " " if detail else "") + "abs"
    return CheckReport(name, lhs, rhs, err, tol, err <= tol, detail)


def _seed64(seed: int, tag: int) -> np.uint64:
    return np.random.SeedSequence((seed, tag)).generate_state(1, np.uint64)[0]


def verify_stopping_identity(kind: str, value: float, paths: int = 10**5,
                             dt: float = 1e-3, seed: int = 0) -> CheckReport:
    """Check E[integral W^2] = E[W_tau^4]/6 for one stopping rule.

    kind "fixed" stops at time `value`; kind "barrier" stops when |W|
    first reaches sqrt(value), detected on the grid.
    """
    if paths < 1:
        raise ValueError("paths must be >= 1")
    if kind == "fixed":
        if value < 0.0:
            raise ValueError("fixed stopping time must be >= 0")
        n0 = int(round(value / dt))
        sl, sql, sr, sqr = _mc.fixed_time_identity_kernel(
            paths, n0, dt, _seed64(seed, 1))
        censored = 0
    elif kind == "barrier":
        if value < 0.0:
            raise ValueError("barrier must be >= 0")
        kmax = int(200.0 * max(value, 1.0) / dt)
        sl, sql, sr, sqr, censored = _mc.barrier_identity_kernel(
            paths, value, dt, kmax, _seed64(seed, 2))
    else:
        raise ValueError(f"unknown stopping kind {kind!r}")
    lhs, se_l = _mean_se(sl, sql, paths)
    rhs_raw, se_r = _mean_se(sr, sqr, paths)
    rhs = rhs_raw / 6.0
    se = math.hypot(se_l, se_r / 6.0)
    detail = f"kind={kind} value={value:g} paths={paths} dt={dt:g}"
    if censored:
        detail += f" censored={censored}"
    return _two_sided(f"stopping-identity-{kind}", lhs, rhs, se, 0.02, detail)


def verify_threshold_moments(beta: float, dist: ServiceDistribution,
                             paths: int = 10**5, dt: float = 2e-5,
                             seed: int = 0) -> list[CheckReport]:
    """Check the two signal-threshold interval moments against quadrature.

    Simulates tau = Y + Z and the stamp increment under the rule "stop
    at the first time past delivery with |W - W_stamp| >= sqrt(beta)"
    and compares E[tau] and E[(increment)^4] with the g functionals.
    """
    if beta < 0.0:
        raise ValueError("beta must be >= 0")
    if paths < 2:
        raise ValueError("paths must be >= 2")
    dkind, dparam, _b, dvals, dcum = _dist_params(dist)
    kmax = int(200.0 * max(beta, 1.0) / dt)
    st, sqt, s4, sq4, censored = _mc.threshold_moment_kernel(
        paths, beta, dkind, dparam, dvals, dcum, dt, kmax, _seed64(seed, 3))
    tau, se_t = _mean_se(st, sqt, paths)
    d4, se_4 = _mean_se(s4, sq4, paths)
    g1, g2 = functionals_signal(beta, dist)
    detail = f"beta={beta:g} dist={format_service(dist)} paths={paths} dt={dt:g}"
    if censored:
        detail += f" censored={censored}"
    return [
        _two_sided("threshold-interval-mean", tau, g1, se_t, 0.02, detail),
        _two_sided("threshold-fourth-moment", d4, g2, se_4, 0.02, detail),
    ]


def verify_interval_decomposition(beta: float, dist: ServiceDistribution,
                                  cycles: int = 10**5, dt: float = 1e-4,
                                  seed: int = 0) -> CheckReport:
    """Check the per-interval error integral against its decomposition.

    Runs chained signal-threshold cycles on one path; the left side is
    the average of the integral of (W - W_stamp)^2 over a delivery
    interval, the right side is (1/6) E[(stamp increment)^4] +
    E[interval] E[Y] built from the same run.
    """
    if beta < 0.0:
        raise ValueError("beta must be >= 0")
    if cycles < 3:
        raise ValueError("cycles must be >= 3")
    dkind, dparam, _b, dvals, dcum = _dist_params(dist)
    kmax = int(200.0 * max(beta, 1.0) / dt)
    (sl, sql, n_obs, s4, sq4, si, sqi, sy, censored) = _mc.cycle_decomposition_kernel(
        cycles, beta, dkind, dparam, dvals, dcum, dt, kmax, _seed64(seed, 4))
    lhs, se_l = _mean_se(sl, sql, n_obs)
    d4, se_4 = _mean_se(s4, sq4, cycles)
    mint, se_i = _mean_se(si, sqi, cycles)
    my = sy / cycles
    ey = mean(dist)
    rhs = d4 / 6.0 + mint * ey
    se_r = math.hypot(se_4 / 6.0, se_i * ey)
    se = math.hypot(se_l, se_r)
    detail = (f"beta={beta:g} dist={format_service(dist)} cycles={cycles} "
              f"dt={dt:g} mean_y={my:.4g}")
    if censored:
        detail += f" censored={censored}"
    return _two_sided("interval-decomposition", lhs, rhs, se, 0.03, detail)


def verify_wald_moments(dist: ServiceDistribution, paths: int = 10**7,
                        seed: int = 0) -> list[CheckReport]:
    """Check E[W_Y] = 0, E[W_Y^2] = E[Y], E[W_Y^4] = 3 E[Y^2] by sampling."""
    if paths < 2:
        raise ValueError("paths must be >= 2")
    rng = np.random.default_rng(np.random.SeedSequence((seed, 5)))
    y = sample(dist, rng, size=paths)
    w = np.sqrt(y) * rng.standard_normal(paths)
    detail = f"dist={format_service(dist)} paths={paths}"
    reports = []
    for name, emp, exact in [
        ("wald-mean", w, 0.0),
        ("wald-second-moment", w * w, mean(dist)),
        ("wald-fourth-moment", w**4, 3.0 * second_moment(dist)),
    ]:
        m = float(np.mean(emp))
        se = float(np.std(emp, ddof=1) / np.sqrt(paths))
        if abs(exact) > _REL_FLOOR:
            err = abs(m - exact) / exact
            tol = max(4.0 * se / exact, _REL_FLOOR)
            d = detail
        else:
            err = abs(m)
            tol = max(4.0 * se, _REL_FLOOR)
            d = detail + " abs"
        reports.append(CheckReport(name, m, exact, err, tol, err <= tol, d))
    return reports


def _ordering_report(name: str, lo_label: str, hi_label: str,
                     lo: float, lo_se: float, hi: float, hi_se: float) -> CheckReport:
    slack = 4.0 * math.hypot(lo_se, hi_se)
    err = lo - hi
    return CheckReport(name, lo, hi, err, slack, err <= slack,
                       f"{lo_label} <= {hi_label} within 4se")


def run_identity_suite(seed: int = 0) -> list[CheckReport]:
    """Stopping, Wald, threshold-moment, and decomposition checks."""
    exp1 = Exponential(1.0)
    reports = [
        verify_stopping_identity("fixed", 0.0, paths=10**3, dt=1e-3, seed=seed),
        verify_stopping_identity("fixed", 1.0, paths=10**5, dt=1e-3, seed=seed),
        verify_stopping_identity("barrier", 1.0, paths=10**6, dt=1e-4, seed=seed),
    ]
    reports.extend(verify_wald_moments(exp1, paths=10**7, seed=seed))
    reports.extend(verify_threshold_moments(1.0, exp1, paths=10**5, dt=2e-5, seed=seed))
    reports.extend(verify_threshold_moments(0.0, exp1, paths=10**6, dt=2e-5, seed=seed))
    beta_opt = solve_signal_threshold(exp1, math.inf).beta
    reports.append(verify_interval_decomposition(beta_opt, exp1, cycles=10**5,
                                                 dt=1e-4, seed=seed))
    reports.append(verify_interval_decomposition(0.0, exp1, cycles=10**5,
                                                 dt=1e-4, seed=seed))
    return reports


def run_solver_suite() -> list[CheckReport]:
    """Residual and fixed-point postconditions on representative cases."""
    from .service import Deterministic, LogNormalUnitMean

    cases = [
        (Exponential(1.0), math.inf),
        (Exponential(1.0), 0.3),
        (Deterministic(1.0), math.inf),
        (LogNormalUnitMean(1.5), 0.8),
    ]
    reports = []
    for dist, fmax in cases:
        label = f"{format_service(dist)}@fmax={fmax:g}"
        for kind, solve, functionals in [
            ("signal", solve_signal_threshold, functionals_signal),
            ("age", solve_age_threshold, functionals_age),
        ]:
            sol = solve(dist, fmax)
            m1, m2 = functionals(sol.beta, dist)
            inv_f = 0.0 if math.isinf(fmax) else 1.0 / fmax
            resid = abs(m1 - max(inv_f, m2 / (2.0 * sol.beta)))
            scale = max(1.0, m1)
            reports.append(CheckReport(
                f"solver-residual-{kind}", m1, max(inv_f, m2 / (2.0 * sol.beta)),
                resid / scale, 1e-9, resid / scale <= 1e-9, label))
            if math.isinf(fmax):
                factor = 3.0 if kind == "signal" else 1.0
                lhs = sol.beta
                rhs = factor * (sol.mse - mean(dist))
                err = abs(lhs - rhs)
                reports.append(CheckReport(
                    f"solver-fixed-point-{kind}", lhs, rhs, err, 1e-8,
                    err <= 1e-8, label + " abs"))
    return reports


def run_ordering_suite(seed: int = 0) -> list[CheckReport]:
    """Simulated MSE orderings across policies at matched rates."""
    exp1 = Exponential(1.0)

    def cfg(tag: int) -> SimConfig:
        return SimConfig(horizon=2e4, dt=1e-3, seed=seed * 1000 + tag,
                         replications=8)

    fmax = 0.8
    sig = solve_signal_threshold(exp1, fmax)
    age = solve_age_threshold(exp1, fmax)
    r_sig = simulate_policy(SignalThreshold(sig.beta), exp1, cfg(1))
    r_age = simulate_policy(AgeThreshold(age.beta), exp1, cfg(2))
    r_per = simulate_policy(Periodic(1.0 / fmax), exp1, cfg(3))
    reports = [
        _ordering_report("ordering-signal-vs-age", "signal", "age",
                         r_sig.mse, r_sig.se_mse, r_age.mse, r_age.se_mse),
        _ordering_report("ordering-age-vs-periodic", "age", "periodic",
                         r_age.mse, r_age.se_mse, r_per.mse, r_per.se_mse),
    ]

    fmax = 1.5
    sig = solve_signal_threshold(exp1, fmax)
    age = solve_age_threshold(exp1, fmax)
    r_sig = simulate_policy(SignalThreshold(sig.beta), exp1, cfg(4))
    r_age = simulate_policy(AgeThreshold(age.beta), exp1, cfg(5))
    r_zw = simulate_policy(ZeroWait(), exp1, cfg(6))
    reports.extend([
        _ordering_report("ordering-signal-vs-age-high-rate", "signal", "age",
                         r_sig.mse, r_sig.se_mse, r_age.mse, r_age.se_mse),
        _ordering_report("ordering-age-vs-zero-wait", "age", "zero-wait",
                         r_age.mse, r_age.se_mse, r_zw.mse, r_zw.se_mse),
    ])
    return reports


def run_suite(name: str, seed: int = 0) -> list[CheckReport]:
    """Run one named suite, or all of them."""
    if name == "identities":
        return run_identity_suite(seed)
    if name == "solver":
        return run_solver_suite()
    if name == "ordering":
        return run_ordering_suite(seed)
    if name == "all":
        return (run_identity_suite(seed) + run_solver_suite()
                + run_ordering_suite(seed))
    raise ValueError(f"unknown suite {name!r}")
