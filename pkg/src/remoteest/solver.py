"""Fixed-point solvers for the optimal sampling thresholds.

The signal policy's optimal threshold beta solves

    E[max(beta, W_Y^2)] = max(1/f_max, E[max(beta^2, W_Y^4)] / (2 beta))

and the age policy solves the same equation with (Y, Y^2) in place of
(W_Y^2, W_Y^4). The residual is negative as beta -> 0 (the right side
diverges whenever E[Y^2] > 0) and positive for large beta, so a
geometric bracket expansion followed by bisection always lands on the
root from below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import functionals_age, functionals_signal
from .service import ServiceDistribution, mean, second_moment

__all__ = [
    "ThresholdSolution",
    "ConvergenceError",
    "solve_signal_threshold",
    "solve_age_threshold",
    "zero_wait_mse_optimal",
    "zero_wait_age_optimal",
    "asymptotic_ratio_check",
    "scan_sign_changes",
]

_BRACKET_CAP = 2.0**64
_REL_WIDTH = 1e-12
_RESIDUAL_TOL = 1e-9
_BINDING_REL = 1e-9


class ConvergenceError(RuntimeError):
    """The bracketing/bisection procedure failed its postcondition."""


@dataclass(frozen=True)
class ThresholdSolution:
    """Solved threshold and the value/rate bookkeeping that comes with it.

    ``beta`` is the squared signal threshold for the signal policy
    (samples trigger at |W_t - W_{S_i}| = sqrt(beta)) and the time
    threshold itself for the age policy.
    """

    beta: float
    mse: float
    expected_interval: float
    rate_constraint_binding: bool
    fmax: float
    policy_kind: str


def solve_signal_threshold(dist: ServiceDistribution, fmax: float) -> ThresholdSolution:
    """Optimal signal-difference threshold under a sampling-rate cap.

    Parameters
    ----------
    dist : ServiceDistribution
        Service law with finite second moment.
    fmax : float
        Maximum average sampling rate; ``math.inf`` removes the cap.

    Returns
    -------
    ThresholdSolution
        With mse = g2/(6 g1) + E[Y] at the solved beta.

    Raises
    ------
    ConvergenceError
        If no sign change is found below the bracket cap or the final
        residual exceeds 1e-9 relative.
    """
    return _solve(dist, fmax, "signal")


def solve_age_threshold(dist: ServiceDistribution, fmax: float) -> ThresholdSolution:
    """Optimal age threshold; mse = h2/(2 h1) + E[Y] at the solved beta."""
    return _solve(dist, fmax, "age")


def zero_wait_mse_optimal(dist: ServiceDistribution) -> bool:
    """Whether always sampling at delivery minimizes MSE: Y = 0 a.s."""
    return second_moment(dist) == 0.0


def zero_wait_age_optimal(dist: ServiceDistribution) -> bool:
    """Whether zero-wait minimizes average age: E[Y^2] <= 2 essinf(Y) E[Y]."""
    from .service import ess_inf

    return second_moment(dist) <= 2.0 * ess_inf(dist) * mean(dist)


def asymptotic_ratio_check(dist: ServiceDistribution, fmax_small: float) -> float:
    """Ratio of optimal signal MSE to optimal age MSE at a low rate cap.

    Tends to 1/3 as fmax_small -> 0 regardless of the service law.
    """
    sig = solve_signal_threshold(dist, fmax_small)
    age = solve_age_threshold(dist, fmax_small)
    return sig.mse / age.mse


def scan_sign_changes(
    dist: ServiceDistribution,
    fmax: float,
    policy_kind: str,
    grid: np.ndarray | None = None,
) -> list[tuple[float, float]]:
    """Dense-grid sign-change scan of the fixed-point residual.

    Independent root-location route used to cross-check the bisection
    solver; returns every bracketing interval it finds, so a result of
    length > 1 flags a non-unique root on the scanned range.
    """
    if grid is None:
        grid = np.geomspace(1e-8, 1e6, 200)
    funcs = _FUNCTIONALS[_check_kind(policy_kind)]
    inv_f = _inverse_rate(fmax)
    vals = []
    for b in grid:
        m1, m2 = funcs(float(b), dist)
        vals.append(m1 - max(inv_f, m2 / (2.0 * float(b))))
    out = []
    for i in range(len(vals) - 1):
        if (vals[i] < 0.0) != (vals[i + 1] < 0.0):
            out.append((float(grid[i]), float(grid[i + 1])))
    return out


_FUNCTIONALS = {"signal": functionals_signal, "age": functionals_age}


def _solve(dist: ServiceDistribution, fmax: float, kind: str) -> ThresholdSolution:
    _check_kind(kind)
    if not (fmax > 0.0):
        raise ValueError(f"fmax must be positive or infinite, got {fmax}")
    ey = mean(dist)
    inv_f = _inverse_rate(fmax)

    if second_moment(dist) == 0.0:
        return _solve_degenerate(fmax, inv_f, kind)

    funcs = _FUNCTIONALS[kind]

    def residual(b: float) -> float:
        m1, m2 = funcs(b, dist)
        return m1 - max(inv_f, m2 / (2.0 * b))

    lo, hi = 1e-12, 1.0
    if residual(lo) >= 0.0:
        raise ConvergenceError("residual is not negative at the lower bracket end")
    while residual(hi) < 0.0:
        lo = hi
        hi *= 2.0
        if hi > _BRACKET_CAP:
            raise ConvergenceError(f"no sign change below beta = {_BRACKET_CAP:.3e}")
    while hi - lo > _REL_WIDTH * hi:
        mid = 0.5 * (lo + hi)
        if residual(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    beta = 0.5 * (lo + hi)

    m1, m2 = funcs(beta, dist)
    rhs = m2 / (2.0 * beta)
    if abs(m1 - max(inv_f, rhs)) > _RESIDUAL_TOL * max(1.0, m1):
        raise ConvergenceError(f"residual {m1 - max(inv_f, rhs):.3e} at beta={beta:.6e}")
    binding = inv_f >= rhs * (1.0 - _BINDING_REL)
    mse = m2 / (6.0 * m1) + ey if kind == "signal" else m2 / (2.0 * m1) + ey
    return ThresholdSolution(
        beta=beta,
        mse=mse,
        expected_interval=m1,
        rate_constraint_binding=binding,
        fmax=fmax,
        policy_kind=kind,
    )


def _solve_degenerate(fmax: float, inv_f: float, kind: str) -> ThresholdSolution:
    # Y = 0 a.s.: the fixed point collapses to beta = max(1/fmax, beta/2)
    if math.isinf(fmax):
        return ThresholdSolution(0.0, 0.0, 0.0, False, fmax, kind)
    beta = inv_f
    mse = beta / 6.0 if kind == "signal" else beta / 2.0
    return ThresholdSolution(beta, mse, beta, True, fmax, kind)


def _inverse_rate(fmax: float) -> float:
    return 0.0 if math.isinf(fmax) else 1.0 / fmax


def _check_kind(kind: str) -> str:
    if kind not in ("signal", "age"):
        raise ValueError(f"policy_kind must be 'signal' or 'age', got {kind!r}")
    return kind
