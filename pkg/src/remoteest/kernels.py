"""Moment functionals of the optimal-threshold fixed-point equations.

For a threshold parameter beta and service law Y the four quantities are

    g1 = E[max(beta,  W_Y^2)]    g2 = E[max(beta^2, W_Y^4)]
    h1 = E[max(beta,  Y)]        h2 = E[max(beta^2, Y^2)]

where W is a standard Wiener process, so W_Y | Y=y ~ sqrt(y) Z with Z
standard normal. Conditioning on Y gives closed-form Gaussian kernels;
the expectation over Y is exact for point masses and finite discrete
laws and adaptive quadrature otherwise. The quadrature integrates over
x with y = quantile(F, Phi(x)), which keeps the integrand Gaussian-tame
for arbitrarily heavy (finite-variance) service tails instead of
truncating at a fixed quantile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.integrate import quad
from scipy.special import log_ndtr, ndtr

from .service import (
    Deterministic,
    DiscreteFinite,
    Exponential,
    LogNormalUnitMean,
    ServiceDistribution,
    mean,
    second_moment,
)

__all__ = [
    "MomentFunctionals",
    "ToleranceError",
    "gauss_kernel_max2",
    "gauss_kernel_max4",
    "functionals_signal",
    "functionals_age",
    "moment_functionals",
]

_REL_TOL = 1e-8
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
# beyond this the |Z| > a branch carries less than ~1e-300 mass
_A_SATURATED = 40.0


class ToleranceError(RuntimeError):
    """Quadrature failed to reach the required relative tolerance."""


@dataclass(frozen=True)
class MomentFunctionals:
    """The four functionals evaluated at one threshold value."""

    g1: float
    g2: float
    h1: float
    h2: float
    beta: float
    rel_tol_achieved: float


def gauss_kernel_max2(beta: float, y: float) -> float:
    """E[max(beta, y Z^2)] for standard normal Z.

    With a = sqrt(beta/y) the value is
    beta (2 Phi(a) - 1) + 2 y (a phi(a) + 1 - Phi(a)).
    Validated against brute-force quadrature over z (see the test
    suite's golden table). y = 0 returns beta by continuity.
    """
    _check_kernel_args(beta, y)
    if y == 0.0:
        return beta
    if beta == 0.0:
        return y
    # guard the ratio before dividing: denormal y would overflow it
    if y * (_A_SATURATED * _A_SATURATED) <= beta:
        return beta
    a = math.sqrt(beta / y)
    if a > _A_SATURATED:
        return beta
    tail = ndtr(-a)
    pdf = math.exp(-0.5 * a * a) * _INV_SQRT_2PI
    return beta * (1.0 - 2.0 * tail) + 2.0 * y * (a * pdf + tail)


def gauss_kernel_max4(beta: float, y: float) -> float:
    """E[max(beta^2, y^2 Z^4)] for standard normal Z.

    With a = sqrt(beta/y) the value is
    beta^2 (2 Phi(a) - 1) + 2 y^2 ((a^3 + 3a) phi(a) + 3(1 - Phi(a))).
    Validated against brute-force quadrature; y = 0 returns beta^2.
    """
    _check_kernel_args(beta, y)
    if y == 0.0:
        return beta * beta
    if beta == 0.0:
        return 3.0 * y * y
    if y * (_A_SATURATED * _A_SATURATED) <= beta:
        return beta * beta
    a = math.sqrt(beta / y)
    if a > _A_SATURATED:
        return beta * beta
    tail = ndtr(-a)
    pdf = math.exp(-0.5 * a * a) * _INV_SQRT_2PI
    return beta * beta * (1.0 - 2.0 * tail) + 2.0 * y * y * ((a * a * a + 3.0 * a) * pdf + 3.0 * tail)


def functionals_signal(beta: float, dist: ServiceDistribution) -> tuple[float, float]:
    """(g1, g2) = (E[max(beta, W_Y^2)], E[max(beta^2, W_Y^4)]).

    Exact summation for point masses and discrete laws; adaptive
    quadrature (relative tolerance 1e-8) for the continuous families.

    Raises
    ------
    ToleranceError
        If the quadrature error estimate exceeds the tolerance.
    """
    g1, g2, _ = _signal_with_tol(beta, dist)
    return g1, g2


def functionals_age(beta: float, dist: ServiceDistribution) -> tuple[float, float]:
    """(h1, h2) = (E[max(beta, Y)], E[max(beta^2, Y^2)]).

    Exact for point masses and discrete laws. Exponential and
    log-normal use closed forms; both are validated against numeric
    integration in the test suite.
    """
    _check_beta(beta)
    if isinstance(dist, Deterministic):
        return max(beta, dist.d), max(beta * beta, dist.d * dist.d)
    if isinstance(dist, DiscreteFinite):
        h1 = math.fsum(p * max(beta, v) for v, p in dist.atoms)
        h2 = math.fsum(p * max(beta * beta, v * v) for v, p in dist.atoms)
        return h1, h2
    if isinstance(dist, Exponential):
        # E[max(beta,Y)] = beta + m e^{-beta/m}; the squared version
        # adds the truncated second moment of the exponential tail
        m = dist.mean
        decay = math.exp(-beta / m)
        h1 = beta + m * decay
        h2 = beta * beta + decay * (2.0 * beta * m + 2.0 * m * m)
        return h1, h2
    if isinstance(dist, LogNormalUnitMean):
        s = dist.sigma
        if beta == 0.0:
            return 1.0, math.exp(s * s)
        # xs = Phi^{-1}(P[Y <= beta]); tail terms are lognormal partial moments
        xs = (math.log(beta) + 0.5 * s * s) / s
        cdf = ndtr(xs)
        h1 = beta * cdf + ndtr(s - xs)
        h2 = beta * beta * cdf + math.exp(s * s) * ndtr(2.0 * s - xs)
        return h1, h2
    raise TypeError(f"unknown service distribution {dist!r}")


def moment_functionals(beta: float, dist: ServiceDistribution) -> MomentFunctionals:
    """All four functionals at one beta, with the achieved tolerance."""
    g1, g2, rel = _signal_with_tol(beta, dist)
    h1, h2 = functionals_age(beta, dist)
    return MomentFunctionals(g1=g1, g2=g2, h1=h1, h2=h2, beta=beta, rel_tol_achieved=rel)


def _signal_with_tol(beta: float, dist: ServiceDistribution) -> tuple[float, float, float]:
    _check_beta(beta)
    if isinstance(dist, Deterministic):
        return gauss_kernel_max2(beta, dist.d), gauss_kernel_max4(beta, dist.d), 0.0
    if isinstance(dist, DiscreteFinite):
        g1 = math.fsum(p * gauss_kernel_max2(beta, v) for v, p in dist.atoms)
        g2 = math.fsum(p * gauss_kernel_max4(beta, v) for v, p in dist.atoms)
        return g1, g2, 0.0
    y_of_x, lo, hi = _gaussian_pullback(dist)
    g1, r1 = _quad_gauss(lambda x: gauss_kernel_max2(beta, y_of_x(x)), lo, hi,
                         max(beta, mean(dist)))
    g2, r2 = _quad_gauss(lambda x: gauss_kernel_max4(beta, y_of_x(x)), lo, hi,
                         max(beta * beta, 3.0 * second_moment(dist)))
    rel = max(r1, r2)
    _require_tol(rel)
    return g1, g2, rel


def _gaussian_pullback(dist: ServiceDistribution):
    """Express Y = y(X) with X standard normal, plus integration bounds."""
    if isinstance(dist, Exponential):
        m = dist.mean
        # quantile at Phi(x): -m log(1 - Phi(x)), stable via log_ndtr(-x)
        return (lambda x: -m * log_ndtr(-x)), -40.0, 40.0
    if isinstance(dist, LogNormalUnitMean):
        s = dist.sigma
        # upper bound shifted past the e^{2 s x} tilt of the heaviest integrand
        return (lambda x: math.exp(s * x - 0.5 * s * s)), -40.0, 40.0 + 2.0 * s
    raise TypeError(f"no quadrature pullback for {dist!r}")


def _quad_gauss(kernel, lo: float, hi: float, scale: float) -> tuple[float, float]:
    """Integrate kernel(x) phi(x) over (lo, hi); returns (value, rel err)."""
    out = quad(
        lambda x: kernel(x) * math.exp(-0.5 * x * x) * _INV_SQRT_2PI,
        lo,
        hi,
        epsabs=1e-13 * max(scale, 1e-300),
        epsrel=1e-11,
        limit=300,
        full_output=1,
    )
    val, err = out[0], out[1]
    rel = err / max(abs(val), 1e-300)
    return val, rel


def _require_tol(rel: float) -> None:
    if not (rel <= _REL_TOL):
        raise ToleranceError(f"quadrature reached relative error {rel:.3e} > {_REL_TOL:.0e}")


def _check_kernel_args(beta: float, y: float) -> None:
    if not (beta >= 0.0):
        raise ValueError(f"kernel requires beta >= 0, got {beta}")
    if not (y >= 0.0):
        raise ValueError(f"kernel requires y >= 0, got {y}")


def _check_beta(beta: float) -> None:
    if not (beta >= 0.0 and math.isfinite(beta)):
        raise ValueError(f"functionals require finite beta >= 0, got {beta}")
