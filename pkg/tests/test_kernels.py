"""Moment-functional tests.

The closed-form Gaussian kernels are gated behind a brute-force
quadrature oracle: the golden table below was produced by adaptive
integration of max(beta, y z^2) phi(z) and max(beta^2, y^2 z^4) phi(z)
over z in (-8, 8) (scipy quad, epsrel 1e-12), independently of the
package code. The exponential age closed form is likewise pinned to
numeric integration values.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from remoteest import (
    Deterministic,
    DiscreteFinite,
    Exponential,
    LogNormalUnitMean,
    functionals_age,
    functionals_signal,
    gauss_kernel_max2,
    gauss_kernel_max4,
    mean,
    moment_functionals,
    second_moment,
)

# (beta, y) -> oracle E[max(beta, y Z^2)], oracle E[max(beta^2, y^2 Z^4)]
KERNEL_ORACLE = [
    (0.01, 0.1, 1.016654460327e-01, 3.001994753818e-02),
    (0.01, 1.0, 1.000531391687e00, 3.000006375481e00),
    (0.01, 10.0, 1.000016819201e01, 3.000000020177e02),
    (0.1, 0.1, 1.483941449038e-01, 3.570386811874e-02),
    (0.1, 1.0, 1.016654460327e00, 3.001994753818e00),
    (0.1, 10.0, 1.000531391687e01, 3.000006375481e02),
    (1.0, 0.1, 1.000291211288e00, 1.000691655126e00),
    (1.0, 1.0, 1.483941449038e00, 3.570386811874e00),
    (1.0, 10.0, 1.016654460327e01, 3.001994753818e02),
    (10.0, 0.1, 1.000000000000e01, 1.000000000000e02),
    (10.0, 1.0, 1.000291211288e01, 1.000691655126e02),
    (10.0, 10.0, 1.483941449038e01, 3.570386811874e02),
]

# Exponential(1), beta=1: nested quadrature of the kernels over the
# exponential density (epsrel 1e-11)
G1_EXP1_BETA1 = 1.586935717511
G2_EXP1_BETA1 = 6.667952677814

# Exponential(1), beta=1: numeric integration of max(beta,y) e^{-y}
# and max(beta^2,y^2) e^{-y}
H1_EXP1_BETA1 = 1.3678794411714423
H2_EXP1_BETA1 = 2.4715177646857764


@pytest.mark.parametrize("beta,y,k2,k4", KERNEL_ORACLE)
def test_kernels_match_quadrature_oracle(beta, y, k2, k4):
    assert gauss_kernel_max2(beta, y) == pytest.approx(k2, rel=1e-8)
    assert gauss_kernel_max4(beta, y) == pytest.approx(k4, rel=1e-8)


def test_kernels_beta_zero():
    assert gauss_kernel_max2(0.0, 1.0) == pytest.approx(1.0, rel=1e-12)
    assert gauss_kernel_max4(0.0, 1.0) == pytest.approx(3.0, rel=1e-12)
    for y in (0.1, 10.0):
        assert gauss_kernel_max2(0.0, y) == pytest.approx(y, rel=1e-12)
        assert gauss_kernel_max4(0.0, y) == pytest.approx(3.0 * y * y, rel=1e-12)


def test_kernels_saturate_for_large_beta():
    assert gauss_kernel_max2(100.0, 1.0) == pytest.approx(100.0, rel=1e-6)
    assert abs(gauss_kernel_max4(10.0, 1.0) - 100.0) / 100.0 < 0.005
    # far past the crossover the max is the constant branch exactly
    assert gauss_kernel_max2(1e9, 1.0) == pytest.approx(1e9, rel=1e-12)
    assert gauss_kernel_max4(1e9, 1.0) == pytest.approx(1e18, rel=1e-12)


def test_kernels_zero_service_time_continuity():
    assert gauss_kernel_max2(2.0, 0.0) == 2.0
    assert gauss_kernel_max4(2.0, 0.0) == 4.0


def test_kernels_reject_negative_arguments():
    with pytest.raises(ValueError):
        gauss_kernel_max2(-0.1, 1.0)
    with pytest.raises(ValueError):
        gauss_kernel_max2(1.0, -0.1)
    with pytest.raises(ValueError):
        gauss_kernel_max4(-0.1, 1.0)
    with pytest.raises(ValueError):
        gauss_kernel_max4(1.0, -0.1)


def test_functionals_signal_exponential_golden():
    g1, g2 = functionals_signal(1.0, Exponential(1.0))
    assert g1 == pytest.approx(G1_EXP1_BETA1, rel=1e-9)
    assert g2 == pytest.approx(G2_EXP1_BETA1, rel=1e-9)


ALL_DISTS = [
    Deterministic(1.0),
    Exponential(1.0),
    Exponential(0.4),
    LogNormalUnitMean(0.25),
    LogNormalUnitMean(2.0),
    DiscreteFinite(((1.0, 0.5), (2.0, 0.5))),
    DiscreteFinite(((0.0, 0.25), (1.5, 0.75))),
]


@pytest.mark.parametrize("dist", ALL_DISTS, ids=str)
def test_functionals_beta_zero_identities(dist):
    g1, g2 = functionals_signal(0.0, dist)
    h1, h2 = functionals_age(0.0, dist)
    assert g1 == pytest.approx(mean(dist), rel=1e-8)
    assert g2 == pytest.approx(3.0 * second_moment(dist), rel=1e-8)
    assert h1 == pytest.approx(mean(dist), rel=1e-8)
    assert h2 == pytest.approx(second_moment(dist), rel=1e-8)


def test_functionals_age_exponential_closed_form():
    h1, h2 = functionals_age(1.0, Exponential(1.0))
    assert h1 == pytest.approx(H1_EXP1_BETA1, rel=1e-10)
    assert h2 == pytest.approx(H2_EXP1_BETA1, rel=1e-10)
    # independent numeric route at other thresholds and means
    for beta in (0.3, 2.5):
        for m in (1.0, 0.7):
            pdf = lambda y: math.exp(-y / m) / m
            n1 = quad(lambda y: beta * pdf(y), 0, beta)[0] + quad(lambda y: y * pdf(y), beta, np.inf)[0]
            n2 = quad(lambda y: beta * beta * pdf(y), 0, beta)[0] + quad(lambda y: y * y * pdf(y), beta, np.inf)[0]
            h1, h2 = functionals_age(beta, Exponential(m))
            assert h1 == pytest.approx(n1, rel=1e-9)
            assert h2 == pytest.approx(n2, rel=1e-9)


def test_functionals_age_lognormal_vs_quadrature():
    # independent route: integrate max(beta, y(x)) over the Gaussian in x
    from scipy.stats import norm

    for sigma in (0.5, 1.5, 2.0):
        for beta in (0.4, 1.0, 3.0):
            yx = lambda x: math.exp(sigma * x - 0.5 * sigma * sigma)
            xstar = (math.log(beta) + 0.5 * sigma * sigma) / sigma
            n1 = quad(lambda x: max(beta, yx(x)) * norm.pdf(x), -12, 12, points=[xstar], limit=200)[0]
            n2 = quad(lambda x: max(beta * beta, yx(x) ** 2) * norm.pdf(x), -12, 12, points=[xstar], limit=200)[0]
            h1, h2 = functionals_age(beta, LogNormalUnitMean(sigma))
            assert h1 == pytest.approx(n1, rel=1e-8)
            assert h2 == pytest.approx(n2, rel=1e-8)


def test_lognormal_heavy_tail_second_moment():
    # sigma=2 puts ~1% of E[Y^2] beyond the 1-1e-10 quantile; the
    # functionals must still hit the exact beta=0 value
    g1, g2 = functionals_signal(0.0, LogNormalUnitMean(2.0))
    assert g1 == pytest.approx(1.0, rel=1e-8)
    assert g2 == pytest.approx(3.0 * math.exp(4.0), rel=1e-8)


@pytest.mark.parametrize("dist", ALL_DISTS, ids=str)
def test_functionals_monotone_in_beta(dist):
    betas = [0.0, 0.05, 0.3, 1.0, 4.0, 20.0]
    sig = [functionals_signal(b, dist) for b in betas]
    age = [functionals_age(b, dist) for b in betas]
    for lo, hi in zip(sig, sig[1:]):
        assert hi[0] >= lo[0] - 1e-10 * max(1.0, abs(lo[0]))
        assert hi[1] >= lo[1] - 1e-10 * max(1.0, abs(lo[1]))
    for lo, hi in zip(age, age[1:]):
        assert hi[0] >= lo[0] - 1e-12
        assert hi[1] >= lo[1] - 1e-12


@pytest.mark.parametrize("dist", ALL_DISTS, ids=str)
@pytest.mark.parametrize("beta", [0.0, 0.5, 2.0, 10.0])
def test_sandwich_bounds(dist, beta):
    ey = mean(dist)
    ey2 = second_moment(dist)
    g1, g2 = functionals_signal(beta, dist)
    tol = 1e-9 * max(1.0, beta, ey)
    assert beta - tol <= g1 <= beta + ey + tol
    tol2 = 1e-9 * max(1.0, beta * beta, ey2)
    assert beta * beta - tol2 <= g2 <= beta * beta + 3.0 * ey2 + tol2


def test_functionals_exact_for_point_masses():
    g1, g2 = functionals_signal(2.0, Deterministic(0.0))
    assert (g1, g2) == (2.0, 4.0)
    # point mass at y reduces to the bare kernel
    for beta, y, k2, k4 in KERNEL_ORACLE[6:9]:
        g1, g2 = functionals_signal(beta, Deterministic(y))
        assert g1 == pytest.approx(k2, rel=1e-8)
        assert g2 == pytest.approx(k4, rel=1e-8)
    h1, h2 = functionals_age(0.5, Deterministic(1.0))
    assert (h1, h2) == (1.0, 1.0)


def test_functionals_discrete_mixture():
    dist = DiscreteFinite(((0.0, 0.25), (1.0, 0.75)))
    beta = 0.8
    g1, g2 = functionals_signal(beta, dist)
    assert g1 == pytest.approx(0.25 * beta + 0.75 * gauss_kernel_max2(beta, 1.0), rel=1e-12)
    assert g2 == pytest.approx(0.25 * beta**2 + 0.75 * gauss_kernel_max4(beta, 1.0), rel=1e-12)
    h1, h2 = functionals_age(beta, dist)
    assert h1 == pytest.approx(0.25 * beta + 0.75 * 1.0, rel=1e-12)
    assert h2 == pytest.approx(0.25 * beta**2 + 0.75 * 1.0, rel=1e-12)


def test_functionals_signal_monte_carlo_oracle():
    # direct simulation of max(beta, Y Z^2) and max(beta^2, Y^2 Z^4)
    rng = np.random.default_rng(20240816)
    n = 10_000_000
    y = rng.exponential(1.0, size=n)
    z2 = rng.standard_normal(size=n) ** 2
    beta = 1.0
    s1 = np.maximum(beta, y * z2)
    s2 = np.maximum(beta * beta, (y * z2) ** 2)
    g1, g2 = functionals_signal(beta, Exponential(1.0))
    for sample_vals, theory in ((s1, g1), (s2, g2)):
        m = sample_vals.mean()
        se = sample_vals.std(ddof=1) / math.sqrt(n)
        assert abs(m - theory) <= 4.0 * se


def test_moment_functionals_bundle():
    mf = moment_functionals(1.0, Exponential(1.0))
    assert mf.beta == 1.0
    assert mf.g1 == pytest.approx(G1_EXP1_BETA1, rel=1e-9)
    assert mf.g2 == pytest.approx(G2_EXP1_BETA1, rel=1e-9)
    assert mf.h1 == pytest.approx(H1_EXP1_BETA1, rel=1e-10)
    assert mf.h2 == pytest.approx(H2_EXP1_BETA1, rel=1e-10)
    assert 0.0 <= mf.rel_tol_achieved <= 1e-8
