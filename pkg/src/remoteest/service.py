"""Service-time distributions: sampling, exact moments, support info.

Four variants cover the experiments and the exact-expectation unit
tests: point mass, exponential, unit-mean log-normal, and a finite
discrete law. Distribution objects are immutable; random draws go
through a caller-supplied ``numpy.random.Generator``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.special import ndtri

__all__ = [
    "Deterministic",
    "Exponential",
    "LogNormalUnitMean",
    "DiscreteFinite",
    "ServiceDistribution",
    "sample",
    "mean",
    "second_moment",
    "ess_inf",
    "quantile",
    "parse_service",
    "format_service",
]

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class Deterministic:
    """Point mass at ``d`` (service always takes exactly ``d`` time units)."""

    d: float

    def __post_init__(self):
        if not (self.d >= 0.0 and math.isfinite(self.d)):
            raise ValueError(f"Deterministic requires d >= 0, got {self.d}")


@dataclass(frozen=True)
class Exponential:
    """Exponential service time with the given mean."""

    mean: float

    def __post_init__(self):
        if not (self.mean > 0.0 and math.isfinite(self.mean)):
            raise ValueError(f"Exponential requires mean > 0, got {self.mean}")


@dataclass(frozen=True)
class LogNormalUnitMean:
    """Log-normal service time normalized to unit mean.

    Y = e^{sigma X} / E[e^{sigma X}] = e^{sigma X - sigma^2/2} with X
    standard normal, so ``mean() == 1`` exactly by construction and the
    scale parameter sigma controls the spread alone.
    """

    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise ValueError(f"LogNormalUnitMean requires sigma > 0, got {self.sigma}")


@dataclass(frozen=True)
class DiscreteFinite:
    """Finite discrete law given as ``((value, prob), ...)`` atoms.

    Atoms are stored sorted by value; probabilities must sum to 1
    within 1e-12.
    """

    atoms: tuple[tuple[float, float], ...] = field()

    def __post_init__(self):
        atoms = tuple(sorted((float(v), float(p)) for v, p in self.atoms))
        if not atoms:
            raise ValueError("DiscreteFinite requires at least one atom")
        for v, p in atoms:
            if not (v >= 0.0 and math.isfinite(v)):
                raise ValueError(f"DiscreteFinite atom value must be >= 0, got {v}")
            if not (0.0 < p <= 1.0):
                raise ValueError(f"DiscreteFinite atom prob must lie in (0,1], got {p}")
        total = math.fsum(p for _, p in atoms)
        if abs(total - 1.0) > _PROB_TOL:
            raise ValueError(f"DiscreteFinite probabilities sum to {total}, not 1")
        object.__setattr__(self, "atoms", atoms)


ServiceDistribution = Union[Deterministic, Exponential, LogNormalUnitMean, DiscreteFinite]


def sample(dist: ServiceDistribution, rng: np.random.Generator, size=None):
    """Draw i.i.d. service times from ``dist``.

    Parameters
    ----------
    dist : ServiceDistribution
    rng : numpy.random.Generator
        Source of randomness; the stream is advanced.
    size : int or None
        ``None`` returns a scalar float, otherwise an array of draws.

    Returns
    -------
    float or ndarray
    """
    if isinstance(dist, Deterministic):
        if size is None:
            return dist.d
        return np.full(size, dist.d)
    if isinstance(dist, Exponential):
        out = rng.exponential(dist.mean, size=size)
        return float(out) if size is None else out
    if isinstance(dist, LogNormalUnitMean):
        x = rng.standard_normal(size=size)
        out = np.exp(dist.sigma * x - 0.5 * dist.sigma * dist.sigma)
        return float(out) if size is None else out
    if isinstance(dist, DiscreteFinite):
        values, cum = _atom_arrays(dist)
        u = rng.random(size=size)
        idx = np.searchsorted(cum, u, side="right")
        out = values[idx]
        return float(out) if size is None else out
    raise TypeError(f"unknown service distribution {dist!r}")


def mean(dist: ServiceDistribution) -> float:
    """Exact E[Y]."""
    if isinstance(dist, Deterministic):
        return dist.d
    if isinstance(dist, Exponential):
        return dist.mean
    if isinstance(dist, LogNormalUnitMean):
        return 1.0
    if isinstance(dist, DiscreteFinite):
        return math.fsum(v * p for v, p in dist.atoms)
    raise TypeError(f"unknown service distribution {dist!r}")


def second_moment(dist: ServiceDistribution) -> float:
    """Exact E[Y^2]."""
    if isinstance(dist, Deterministic):
        return dist.d * dist.d
    if isinstance(dist, Exponential):
        return 2.0 * dist.mean * dist.mean
    if isinstance(dist, LogNormalUnitMean):
        return math.exp(dist.sigma * dist.sigma)
    if isinstance(dist, DiscreteFinite):
        return math.fsum(v * v * p for v, p in dist.atoms)
    raise TypeError(f"unknown service distribution {dist!r}")


def ess_inf(dist: ServiceDistribution) -> float:
    """Essential infimum of Y: the largest y with P[Y < y] = 0."""
    if isinstance(dist, Deterministic):
        return dist.d
    if isinstance(dist, Exponential):
        return 0.0
    if isinstance(dist, LogNormalUnitMean):
        return 0.0
    if isinstance(dist, DiscreteFinite):
        return dist.atoms[0][0]
    raise TypeError(f"unknown service distribution {dist!r}")


def quantile(dist: ServiceDistribution, p: float) -> float:
    """Inverse CDF at ``p``; generalized inverse for the discrete law.

    Rejects p outside the open interval (0, 1).
    """
    if not (0.0 < p < 1.0):
        raise ValueError(f"quantile requires p in (0,1), got {p}")
    if isinstance(dist, Deterministic):
        return dist.d
    if isinstance(dist, Exponential):
        return -dist.mean * math.log1p(-p)
    if isinstance(dist, LogNormalUnitMean):
        return math.exp(dist.sigma * ndtri(p) - 0.5 * dist.sigma * dist.sigma)
    if isinstance(dist, DiscreteFinite):
        values, cum = _atom_arrays(dist)
        idx = int(np.searchsorted(cum, p, side="left"))
        idx = min(idx, len(values) - 1)
        return float(values[idx])
    raise TypeError(f"unknown service distribution {dist!r}")


def parse_service(spec: str) -> ServiceDistribution:
    """Parse the text grammar ``det:<d>``, ``exp:<mean>``,
    ``lognormal:<sigma>``, ``discrete:v1,p1;v2,p2;...``.

    Raises
    ------
    ValueError
        Naming the offending token on malformed input.
    """
    head, sep, rest = spec.partition(":")
    if not sep:
        raise ValueError(f"service spec {spec!r} is missing ':<params>'")
    try:
        if head == "det":
            return Deterministic(_parse_float(rest))
        if head == "exp":
            return Exponential(_parse_float(rest))
        if head == "lognormal":
            return LogNormalUnitMean(_parse_float(rest))
        if head == "discrete":
            atoms = []
            for pair in rest.split(";"):
                v, sep2, p = pair.partition(",")
                if not sep2:
                    raise ValueError(f"discrete atom {pair!r} is not 'value,prob'")
                atoms.append((_parse_float(v), _parse_float(p)))
            return DiscreteFinite(tuple(atoms))
    except ValueError as exc:
        raise ValueError(f"bad service spec {spec!r}: {exc}") from exc
    raise ValueError(f"unknown service family {head!r} in {spec!r}")


def format_service(dist: ServiceDistribution) -> str:
    """Serialize ``dist`` so that ``parse_service`` round-trips it."""
    if isinstance(dist, Deterministic):
        return f"det:{dist.d!r}"
    if isinstance(dist, Exponential):
        return f"exp:{dist.mean!r}"
    if isinstance(dist, LogNormalUnitMean):
        return f"lognormal:{dist.sigma!r}"
    if isinstance(dist, DiscreteFinite):
        body = ";".join(f"{v!r},{p!r}" for v, p in dist.atoms)
        return f"discrete:{body}"
    raise TypeError(f"unknown service distribution {dist!r}")


def _parse_float(tok: str) -> float:
    # locale-independent: float() always uses the dot separator
    try:
        val = float(tok)
    except ValueError:
        raise ValueError(f"token {tok!r} is not a number") from None
    if math.isnan(val):
        raise ValueError(f"token {tok!r} is not a number")
    return val


def _atom_arrays(dist: DiscreteFinite) -> tuple[np.ndarray, np.ndarray]:
    values = np.array([v for v, _ in dist.atoms])
    cum = np.cumsum([p for _, p in dist.atoms])
    cum[-1] = 1.0
    return values, cum


# internal bridge for the jitted Monte Carlo kernels:
# (kind, a, b, values, cumprobs) with kind 0=det, 1=exp, 2=lognormal, 3=discrete
_EMPTY = np.empty(0)


def _dist_params(dist: ServiceDistribution):
    if isinstance(dist, Deterministic):
        return 0, dist.d, 0.0, _EMPTY, _EMPTY
    if isinstance(dist, Exponential):
        return 1, dist.mean, 0.0, _EMPTY, _EMPTY
    if isinstance(dist, LogNormalUnitMean):
        return 2, dist.sigma, 0.0, _EMPTY, _EMPTY
    if isinstance(dist, DiscreteFinite):
        values, cum = _atom_arrays(dist)
        return 3, 0.0, 0.0, values, cum
    raise TypeError(f"unknown service distribution {dist!r}")
