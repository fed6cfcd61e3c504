"""Parameter sweeps comparing solved thresholds with simulated policies.

Three stock sweeps:

1. rate sweep: Exponential(1) service, grid of rate caps f_max,
   policies solved per cap, periodic at interval 1/f_max;
2. spread sweep at f_max = 0.8: unit-mean lognormal service, grid of
   shape parameters sigma;
3. spread sweep at f_max = 1.5: same grid, zero-wait now feasible and
   periodic at interval 1/f_max is unstable (utilization >= 1).

Each cell solves both thresholds and simulates the feasible policies.
Zero-wait cells are left empty with flag `zero-wait-infeasible` when
f_max < 1/E[Y]; periodic cells are left empty with `periodic-unstable`
when E[Y]/interval >= 1 (the time-average MSE diverges, so any finite
number would just measure the horizon). Output is CSV with a fixed
header and `#` provenance lines; identical arguments and seed produce
byte-identical bytes.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import __version__
from .service import Exponential, LogNormalUnitMean, ServiceDistribution, mean
from .simulate import (
    AgeThreshold,
    Periodic,
    SignalThreshold,
    SimConfig,
    ZeroWait,
    simulate_policy,
)
from .solver import solve_age_threshold, solve_signal_threshold

__all__ = ["SweepRow", "figure_grid", "run_sweep", "write_sweep_csv", "CSV_HEADER"]

CSV_HEADER = ("x,beta_signal,beta_age,mse_opt_theory,mse_age_theory,"
              "mse_opt_sim,mse_opt_sim_se,mse_age_sim,mse_age_sim_se,"
              "mse_zero_wait_sim,mse_zero_wait_sim_se,"
              "mse_periodic_sim,mse_periodic_sim_se,flags")

_FIGURE_GRIDS = {
    1: (0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95),
    2: (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0),
    3: (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0),
}
_FIGURE_FMAX = {2: 0.8, 3: 1.5}


@dataclass(frozen=True)
class SweepRow:
    """One sweep cell; sim fields are None when the policy was skipped."""

    x: float
    beta_signal: float
    beta_age: float
    mse_opt_theory: float
    mse_age_theory: float
    mse_opt_sim: float | None
    mse_opt_sim_se: float | None
    mse_age_sim: float | None
    mse_age_sim_se: float | None
    mse_zero_wait_sim: float | None
    mse_zero_wait_sim_se: float | None
    mse_periodic_sim: float | None
    mse_periodic_sim_se: float | None
    flags: tuple[str, ...]


def figure_grid(figure: int) -> tuple[float, ...]:
    """Default x grid for a stock sweep (f_max for 1, sigma for 2/3)."""
    if figure not in _FIGURE_GRIDS:
        raise ValueError(f"unknown figure {figure!r}; expected 1, 2, or 3")
    return _FIGURE_GRIDS[figure]


def _cell_seed(seed: int, row: int, slot: int) -> int:
    return int(np.random.SeedSequence((seed, row, slot)).generate_state(1, np.uint64)[0])


def _cell(figure: int, x: float, row: int, seed: int, horizon: float,
          dt: float, replications: int) -> SweepRow:
    if figure == 1:
        dist: ServiceDistribution = Exponential(1.0)
        fmax = x
    else:
        dist = LogNormalUnitMean(x)
        fmax = _FIGURE_FMAX[figure]

    sig = solve_signal_threshold(dist, fmax)
    age = solve_age_threshold(dist, fmax)
    ey = mean(dist)
    interval = 1.0 / fmax
    flags = []

    def cfg(slot: int) -> SimConfig:
        return SimConfig(horizon=horizon, dt=dt, replications=replications,
                         seed=_cell_seed(seed, row, slot))

    r_sig = simulate_policy(SignalThreshold(sig.beta), dist, cfg(0))
    r_age = simulate_policy(AgeThreshold(age.beta), dist, cfg(1))
    flags.extend(f"signal-{f}" for f in r_sig.flags)
    flags.extend(f"age-{f}" for f in r_age.flags)

    if fmax < 1.0 / ey:
        zw_mse = zw_se = None
        flags.append("zero-wait-infeasible")
    else:
        r_zw = simulate_policy(ZeroWait(), dist, cfg(2))
        zw_mse, zw_se = r_zw.mse, r_zw.se_mse
        flags.extend(f"zero-wait-{f}" for f in r_zw.flags)

    if ey / interval >= 1.0:
        per_mse = per_se = None
        flags.append("periodic-unstable")
    else:
        r_per = simulate_policy(Periodic(interval), dist, cfg(3))
        per_mse, per_se = r_per.mse, r_per.se_mse
        flags.extend(f"periodic-{f}" for f in r_per.flags)

    return SweepRow(
        x=x,
        beta_signal=sig.beta,
        beta_age=age.beta,
        mse_opt_theory=sig.mse,
        mse_age_theory=age.mse,
        mse_opt_sim=r_sig.mse,
        mse_opt_sim_se=r_sig.se_mse,
        mse_age_sim=r_age.mse,
        mse_age_sim_se=r_age.se_mse,
        mse_zero_wait_sim=zw_mse,
        mse_zero_wait_sim_se=zw_se,
        mse_periodic_sim=per_mse,
        mse_periodic_sim_se=per_se,
        flags=tuple(flags),
    )


def run_sweep(figure: int, seed: int = 0, horizon: float = 2e4, dt: float = 1e-3,
              replications: int = 8,
              grid: tuple[float, ...] | None = None) -> list[SweepRow]:
    """Solve and simulate every cell of one stock sweep.

    Parameters
    ----------
    figure : int
        1 (f_max sweep on Exponential(1)), 2 or 3 (sigma sweeps on the
        unit-mean lognormal at f_max 0.8 / 1.5).
    grid : tuple of float, optional
        Override the default x grid.

    Returns
    -------
    list of SweepRow
    """
    xs = figure_grid(figure) if grid is None else tuple(grid)
    if not xs:
        raise ValueError("sweep grid is empty")
    for x in xs:
        if not (x > 0.0 and math.isfinite(x)):
            raise ValueError(f"sweep grid values must be positive and finite, got {x!r}")
    return [_cell(figure, x, row, seed, horizon, dt, replications)
            for row, x in enumerate(xs)]


def _fmt(v: float | None) -> str:
    if v is None:
        return ""
    return f"{v:.10g}"


def write_sweep_csv(rows: list[SweepRow], path: str, figure: int, seed: int,
                    horizon: float, dt: float, replications: int) -> None:
    """Serialize sweep rows to CSV with provenance comment lines."""
    grid = ",".join(f"{r.x:.10g}" for r in rows)
    lines = [
        f"# remoteest {__version__} sweep figure={figure} seed={seed}",
        f"# horizon={horizon:.10g} dt={dt:.10g} replications={replications} grid={grid}",
        CSV_HEADER,
    ]
    for r in rows:
        fields = [
            _fmt(r.x), _fmt(r.beta_signal), _fmt(r.beta_age),
            _fmt(r.mse_opt_theory), _fmt(r.mse_age_theory),
            _fmt(r.mse_opt_sim), _fmt(r.mse_opt_sim_se),
            _fmt(r.mse_age_sim), _fmt(r.mse_age_sim_se),
            _fmt(r.mse_zero_wait_sim), _fmt(r.mse_zero_wait_sim_se),
            _fmt(r.mse_periodic_sim), _fmt(r.mse_periodic_sim_se),
            ";".join(r.flags),
        ]
        lines.append(",".join(fields))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
