"""Acceptance gate: one test and one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as
they complete. The heavy shared resources (identity suite, ordering
suite, full sweep runs) are module-scoped fixtures, so the whole gate
costs a few minutes on one core.
"""

import math

import pytest

from remoteest import (
    Deterministic,
    Exponential,
    SignalThreshold,
    SimConfig,
    asymptotic_ratio_check,
    simulate_policy,
    solve_age_threshold,
    solve_signal_threshold,
    zero_wait_age_optimal,
    zero_wait_mse_optimal,
)
from remoteest.checks import format_report, run_identity_suite, run_ordering_suite
from remoteest.cli import main

EXP1 = Exponential(1.0)


def _criterion(num: int, ok: bool, detail: str) -> None:
    print(f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"criterion {num}: {detail}"


@pytest.fixture(scope="module")
def identity_reports():
    return run_identity_suite(seed=7)


@pytest.fixture(scope="module")
def ordering_reports():
    return run_ordering_suite(seed=7)


@pytest.fixture(scope="module")
def fig1_sweeps(tmp_path_factory):
    outdir = tmp_path_factory.mktemp("fig1")
    first, second = outdir / "run1.csv", outdir / "run2.csv"
    base = ["sweep", "--figure", "1", "--seed", "7"]
    assert main(base + ["--out", str(first)]) == 0
    assert main(base + ["--out", str(second)]) == 0
    return first, second


def _parse_csv(path):
    rows = [line.split(",") for line in path.read_text().splitlines()
            if line and not line.startswith("#")]
    col = {name: i for i, name in enumerate(rows[0])}
    return col, rows[1:]


def test_criterion_01_asymptotic_ratio():
    ratio = asymptotic_ratio_check(EXP1, 0.01)
    ok = 0.31 <= ratio <= 0.35
    _criterion(1, ok, f"mse ratio at rate cap 0.01 = {ratio:.6f}, want [0.31, 0.35]")


def test_criterion_02_low_rate_threshold_bound():
    details = []
    ok = True
    for fmax in (0.01, 0.1):
        beta = solve_signal_threshold(EXP1, fmax).beta
        lo, hi = 1.0 / fmax - 1.0, 1.0 / fmax
        ok = ok and lo <= beta <= hi
        details.append(f"beta({fmax:g})={beta:.6f} in [{lo:g},{hi:g}]")
    _criterion(2, ok, "; ".join(details))


def test_criterion_03_low_rate_mse_asymptote():
    fmax = 0.01
    sig = solve_signal_threshold(EXP1, fmax)
    age = solve_age_threshold(EXP1, fmax)
    rel_sig = abs(sig.mse - 1.0 / (6.0 * fmax)) / (1.0 / (6.0 * fmax))
    rel_age = abs(age.mse - 1.0 / (2.0 * fmax)) / (1.0 / (2.0 * fmax))
    ok = rel_sig <= 0.07 and rel_age <= 0.07
    _criterion(3, ok, f"signal rel dev {rel_sig:.4f}, age rel dev {rel_age:.4f}, "
                      f"both <= 0.07")


def test_criterion_04_degenerate_closed_form():
    sol = solve_signal_threshold(Deterministic(0.0), 2.0)
    ok = abs(sol.beta - 0.5) <= 1e-10 and abs(sol.mse - 1.0 / 12.0) <= 1e-10
    _criterion(4, ok, f"beta={sol.beta!r} mse={sol.mse!r}, want 0.5 and 1/12 "
                      f"to 1e-10")


def test_criterion_05_zero_wait_optimality_flags():
    got = [
        (zero_wait_age_optimal(Deterministic(1.0)),
         zero_wait_mse_optimal(Deterministic(1.0))),
        (zero_wait_age_optimal(EXP1), zero_wait_mse_optimal(EXP1)),
        (zero_wait_age_optimal(Deterministic(0.0)),
         zero_wait_mse_optimal(Deterministic(0.0))),
    ]
    want = [(True, False), (False, False), (True, True)]
    ok = got == want
    _criterion(5, ok, f"(age,mse) flags for det:1, exp:1, det:0 = {got}, want {want}")


def test_criterion_06_age_solver_analytic_cases():
    det = solve_age_threshold(Deterministic(1.0), math.inf)
    exp = solve_age_threshold(EXP1, math.inf)
    fp = exp.beta * exp.beta * math.exp(exp.beta)
    checks = [
        abs(det.beta - 0.5) <= 1e-9,
        abs(det.mse - 1.5) <= 1e-9,
        abs(fp - 2.0) <= 1e-8,
        abs(exp.mse - (1.0 + exp.beta)) <= 1e-8,
    ]
    ok = all(checks)
    _criterion(6, ok, f"det beta={det.beta:.12f} mse={det.mse:.12f}; "
                      f"exp beta^2 e^beta={fp:.12f} mse-(1+beta)="
                      f"{exp.mse - 1.0 - exp.beta:.2e}")


def test_criterion_07_theory_vs_simulation():
    sol = solve_signal_threshold(EXP1, math.inf)
    res = simulate_policy(SignalThreshold(sol.beta), EXP1,
                          SimConfig(horizon=1e5, dt=1e-3, seed=7, replications=8))
    tol = max(0.05 * sol.mse, 4.0 * res.se_mse)
    diff = abs(res.mse - sol.mse)
    ok = diff <= tol
    _criterion(7, ok, f"sim mse={res.mse:.6f} theory={sol.mse:.6f} "
                      f"|diff|={diff:.6f} tol={tol:.6f}")


def test_criterion_08_identity_suite(identity_reports):
    failures = [r for r in identity_reports if not r.passed]
    for r in identity_reports:
        print("  " + format_report(r))
    ok = not failures
    _criterion(8, ok, f"{len(identity_reports) - len(failures)}/"
                      f"{len(identity_reports)} identity checks passed")


def test_criterion_09_ordering_chain(ordering_reports):
    failures = [r for r in ordering_reports if not r.passed]
    for r in ordering_reports:
        print("  " + format_report(r))
    ok = not failures
    _criterion(9, ok, f"{len(ordering_reports) - len(failures)}/"
                      f"{len(ordering_reports)} ordering checks passed")


def test_criterion_10_rate_sweep_shape(fig1_sweeps):
    col, rows = _parse_csv(fig1_sweeps[0])
    opt = [float(r[col["mse_opt_theory"]]) for r in rows]
    age = [float(r[col["mse_age_theory"]]) for r in rows]
    mono = (all(a >= b - 1e-9 for a, b in zip(opt, opt[1:]))
            and all(a >= b - 1e-9 for a, b in zip(age, age[1:])))
    last = rows[-1]
    assert float(last[col["x"]]) == 0.95
    per = float(last[col["mse_periodic_sim"]])
    blowup = per > 5.0 * float(last[col["mse_opt_theory"]])
    ok = mono and blowup
    _criterion(10, ok, f"theory columns nonincreasing={mono}; periodic sim at "
                       f"0.95 = {per:.3f} > 5x theory "
                       f"{5.0 * float(last[col['mse_opt_theory']]):.3f} = {blowup}")


def test_criterion_11_sweep_determinism(fig1_sweeps):
    first, second = fig1_sweeps
    same = first.read_bytes() == second.read_bytes()
    _criterion(11, same, f"two 'sweep --figure 1 --seed 7' runs byte-identical={same}")
