"""End-to-end acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line shown in the terminal summary.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from voigt_strip.bounds import (DEFAULT_SWEEP, ErrorBoundParams, fit_envelope_constants, horizon_check,
                                uniform_within, verify_band_inequalities, verify_error_bound)
from voigt_strip.fields import assemble_field, decompose, solve_full
from voigt_strip.green import DEFAULT_TOL, green_eval
from voigt_strip.modal import kernel_h, mode_params
from voigt_strip.model import Grid, Problem, SineSeriesFn, StripConfig, TimeProfile
from voigt_strip.oracle import FdScheme, OdeProblem, integrate_mode, solve_fd

CFG = StripConfig(0.1, 1.0, math.pi, 1.0)


def test_1_kernel_matches_ode_oracle(verdict):
    start = time.perf_counter()
    t = np.linspace(0.0, 1.0, 64)
    worst = 0.0
    for n in (1, 5, 19, 20, 21, 40, 200):
        vals, _ = integrate_mode(OdeProblem.for_mode(CFG, n), t)
        h = kernel_h(mode_params(CFG, n), t).h
        worst = max(worst, np.max(np.abs(h - vals)) / np.max(np.abs(vals)))
    elapsed = time.perf_counter() - start
    verdict("1 kernel vs ODE oracle", worst <= 1e-8 and elapsed < 5.0,
            f"max scaled error {worst:.2e} (<= 1e-8), {elapsed:.2f} s (< 5 s)")


def test_2_critical_mode_closed_form(verdict):
    assert CFG.k_is_integer and CFG.n_split == 20
    t = np.linspace(0.0, 1.0, 1001)
    h = kernel_h(mode_params(CFG, 20), t).h
    exact = t * np.exp(-20.0 * t)
    live = t > 0
    rel = np.max(np.abs(h[live] - exact[live]) / exact[live])
    verdict("2 critical mode t exp(-20t)", rel <= 1e-12 and h[0] == 0.0, f"max relative error {rel:.2e} (<= 1e-12)")


def test_3_green_series(verdict):
    rng = np.random.default_rng(3)
    x, xi = rng.uniform(0.0, CFG.l, (2, 1000))
    t = np.exp(rng.uniform(math.log(1e-3), math.log(2.0), 1000))
    asym = bound = 0.0
    for a, b, s in zip(x, xi, t):
        asym = max(asym, abs(green_eval(CFG, a, b, s)[0] - green_eval(CFG, b, a, s)[0]))
        bound = max(bound, abs(green_eval(CFG, 0.0, b, s)[0]), abs(green_eval(CFG, CFG.l, b, s)[0]))
    drift = 0.0
    for a, b, s in zip(x[:100], xi[:100], t[:100]):
        value, trunc = green_eval(CFG, a, b, s)
        drift = max(drift, abs(green_eval(CFG, a, b, s, n_max=2 * trunc.n_max)[0] - value))
    verdict("3 Green series", asym == 0.0 and bound == 0.0 and drift < DEFAULT_TOL,
            f"asymmetry {asym:.1e}, boundary {bound:.1e} (both exactly 0), doubling drift {drift:.1e} (< 1e-10)")


def test_4_decomposition_identity(verdict, three_mode_problem):
    p = three_mode_problem
    assert len(p.f.modes) and len(p.f0.modes) and len(p.f1.modes)
    d = decompose(p, Grid(33, 101, p.cfg.l, p.cfg.t_max))
    gap = float(np.max(np.abs(d.field("u").values - d.approximation().values)))
    verdict("4 decomposition identity", gap <= 1e-8, f"sup |u - (exp(-eps t) w + r)| = {gap:.2e} (<= 1e-8)")


def test_5_fd_cross_validation(verdict):
    start = time.perf_counter()
    p = Problem(CFG, SineSeriesFn(), SineSeriesFn.from_pairs([(1, 1.0)]), SineSeriesFn())
    errs = []
    for nx in (17, 33, 65, 129):
        scheme = FdScheme.with_courant(CFG, nx, 0.5)
        grid = scheme.grid(CFG)
        exact = assemble_field(solve_full(p, grid), grid, "u").values
        errs.append(np.max(np.abs(solve_fd(p, scheme).values - exact)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    elapsed = time.perf_counter() - start
    ok = bool(np.all((orders >= 1.8) & (orders <= 2.2))) and elapsed < 30.0
    verdict("5 FD cross-validation", ok, f"orders {np.round(orders, 3).tolist()} in [1.8, 2.2], {elapsed:.1f} s (< 30 s)")


@pytest.fixture(scope="module")
def sweep_fit():
    start = time.perf_counter()
    fit = fit_envelope_constants(CFG, DEFAULT_SWEEP, 0.9)
    return fit, time.perf_counter() - start


def test_6_green_constants_uniform(verdict, sweep_fit):
    fit, elapsed = sweep_fit
    a0, m0 = fit.trace("a0"), fit.trace("m0")
    dominated = all(tr.max_ratio_g <= 1.0 for tr in fit.traces)
    no_growth = uniform_within(a0) and uniform_within(m0)

    def spread(v):
        return 0.0 if np.max(v) == 0.0 else float(1.0 - np.min(v) / np.max(v))

    within = spread(a0) <= 0.2 and spread(m0) <= 0.2
    detail = (f"A0 {np.round(a0, 4).tolist()} M0 {np.round(m0, 4).tolist()}: spread {spread(a0):.0%}/{spread(m0):.0%}"
              f" (<= 20%), upward trend {'none' if no_growth else 'present'}, dominated {dominated}, {elapsed:.0f} s")
    verdict("6 Green constants eps-uniform", within and no_growth and dominated and elapsed < 120.0, detail)


def test_7_g2_fast_time_bound(verdict, sweep_fit):
    fit, _ = sweep_fit
    c1 = fit.trace("c1")
    dominated = all(tr.max_ratio_g2 <= 1.0 for tr in fit.traces)
    bounded = bool(np.all(np.isfinite(c1))) and uniform_within(c1)
    verdict("7 G2 fast-time envelope", dominated and bounded,
            f"C1 {np.round(c1, 5).tolist()}, max ratio {max(tr.max_ratio_g2 for tr in fit.traces):.3f} (<= 1)")


def test_8_error_bound_scaling(verdict):
    start = time.perf_counter()
    params = ErrorBoundParams(0.9, 0.95)
    assert params.eta == pytest.approx(0.05, rel=1e-12)
    p = Problem(CFG, SineSeriesFn(), SineSeriesFn.from_pairs([(1, 1.0)]), SineSeriesFn())
    rep = verify_error_bound(p, params, DEFAULT_SWEEP)
    smallest = p.with_epsilon(DEFAULT_SWEEP[-1])
    horizon = horizon_check(smallest, params, rep.records[-1].k_const)
    elapsed = time.perf_counter() - start
    slope = rep.regression["slope"]
    ks = [r.k_const for r in rep.records]
    ok = rep.passed and slope >= 2 * params.eta - 0.05 and horizon["holds"] and elapsed < 120.0
    verdict("8 remainder scaling", ok,
            f"slope {slope:.3f} (>= 0.05), k_const {np.round(ks, 4).tolist()} (no step grows > 20%; "
            f"two-sided spread {1 - min(ks) / max(ks):.0%}), "
            f"horizon to T={horizon['t_max']:.3f} holds {horizon['holds']}, {elapsed:.1f} s")


def test_9_band_inequalities(verdict):
    reports = [verify_band_inequalities(CFG, a) for a in (0.6, 0.8, 0.95)]
    bad = sum(len(r.counterexamples) for r in reports)
    flagged = all(any("integer" in n for n in r.notes) for r in reports)
    verdict("9 band inequalities", bad == 0 and flagged,
            f"{bad} counterexamples over {sum(r.checked for r in reports)} mode checks, integer-k note {flagged}")


def test_10_sweep_determinism(verdict, tmp_path):
    cmd = [sys.executable, "-m", "voigt_strip.cli", "sweep"]
    runs = [subprocess.Popen(cmd + ["-o", str(tmp_path / name)], stdout=subprocess.DEVNULL,
                             stderr=subprocess.PIPE) for name in ("a", "b")]
    codes = [r.wait(timeout=600) for r in runs]
    names = ("sweep.json", "sweep.csv", "manifest.json")
    same = all((tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes() for n in names)
    verdict("10 sweep determinism", same and codes[0] == codes[1],
            f"exit codes {codes}, byte-identical {', '.join(names)}: {same}")
