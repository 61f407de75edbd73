import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from voigt_strip.errors import QuadratureFailure
from voigt_strip.fields import (assemble_field, build_lambda, build_source_F, decompose, project_field, solve_full,
                                solve_reduced, solve_remainder)
from voigt_strip.modal import kernel_arrays, mode_params
from voigt_strip.model import Grid, Problem, SineSeriesFn, StripConfig, TimeProfile
from voigt_strip.oracle import OdeProblem, integrate_mode

from conftest import single_mode


def grid_for(problem, nx=17, nt=81):
    return Grid(nx, nt, problem.cfg.l, problem.cfg.t_max)


def test_standing_wave(cfg):
    p = single_mode(cfg, f0=[(1, 1.0)])
    g = grid_for(p)
    w = assemble_field(solve_reduced(p, g), g, "w").values
    expect = np.sin(g.x_points)[:, None] * np.cos(g.t_points)[None, :]
    np.testing.assert_allclose(w, expect, rtol=0, atol=1e-15)


def test_reduced_velocity_example(cfg):
    p = single_mode(cfg, f1=[(2, 1.0)])
    g = grid_for(p)
    np.testing.assert_allclose(solve_reduced(p, g)["w"][0], np.sin(2 * g.t_points) / 2, rtol=0, atol=1e-15)


def test_lambda_vanishes_when_gamma_is_sqrt2():
    cfg = StripConfig(0.1, 1.0, math.pi / math.sqrt(2), 1.0)
    p = single_mode(cfg, f0=[(1, 1.0)])
    lam = build_lambda(solve_reduced(p, grid_for(p)), cfg.l)
    assert np.max(np.abs(lam["lam"])) <= 1e-15 and np.max(np.abs(lam["lam_t"])) <= 1e-15


def test_lambda_standing_wave(cfg):
    p = single_mode(cfg, f0=[(1, 1.0)])
    g = grid_for(p)
    lam = build_lambda(solve_reduced(p, g), cfg.l)
    np.testing.assert_allclose(lam["lam"][0], np.cos(g.t_points), rtol=0, atol=1e-15)


def test_lambda_t_is_the_derivative(three_mode_problem):
    p = three_mode_problem
    lam = build_lambda(solve_reduced(p, grid_for(p)), p.cfg.l)
    t0 = 0.77
    exact = lam.sample([t0])["lam_t"][:, 0]
    errs = []
    for h in (1e-2, 5e-3, 2.5e-3):
        s = lam.sample([t0 - h, t0 + h])["lam"]
        errs.append(np.max(np.abs((s[:, 1] - s[:, 0]) / (2 * h) - exact)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.9)


def test_source_at_time_zero(three_mode_problem):
    p = three_mode_problem
    g = grid_for(p)
    w = solve_reduced(p, g)
    lam = build_lambda(w, p.cfg.l)
    F = build_source_F(p, w, lam)
    eps = p.cfg.epsilon
    gamma2 = np.array([n**2 for n in p.modes], dtype=float)
    expect = -eps * lam["lam_t"][:, 0] + eps**2 * (1 - gamma2) * w["w"][:, 0]
    np.testing.assert_allclose(F["F"][:, 0], expect, rtol=1e-15, atol=1e-17)


def test_source_vanishes_linearly_with_eps(three_mode_problem):
    sups = []
    for eps in (1e-2, 1e-3):
        p = three_mode_problem.with_epsilon(eps)
        g = grid_for(p)
        w = solve_reduced(p, g)
        sups.append(np.max(np.abs(build_source_F(p, w, build_lambda(w, p.cfg.l))["F"])))
    assert sups[0] / sups[1] == pytest.approx(10.0, rel=0.05)


def residual_error(problem, nx):
    """sup |L_h[e^{-eps t} w] - (f - F)| over interior nodes, L = d_xx(eps d_t + c^2) - d_tt."""
    cfg = problem.cfg
    nt = 2 * nx - 1
    g = Grid(nx, nt, cfg.l, cfg.t_max)
    d = decompose(problem, g)
    v = np.exp(-cfg.epsilon * g.t_points)[None, :] * d.field("w").values
    dx, dt = g.dx, g.dt
    lap = (v[2:, :] - 2 * v[1:-1, :] + v[:-2, :]) / dx**2
    v_tt = (v[1:-1, 2:] - 2 * v[1:-1, 1:-1] + v[1:-1, :-2]) / dt**2
    lap_t = (lap[:, 2:] - lap[:, :-2]) / (2 * dt)
    lhs = cfg.epsilon * lap_t + cfg.c**2 * lap[:, 1:-1] - v_tt
    x, t = g.x_points[1:-1], g.t_points[1:-1]
    f = sum(a * np.sin(n * math.pi * x / cfg.l) for n, a in problem.f.pairs())
    f = np.outer(f, problem.f.time_factor(t)) if not problem.f.is_empty else 0.0
    F = d.field("F").values[1:-1, 1:-1]
    return np.max(np.abs(lhs - (f - F)))


def test_residual_identity_defines_F(three_mode_problem):
    errs = np.array([residual_error(three_mode_problem, nx) for nx in (33, 65, 129)])
    orders = np.log2(errs[:-1] / errs[1:])
    assert np.all(orders >= 1.8), (errs, orders)
    assert errs[-1] <= 5e-3


def test_zero_source_gives_zero_remainder(cfg):
    p = single_mode(cfg, f0=[(1, 0.0)])
    d = decompose(p, grid_for(p))
    assert np.all(d.field("r").values == 0.0)


def test_remainder_starts_at_zero(three_mode_problem):
    p = three_mode_problem
    d = decompose(p, grid_for(p))
    assert np.all(d.r["r"][:, 0] == 0.0)


def test_decomposition_identity(three_mode_problem):
    p = three_mode_problem
    d = decompose(p, Grid(33, 101, p.cfg.l, p.cfg.t_max))
    gap = np.max(np.abs(d.field("u").values - d.approximation().values))
    assert gap <= max(1e-8, 10 * d.quadrature_error)


def test_zero_initial_velocity_breaks_identity(three_mode_problem):
    # r_t(0) = u_t(0) - d/dt(e^{-eps t} w)(0) = eps f0, so imposing r_t(0) = 0 leaves a gap of order eps |f0|
    p = three_mode_problem
    d = decompose(p, grid_for(p), initial_velocity="zero")
    gap = np.max(np.abs(d.field("u").values - d.approximation().values))
    assert gap > 1e-3
    p0 = Problem(p.cfg, SineSeriesFn(), p.f1, p.f)
    d0 = decompose(p0, grid_for(p0), initial_velocity="zero")
    assert np.max(np.abs(d0.field("u").values - d0.approximation().values)) <= 1e-8


@pytest.mark.parametrize("n", [1, 20, 35])
def test_full_solution_kernels(cfg, n):
    g = grid_for(single_mode(cfg, f1=[(n, 1.0)]))
    p = mode_params(cfg, n)
    h, _, g1 = kernel_arrays(p.mu, p.ratio, g.t_points)
    assert np.array_equal(solve_full(single_mode(cfg, f1=[(n, 1.0)]), g)["u"][0], h)
    u0 = solve_full(single_mode(cfg, f0=[(n, 1.0)]), g)["u"][0]
    assert np.array_equal(u0, g1) and u0[0] == 1.0


def test_initial_data_reproduced(three_mode_problem):
    p = three_mode_problem
    u = solve_full(p, grid_for(p))
    f0 = np.array([p.f0.coefficient(n) for n in p.modes])
    f1 = np.array([p.f1.coefficient(n) for n in p.modes])
    assert np.array_equal(u["u"][:, 0], f0)
    assert np.max(np.abs(u["u_t"][:, 0] - f1)) <= 1e-10


def test_table_forcing_matches_ode_oracle():
    cfg = StripConfig(0.2, 1.0, math.pi, 2.0)
    prof = TimeProfile("table", t0=0.0, dt=0.35, values=(0.0, 1.0, -0.5, 0.25, 0.8, 0.0))
    p = single_mode(cfg, f0=[(2, 0.3)], f=[(2, 1.5)], time=prof)
    g = Grid(5, 57, cfg.l, cfg.t_max)
    u = solve_full(p, g)["u"][0]
    vals, _ = integrate_mode(OdeProblem.for_mode(cfg, 2, 0.3, 0.0, lambda t: -1.5 * float(prof(t))), g.t_points)
    assert np.max(np.abs(u - vals)) <= 1e-9


@given(st.floats(0.01, 1.0), st.integers(1, 8), st.integers(1, 8))
def test_modal_energy_non_increasing(eps, n0, n1):
    cfg = StripConfig(eps, 1.0, math.pi, 3.0)
    f0 = [(n0, 1.0)] if n0 != n1 else [(n0, 1.0)]
    f1 = [(n1, -0.7)]
    p = single_mode(cfg, f0=f0, f1=f1)
    u = solve_full(p, Grid(3, 301, cfg.l, cfg.t_max))
    gamma2 = np.array([n**2 for n in p.modes], dtype=float)[:, None]
    energy = u["u_t"] ** 2 + gamma2 * u["u"] ** 2
    assert np.all(np.diff(energy, axis=1) <= 1e-10)


@given(st.floats(-3, 3).filter(lambda a: abs(a) > 1e-3))
def test_linearity(a):
    cfg = StripConfig(0.1, 1.0, math.pi, 1.0)
    p = single_mode(cfg, f0=[(1, 0.5)], f1=[(2, 1.0)], f=[(1, 1.0)], time=TimeProfile("cosine", frequency=2.0))
    g = Grid(9, 21, cfg.l, cfg.t_max)
    base, scaled = decompose(p, g), decompose(p.scaled(a), g)
    for name in ("u", "w", "r", "F"):
        x, y = base.field(name).values, scaled.field(name).values
        assert np.max(np.abs(y - a * x)) <= 1e-12 * max(1.0, abs(a) * np.max(np.abs(x)))


def test_assembly_and_projection_round_trip(three_mode_problem):
    p = three_mode_problem
    g = Grid(33, 21, p.cfg.l, p.cfg.t_max)
    state = solve_full(p, g)
    field = assemble_field(state, g, "u")
    assert np.all(field.values[0] == 0.0) and np.all(field.values[-1] == 0.0)
    back = project_field(field, state.modes)
    np.testing.assert_allclose(back, state["u"], rtol=0, atol=1e-12)


def test_single_mode_field_is_separable(cfg):
    p = single_mode(cfg, f1=[(3, 1.0)])
    g = grid_for(p)
    state = solve_full(p, g)
    field = assemble_field(state, g, "u").values
    np.testing.assert_allclose(field, np.outer(np.sin(3 * g.x_points), state["u"][0]), rtol=0, atol=1e-16)


def test_quadrature_failure_on_unresolved_forcing():
    cfg = StripConfig(0.1, 1.0, math.pi, 5.0)
    p = single_mode(cfg, f=[(1, 1.0)], time=TimeProfile("cosine", frequency=400.0))
    with pytest.raises(QuadratureFailure) as exc:
        solve_full(p, Grid(3, 3, cfg.l, cfg.t_max))
    assert exc.value.error_estimate > 0
