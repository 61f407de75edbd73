"""Modal solutions: reduced wave w, auxiliary lambda, source F, remainder r and full u.

Every field is held per mode as coefficient trajectories on the time grid and
synthesised in x on demand.  Time convolutions use composite 8-node
Gauss-Legendre on each grid interval (split at kinks of tabulated forcing)
and are recomputed once with halved sub-intervals; the difference is the
reported error estimate and the refined value is kept.

Sign conventions follow  d_xx(eps u_t + c^2 u) - u_tt = f,  i.e. each mode obeys
u_n'' + eps gamma_n^2 u_n' + c^2 gamma_n^2 u_n = -f_n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import QuadratureFailure
from .modal import kernel_arrays, mode_params
from .model import FieldGrid, Grid, Problem, sine_basis
from .summation import compensated_sum

GL_ORDER = 8
QUAD_RTOL = 1e-9
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)


@dataclass(frozen=True)
class ModalState:
    """Per-mode trajectories ``values[name][i, j]`` for mode ``modes[i]`` at ``t[j]``.

    ``sampler`` evaluates the same quantities at arbitrary times and is what
    downstream convolutions integrate against.
    """

    modes: tuple
    t: np.ndarray
    values: dict
    error_estimate: float = 0.0
    sampler: Callable | None = field(default=None, repr=False, compare=False)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[name]

    def sample(self, times) -> dict:
        return self.sampler(np.asarray(times, dtype=float))


# quadrature -----------------------------------------------------------------

def _subintervals(edges: np.ndarray, refine: bool):
    a, b = edges[:-1], edges[1:]
    if refine:
        mid = 0.5 * (a + b)
        a, b = np.column_stack([a, mid]).ravel(), np.column_stack([mid, b]).ravel()
    return a, b


def _gl_nodes(a: np.ndarray, b: np.ndarray):
    half = 0.5 * (b - a)
    tau = (0.5 * (a + b))[:, None] + half[:, None] * _GL_X[None, :]
    wts = half[:, None] * _GL_W[None, :]
    return tau, wts


def _grid_rule(t_grid: np.ndarray, breaks: np.ndarray, refine: bool):
    """Nodes, weights and owning grid interval for a composite rule on t_grid."""
    edges = np.unique(np.concatenate([t_grid, breaks]))
    a, b = _subintervals(edges, refine)
    tau, wts = _gl_nodes(a, b)
    owner = np.searchsorted(t_grid, a, side="right") - 1
    owner = np.repeat(owner, GL_ORDER)
    return tau.ravel(), wts.ravel(), owner


def _cumsum_compensated(x: np.ndarray) -> np.ndarray:
    """Running Neumaier sums along axis -1."""
    out = np.empty_like(x)
    s = np.zeros(x.shape[:-1])
    comp = np.zeros(x.shape[:-1])
    for i in range(x.shape[-1]):
        term = x[..., i]
        t = s + term
        comp += np.where(np.abs(s) >= np.abs(term), (s - t) + term, (term - t) + s)
        s = t
        out[..., i] = s + comp
    return out


def _check_quadrature(estimate: float, scale: float, what: str) -> None:
    if estimate > QUAD_RTOL * (1.0 + scale):
        raise QuadratureFailure(
            f"{what}: quadrature error estimate {estimate:.3e} exceeds {QUAD_RTOL:.0e}*(1+{scale:.3e})",
            error_estimate=estimate)


def convolution_rules(t_grid: np.ndarray, breaks: np.ndarray = np.empty(0)):
    """The coarse and the halved composite rule on ``t_grid``."""
    return [_grid_rule(t_grid, breaks, refine) for refine in (False, True)]


def damped_convolution(mu: float, ratio: float, t_grid: np.ndarray, rules, samples,
                       derivative: bool = False, what: str = "convolution"):
    """int_0^{t_j} K(t_j - tau) g(tau) dtau for every grid time, K = H_n (or H_n').

    ``samples[i]`` holds g at the nodes of ``rules[i]``.  Returns the refined
    value and the coarse/refined difference as error estimate.
    """
    results = []
    sup = 0.0
    for (tau, wts, owner), g in zip(rules, samples):
        lag = t_grid[:, None] - tau[None, :]
        mask = owner[None, :] < np.arange(len(t_grid))[:, None]
        h, hp, _ = kernel_arrays(mu, ratio, np.where(mask, lag, 0.0))
        kern = hp if derivative else h
        integrand = np.where(mask, kern * g[None, :], 0.0)
        sup = max(sup, float(np.max(np.abs(integrand), initial=0.0)))
        results.append(compensated_sum(integrand * wts[None, :], axis=1))
    est = float(np.max(np.abs(results[1] - results[0]), initial=0.0))
    _check_quadrature(est, sup, what)
    return results[1], est


# reduced problem --------------------------------------------------------------

class ReducedSampler:
    """Closed-form-plus-quadrature evaluation of the eps = 0 solution at any times.

    w_n(t) = f0 cos(wt) + f1 sin(wt)/w - [sin(wt) Ic(t) - cos(wt) Is(t)] / w
    with Ic, Is the running integrals of cos(ws) f_n(s), sin(ws) f_n(s).
    """

    def __init__(self, problem: Problem):
        self.problem = problem
        self.modes = problem.modes
        cfg = problem.cfg
        self.omega = np.array([cfg.c * math.pi * n / cfg.l for n in self.modes])
        self.a0 = np.array([problem.f0.coefficient(n) for n in self.modes])
        self.a1 = np.array([problem.f1.coefficient(n) for n in self.modes])
        self.af = np.array([problem.f.coefficient(n) for n in self.modes])
        self.last_error = 0.0

    def forcing(self, times):
        return self.af[:, None] * np.asarray(self.problem.f.time_factor(times))[None, :]

    def _running_integrals(self, times: np.ndarray):
        """Ic, Is at ``times`` (sorted unique not required)."""
        nm = len(self.modes)
        if not np.any(self.af) or times.size == 0:
            z = np.zeros((nm, times.size))
            return z, z, 0.0
        f = self.problem.f
        breaks = f.time.breakpoints(float(times.max())) if f.time is not None else np.empty(0)
        edges = np.unique(np.concatenate([[0.0], times, breaks]))
        outs = []
        sup = 0.0
        for refine in (False, True):
            a, b = _subintervals(edges, refine)
            tau, wts = _gl_nodes(a, b)
            g = np.asarray(f.time_factor(tau))
            wt = self.omega[:, None, None] * tau[None]
            fc = self.af[:, None, None] * np.cos(wt) * g[None]
            fs = self.af[:, None, None] * np.sin(wt) * g[None]
            sup = max(sup, float(np.max(np.abs(self.af))) * float(np.max(np.abs(g))))
            pieces = np.stack([(fc * wts[None]).sum(axis=2), (fs * wts[None]).sum(axis=2)])
            cum = _cumsum_compensated(pieces)
            if refine:
                cum = cum[..., 1::2]
            cum = np.concatenate([np.zeros(cum.shape[:-1] + (1,)), cum], axis=-1)
            outs.append(cum)
        est = float(np.max(np.abs(outs[1] - outs[0])))
        _check_quadrature(est, sup, "reduced forcing integral")
        idx = np.searchsorted(edges, times)
        return outs[1][0][:, idx], outs[1][1][:, idx], est

    def __call__(self, times) -> dict:
        times = np.asarray(times, dtype=float)
        ic, is_, est = self._running_integrals(times)
        self.last_error = max(self.last_error, est)
        om = self.omega[:, None]
        wt = om * times[None, :]
        s, c = np.sin(wt), np.cos(wt)
        a0, a1 = self.a0[:, None], self.a1[:, None]
        w = a0 * c + a1 * s / om - (s * ic - c * is_) / om
        w_t = -a0 * om * s + a1 * c - (c * ic + s * is_)
        return {"w": w, "w_t": w_t}


def solve_reduced(problem: Problem, grid: Grid) -> ModalState:
    """Undamped problem c^2 w_xx - w_tt = f with the same data."""
    sampler = ReducedSampler(problem)
    t = grid.t_points
    vals = sampler(t)
    return ModalState(problem.modes, t, vals, sampler.last_error, sampler)


def build_lambda(w: ModalState, l: float) -> ModalState:
    """lambda = 2w + w_xx and its exact time derivative, mode by mode."""
    factor = np.array([2.0 - (math.pi * n / l) ** 2 for n in w.modes])[:, None]

    def sampler(times):
        ws = w.sample(times)
        return {"lam": factor * ws["w"], "lam_t": factor * ws["w_t"], "w": ws["w"]}

    vals = {"lam": factor * w["w"], "lam_t": factor * w["w_t"]}
    return ModalState(w.modes, w.t, vals, w.error_estimate, sampler)


def build_source_F(problem: Problem, w: ModalState, lam: ModalState) -> ModalState:
    """F = f (1 - e^{-eps t}) + e^{-eps t} [ -eps lambda_t + eps^2 (w + w_xx) ]."""
    cfg = problem.cfg
    eps = cfg.epsilon
    one_minus_g2 = np.array([1.0 - (math.pi * n / cfg.l) ** 2 for n in w.modes])[:, None]
    af = np.array([problem.f.coefficient(n) for n in w.modes])[:, None]

    def evaluate(times, lam_vals, w_vals):
        decay = np.exp(-eps * times)[None, :]
        f = af * np.asarray(problem.f.time_factor(times))[None, :]
        return f * (-np.expm1(-eps * times))[None, :] + decay * (-eps * lam_vals["lam_t"] + eps**2 * one_minus_g2 * w_vals)

    def sampler(times):
        lv = lam.sample(times)
        return {"F": evaluate(times, lv, lv["w"])}

    vals = {"F": evaluate(w.t, lam.values, w["w"])}
    return ModalState(w.modes, w.t, vals, lam.error_estimate, sampler)


def _forcing_breaks(problem: Problem) -> np.ndarray:
    f = problem.f
    return f.time.breakpoints(problem.cfg.t_max) if f.time is not None else np.empty(0)


def solve_remainder(problem: Problem, F: ModalState, grid: Grid, *, initial_velocity: str = "consistent") -> ModalState:
    """r_n(t) = v_n H_n(t) - int_0^t H_n(t - tau) F_n(tau) dtau.

    ``initial_velocity="consistent"`` uses v_n = eps * f0_n, which is the
    velocity u_t - d/dt(e^{-eps t} w) actually carried by r at t = 0, so that
    u = e^{-eps t} w + r holds exactly.  ``"zero"`` imposes r_t(x, 0) = 0.
    """
    if initial_velocity not in ("consistent", "zero"):
        raise ValueError("initial_velocity must be 'consistent' or 'zero'")
    cfg = problem.cfg
    t = grid.t_points
    breaks = _forcing_breaks(problem)
    r = np.zeros((len(F.modes), len(t)))
    r_t = np.zeros_like(r)
    est = F.error_estimate
    rules = convolution_rules(t, breaks)
    node_F = [F.sample(rule[0])["F"] for rule in rules]
    for i, n in enumerate(F.modes):
        p = mode_params(cfg, n)
        v0 = cfg.epsilon * problem.f0.coefficient(n) if initial_velocity == "consistent" else 0.0
        h, hp, _ = kernel_arrays(p.mu, p.ratio, t)
        samples = [vals[i] for vals in node_F]
        conv, e1 = damped_convolution(p.mu, p.ratio, t, rules, samples, what=f"remainder mode {n}")
        conv_t, e2 = damped_convolution(p.mu, p.ratio, t, rules, samples, derivative=True,
                                        what=f"remainder mode {n}")
        r[i] = v0 * h - conv
        r_t[i] = v0 * hp - conv_t
        est = max(est, e1, e2)
    return ModalState(F.modes, t, {"r": r, "r_t": r_t}, est)


def solve_full(problem: Problem, grid: Grid) -> ModalState:
    """u_n = f0_n G1_n + f1_n H_n - int_0^t H_n(t - tau) f_n(tau) dtau, per mode."""
    cfg = problem.cfg
    t = grid.t_points
    breaks = _forcing_breaks(problem)
    modes = problem.modes
    u = np.zeros((len(modes), len(t)))
    u_t = np.zeros_like(u)
    est = 0.0
    rules = convolution_rules(t, breaks)
    for i, n in enumerate(modes):
        p = mode_params(cfg, n)
        a0, a1, af = problem.f0.coefficient(n), problem.f1.coefficient(n), problem.f.coefficient(n)
        h, hp, g1 = kernel_arrays(p.mu, p.ratio, t)
        u[i] = a0 * g1 + a1 * h
        u_t[i] = -a0 * p.stiffness * h + a1 * hp
        if af != 0.0:
            samples = [af * np.asarray(problem.f.time_factor(rule[0])) for rule in rules]
            conv, e1 = damped_convolution(p.mu, p.ratio, t, rules, samples, what=f"full mode {n}")
            conv_t, e2 = damped_convolution(p.mu, p.ratio, t, rules, samples, derivative=True,
                                            what=f"full mode {n}")
            u[i] -= conv
            u_t[i] -= conv_t
            est = max(est, e1, e2)
    return ModalState(modes, t, {"u": u, "u_t": u_t}, est)


def assemble_field(state: ModalState, grid: Grid, name: str) -> FieldGrid:
    """values[i, j] = sum_n state_n(t_j) sin(gamma_n x_i), ascending n, compensated."""
    coeffs = np.asarray(state.values[name])
    if len(state.modes) == 0:
        return FieldGrid(grid, np.zeros((grid.nx, grid.nt)))
    basis = sine_basis(state.modes, grid.x_points, grid.l)
    terms = basis[:, :, None] * coeffs[:, None, :]
    return FieldGrid(grid, compensated_sum(terms, axis=0))


def project_field(field_grid: FieldGrid, modes, n_nodes: int | None = None) -> np.ndarray:
    """Sine coefficients of a field recovered by discrete orthogonality.

    Uses the trapezoid rule on the uniform grid, which is exact for sine
    polynomials of degree below nx - 1.
    """
    g = field_grid.grid
    basis = sine_basis(modes, g.x_points, g.l)
    w = np.full(g.nx, g.dx)
    w[0] = w[-1] = 0.5 * g.dx
    return (2.0 / g.l) * np.einsum("nx,xt,x->nt", basis, field_grid.values, w)


@dataclass(frozen=True)
class Decomposition:
    """All modal states of one problem on one grid."""

    problem: Problem
    grid: Grid
    w: ModalState
    lam: ModalState
    F: ModalState
    r: ModalState
    u: ModalState

    @property
    def quadrature_error(self) -> float:
        return max(self.w.error_estimate, self.F.error_estimate, self.r.error_estimate, self.u.error_estimate)

    def field(self, name: str) -> FieldGrid:
        for state in (self.w, self.lam, self.F, self.r, self.u):
            if name in state.values:
                return assemble_field(state, self.grid, name)
        raise KeyError(name)

    def approximation(self) -> FieldGrid:
        """e^{-eps t} w + r on the grid."""
        w = self.field("w").values
        r = self.field("r").values
        decay = np.exp(-self.problem.cfg.epsilon * self.grid.t_points)[None, :]
        return FieldGrid(self.grid, decay * w + r)


def decompose(problem: Problem, grid: Grid, *, initial_velocity: str = "consistent") -> Decomposition:
    w = solve_reduced(problem, grid)
    lam = build_lambda(w, problem.cfg.l)
    F = build_source_F(problem, w, lam)
    r = solve_remainder(problem, F, grid, initial_velocity=initial_velocity)
    u = solve_full(problem, grid)
    return Decomposition(problem, grid, w, lam, F, r, u)
