"""Independent reference solvers used to validate the closed forms.

``integrate_mode`` integrates one modal ODE with an adaptive embedded
Runge-Kutta method; ``solve_fd`` discretises the full PDE with finite
differences.  Neither shares code paths with the modal kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import solve_banded

from .errors import StiffnessFailure, UnstableParameters, ValidationError
from .model import FieldGrid, Grid, Problem, StripConfig, eval_sine_series

ODE_RTOL = 1e-12
CFL_MAX = 0.9


@dataclass(frozen=True)
class OdeProblem:
    """T'' + damping T' + stiffness T = forcing(t),  T(0) = y0, T'(0) = v0."""

    damping: float
    stiffness: float
    y0: float = 0.0
    v0: float = 1.0
    forcing: Callable[[float], float] | None = None

    def __post_init__(self):
        if self.damping < 0 or self.stiffness < 0:
            raise ValidationError("modal ODE coefficients must be non-negative")

    @classmethod
    def for_mode(cls, cfg: StripConfig, n: int, y0=0.0, v0=1.0, forcing=None) -> "OdeProblem":
        gamma = math.pi * n / cfg.l
        return cls(cfg.epsilon * gamma**2, (cfg.c * gamma) ** 2, y0, v0, forcing)


def integrate_mode(p: OdeProblem, t_grid, rtol: float = ODE_RTOL, method: str = "RK45"):
    """Trajectory (values, derivatives) of the modal ODE at ``t_grid``."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid[0] != 0.0 or np.any(np.diff(t_grid) <= 0):
        raise ValidationError("t_grid must start at 0 and increase")
    a, b = p.damping, p.stiffness
    g = p.forcing

    def rhs(t, y):
        force = g(t) if g is not None else 0.0
        return [y[1], force - a * y[1] - b * y[0]]

    # absolute floor scaled to the natural amplitude of the trajectory (unit scale for zero data)
    scale = max(abs(p.y0), abs(p.v0) / math.sqrt(b) if b > 0 else abs(p.v0)) or 1.0
    t_end = float(t_grid[-1])
    if t_end == 0.0:
        return np.array([p.y0]), np.array([p.v0])
    sol = solve_ivp(rhs, (0.0, t_end), [p.y0, p.v0], method=method, t_eval=t_grid,
                    rtol=rtol, atol=[rtol * 1e-2 * scale, rtol * 1e-2 * scale * max(1.0, math.sqrt(b))],
                    first_step=None)
    if not sol.success:
        raise StiffnessFailure(f"ODE integration failed: {sol.message}")
    return sol.y[0], sol.y[1]


@dataclass(frozen=True)
class FdScheme:
    """Uniform grid with nx points in x and nt time levels on [0, T]."""

    nx: int
    nt: int

    def grid(self, cfg: StripConfig) -> Grid:
        return Grid(self.nx, self.nt, cfg.l, cfg.t_max)

    def courant(self, cfg: StripConfig) -> float:
        g = self.grid(cfg)
        return cfg.c * g.dt / g.dx

    @classmethod
    def with_courant(cls, cfg: StripConfig, nx: int, courant: float = 0.5) -> "FdScheme":
        dx = cfg.l / (nx - 1)
        steps = math.ceil(cfg.t_max * cfg.c / (courant * dx))
        return cls(nx, steps + 1)


def _second_derivative(fn, x, t, l):
    """Exact x-second-derivative of a sine series at time t."""
    if fn.is_empty:
        return np.zeros_like(x)
    scaled = type(fn)(fn.modes, tuple(-(math.pi * n / l) ** 2 * a for n, a in zip(fn.modes, fn.coeffs)), fn.time)
    return eval_sine_series(scaled, x, t, l)


def solve_fd(problem: Problem, scheme: FdScheme) -> FieldGrid:
    """Leapfrog in time for u_tt, centred implicit treatment of eps u_xxt.

    (I - eps dt/2 D) u^{m+1} = 2u^m - u^{m-1} + c^2 dt^2 D u^m
                               - eps dt/2 D u^{m-1} - dt^2 f^m
    """
    cfg = problem.cfg
    grid = scheme.grid(cfg)
    courant = scheme.courant(cfg)
    if courant > CFL_MAX:
        raise UnstableParameters(f"c*dt/dx = {courant:.4f} violates c*dt/dx <= {CFL_MAX}")
    x, t = grid.x_points, grid.t_points
    dx, dt = grid.dx, grid.dt
    nx, nt = grid.nx, grid.nt
    eps, c2 = cfg.epsilon, cfg.c**2
    u = np.zeros((nx, nt))
    if nx <= 2:
        return FieldGrid(grid, u)

    def lap(v):
        out = np.zeros_like(v)
        out[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / dx**2
        return out

    def forcing(tm):
        return eval_sine_series(problem.f, x, tm, cfg.l)

    f0 = eval_sine_series(problem.f0, x, 0.0, cfg.l)
    f1 = eval_sine_series(problem.f1, x, 0.0, cfg.l)
    u_tt0 = c2 * _second_derivative(problem.f0, x, 0.0, cfg.l) + eps * _second_derivative(problem.f1, x, 0.0, cfg.l) - forcing(0.0)
    u[:, 0] = f0
    u[:, 1] = f0 + dt * f1 + 0.5 * dt**2 * u_tt0
    u[0, :2] = u[-1, :2] = 0.0

    m = nx - 2
    r = eps * dt / (2.0 * dx**2)
    ab = np.zeros((3, m))
    ab[0, 1:] = -r
    ab[1, :] = 1.0 + 2.0 * r
    ab[2, :-1] = -r
    for j in range(1, nt - 1):
        rhs = (2.0 * u[:, j] - u[:, j - 1] + c2 * dt**2 * lap(u[:, j])
               - 0.5 * eps * dt * lap(u[:, j - 1]) - dt**2 * forcing(t[j]))
        u[1:-1, j + 1] = solve_banded((1, 1), ab, rhs[1:-1])
    return FieldGrid(grid, u)


def fd_energy(field: FieldGrid, cfg: StripConfig) -> np.ndarray:
    """Discrete energy |(u^{m+1}-u^m)/dt|^2 - c^2 <D u^m, u^{m+1}> per half step.

    Non-increasing for the scheme of :func:`solve_fd` when f = 0.
    """
    u = field.values
    dx, dt = field.grid.dx, field.grid.dt
    lap = np.zeros_like(u)
    lap[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / dx**2
    vel = (u[:, 1:] - u[:, :-1]) / dt
    return dx * (np.sum(vel**2, axis=0) - cfg.c**2 * np.sum(lap[:, :-1] * u[:, 1:], axis=0))
