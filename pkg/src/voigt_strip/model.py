"""Problem configuration, sine-series data and grids for the Voigt strip problem.

The strip problem is

    d_xx(eps u_t + c^2 u) - u_tt = f      on [0, l] x (0, T]
    u(x, 0) = f0(x),  u_t(x, 0) = f1(x),  u(0, t) = u(l, t) = 0,

with all data given as finite sine series.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BoundaryViolation,
    EmptyData,
    NonPositiveParameter,
    OutOfDomain,
    ValidationError,
)
from .summation import compensated_sum

INTEGER_K_RTOL = 1e-12


def snap_floor(value: float, rtol: float = INTEGER_K_RTOL) -> int:
    """floor(value), treating values within rtol*value of an integer as that integer."""
    nearest = round(value)
    if abs(value - nearest) <= rtol * max(abs(value), 1.0):
        return int(nearest)
    return int(math.floor(value))


def is_near_integer(value: float, rtol: float = INTEGER_K_RTOL) -> bool:
    return abs(value - round(value)) <= rtol * max(abs(value), 1.0)


@dataclass(frozen=True)
class StripConfig:
    epsilon: float
    c: float = 1.0
    l: float = math.pi
    t_max: float = 1.0

    def __post_init__(self):
        for name in ("epsilon", "c", "l", "t_max"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise NonPositiveParameter(f"{name} must be a finite positive number, got {v!r}", field=name)

    @property
    def q(self) -> float:
        return math.pi**2 / (2.0 * self.l**2)

    @property
    def b(self) -> float:
        return self.q * self.epsilon

    @property
    def k(self) -> float:
        """Regime threshold 2cl/(pi eps)."""
        return 2.0 * self.c * self.l / (math.pi * self.epsilon)

    @property
    def k_is_integer(self) -> bool:
        return is_near_integer(self.k)

    @property
    def n_split(self) -> int:
        """N = floor(k): last mode of the circular part."""
        return snap_floor(self.k)

    @property
    def beta(self) -> float:
        """k - N for non-integer k, 0 for integer k."""
        return 0.0 if self.k_is_integer else self.k - math.floor(self.k)

    def n_alpha(self, alpha: float) -> int:
        return snap_floor(2.0 * self.c * self.l / (math.pi * self.epsilon**alpha))

    def with_epsilon(self, epsilon: float) -> "StripConfig":
        return StripConfig(epsilon, self.c, self.l, self.t_max)

    def gamma(self, n):
        return math.pi * np.asarray(n, dtype=float) / self.l


def sine_basis(modes, x, l: float) -> np.ndarray:
    """sin(n pi x / l) with shape (len(modes), len(x)); exactly zero at x = 0 and x = l."""
    n = np.atleast_1d(np.asarray(modes, dtype=float))
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    vals = np.sin(np.outer(math.pi * n / l, xs))
    vals[:, (xs == 0.0) | (xs == l)] = 0.0
    return vals


# time dependence -------------------------------------------------------------

TIME_KINDS = ("constant", "exp_decay", "cosine", "table")


@dataclass(frozen=True)
class TimeProfile:
    """Scalar time factor shared by every mode of a forcing series.

    ``table`` profiles are uniformly sampled from ``t0`` with spacing ``dt`` and
    linearly interpolated; outside the table the end values are held.
    """

    kind: str = "constant"
    rate: float = 0.0
    frequency: float = 0.0
    t0: float = 0.0
    dt: float = 1.0
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in TIME_KINDS:
            raise ValidationError(f"unknown time profile kind {self.kind!r}", field="time.kind")
        if self.kind == "table":
            if len(self.values) < 2:
                raise EmptyData("table time profile needs at least two samples", field="time.values")
            if not self.dt > 0:
                raise NonPositiveParameter("table dt must be positive", field="time.dt")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.ones_like(t)
        if self.kind == "exp_decay":
            return np.exp(-self.rate * t)
        if self.kind == "cosine":
            return np.cos(self.frequency * t)
        knots = self.t0 + self.dt * np.arange(len(self.values))
        return np.interp(t, knots, np.asarray(self.values, dtype=float))

    def breakpoints(self, t_max: float) -> np.ndarray:
        """Interior kinks of the profile inside (0, t_max)."""
        if self.kind != "table":
            return np.empty(0)
        knots = self.t0 + self.dt * np.arange(len(self.values))
        return knots[(knots > 0) & (knots < t_max)]

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "exp_decay":
            out["rate"] = self.rate
        elif self.kind == "cosine":
            out["frequency"] = self.frequency
        elif self.kind == "table":
            out.update(t0=self.t0, dt=self.dt, values=list(self.values))
        return out


@dataclass(frozen=True)
class SineSeriesFn:
    """sum_n a_n * g(t) * sin(n pi x / l) over a finite, increasing set of modes."""

    modes: tuple = ()
    coeffs: tuple = ()
    time: TimeProfile | None = None

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(int(n) for n in self.modes))
        object.__setattr__(self, "coeffs", tuple(float(a) for a in self.coeffs))
        if len(self.modes) != len(self.coeffs):
            raise BoundaryViolation("modes and coefficients differ in length")
        if any(n < 1 for n in self.modes):
            raise BoundaryViolation("mode indices must be >= 1")
        if any(b <= a for a, b in zip(self.modes, self.modes[1:])):
            raise BoundaryViolation("mode indices must be strictly increasing")
        if not all(math.isfinite(a) for a in self.coeffs):
            raise BoundaryViolation("coefficients must be finite")

    @classmethod
    def from_pairs(cls, pairs, time: TimeProfile | None = None) -> "SineSeriesFn":
        pairs = list(pairs)
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs), time)

    @property
    def is_empty(self) -> bool:
        return len(self.modes) == 0

    def coefficient(self, n: int) -> float:
        try:
            return self.coeffs[self.modes.index(n)]
        except ValueError:
            return 0.0

    def time_factor(self, t):
        if self.time is None:
            return np.ones_like(np.asarray(t, dtype=float))
        return self.time(t)

    def scaled(self, a: float) -> "SineSeriesFn":
        return SineSeriesFn(self.modes, tuple(a * v for v in self.coeffs), self.time)

    def pairs(self) -> list:
        return [[n, a] for n, a in zip(self.modes, self.coeffs)]


def eval_sine_series(fn: SineSeriesFn, x, t=0.0, l: float = math.pi):
    """Evaluate the series at positions ``x`` (scalar or array) and scalar time ``t``."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs < 0) or np.any(xs > l):
        raise OutOfDomain(f"x outside [0, {l}]")
    if fn.is_empty:
        out = np.zeros_like(xs)
    else:
        terms = np.asarray(fn.coeffs)[:, None] * sine_basis(fn.modes, xs, l)
        out = compensated_sum(terms, axis=0) * float(fn.time_factor(t))
        out = np.atleast_1d(np.asarray(out, dtype=float))
    return float(out[0]) if np.ndim(x) == 0 else out


# problems and grids ----------------------------------------------------------

@dataclass(frozen=True)
class Problem:
    cfg: StripConfig
    f0: SineSeriesFn = field(default_factory=SineSeriesFn)
    f1: SineSeriesFn = field(default_factory=SineSeriesFn)
    f: SineSeriesFn = field(default_factory=SineSeriesFn)

    @property
    def k(self) -> float:
        return self.cfg.k

    @property
    def k_is_integer(self) -> bool:
        return self.cfg.k_is_integer

    @property
    def modes(self) -> tuple:
        return tuple(sorted(set(self.f0.modes) | set(self.f1.modes) | set(self.f.modes)))

    def scaled(self, a: float) -> "Problem":
        return Problem(self.cfg, self.f0.scaled(a), self.f1.scaled(a), self.f.scaled(a))

    def with_epsilon(self, epsilon: float) -> "Problem":
        return Problem(self.cfg.with_epsilon(epsilon), self.f0, self.f1, self.f)

    def to_json(self) -> dict:
        out = {
            "epsilon": self.cfg.epsilon,
            "c": self.cfg.c,
            "l": self.cfg.l,
            "t_max": self.cfg.t_max,
            "f0": self.f0.pairs(),
            "f1": self.f1.pairs(),
            "f": {"modes": self.f.pairs()},
        }
        if self.f.time is not None:
            out["f"]["time"] = self.f.time.to_json()
        return out


def validate_config(cfg: StripConfig, f0=None, f1=None, f=None) -> Problem:
    """Check data against the configuration and return the validated problem.

    Raises the first problem found; ``exc.errors`` lists all of them.
    """
    errors: list[ValidationError] = []
    data = {}
    for name, fn in (("f0", f0), ("f1", f1), ("f", f)):
        if fn is None:
            fn = SineSeriesFn()
        if not isinstance(fn, SineSeriesFn):
            try:
                fn = SineSeriesFn.from_pairs(fn)
            except ValidationError as exc:
                exc.field = exc.field or name
                errors.append(exc)
                continue
        for xb in (0.0, cfg.l):
            if not fn.is_empty and eval_sine_series(fn, xb, 0.0, cfg.l) != 0.0:
                errors.append(BoundaryViolation(f"{name} does not vanish at x={xb}", field=name))
        data[name] = fn
    if not errors and all(fn.is_empty for fn in data.values()):
        errors.append(EmptyData("problem has no data modes; give at least one (possibly zero) coefficient"))
    if errors:
        first = errors[0]
        first.errors = errors
        raise first
    return Problem(cfg, data["f0"], data["f1"], data["f"])


PROBLEM_KEYS = {"epsilon", "c", "l", "t_max", "f0", "f1", "f"}
FORCING_KEYS = {"modes", "time"}
TIME_KEYS = {
    "constant": {"kind"},
    "exp_decay": {"kind", "rate"},
    "cosine": {"kind", "frequency"},
    "table": {"kind", "t0", "dt", "values"},
}


def _pairs(raw, name):
    if not isinstance(raw, list) or any(not isinstance(p, list) or len(p) != 2 for p in raw):
        raise ValidationError(f"{name} must be a list of [n, a] pairs", field=name)
    for n, _ in raw:
        if isinstance(n, bool) or not isinstance(n, int):
            raise BoundaryViolation(f"{name}: mode index {n!r} is not an integer", field=name)
    return raw


def problem_from_dict(doc: dict) -> Problem:
    if not isinstance(doc, dict):
        raise ValidationError("problem document must be a JSON object")
    unknown = set(doc) - PROBLEM_KEYS
    if unknown:
        raise ValidationError(f"unknown fields: {sorted(unknown)}")
    missing = {"epsilon", "c", "l", "t_max"} - set(doc)
    if missing:
        raise ValidationError(f"missing fields: {sorted(missing)}")
    params = []
    for key in ("epsilon", "c", "l", "t_max"):
        v = doc[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise NonPositiveParameter(f"{key} must be a number, got {v!r}", field=key)
        params.append(float(v))
    cfg = StripConfig(*params)
    f0 = SineSeriesFn.from_pairs(_pairs(doc.get("f0", []), "f0"))
    f1 = SineSeriesFn.from_pairs(_pairs(doc.get("f1", []), "f1"))
    raw_f = doc.get("f", {"modes": []})
    if not isinstance(raw_f, dict) or set(raw_f) - FORCING_KEYS:
        raise ValidationError("f must be an object with fields {modes, time}", field="f")
    time = None
    if "time" in raw_f:
        spec = raw_f["time"]
        kind = spec.get("kind") if isinstance(spec, dict) else None
        if kind not in TIME_KEYS:
            raise ValidationError(f"unknown time kind {kind!r}", field="f.time.kind")
        extra = set(spec) - TIME_KEYS[kind]
        if extra:
            raise ValidationError(f"unknown fields in f.time: {sorted(extra)}", field="f.time")
        kwargs = {k: v for k, v in spec.items() if k != "kind"}
        if "values" in kwargs:
            kwargs["values"] = tuple(float(v) for v in kwargs["values"])
        time = TimeProfile(kind, **kwargs)
    f = SineSeriesFn.from_pairs(_pairs(raw_f.get("modes", []), "f.modes"), time)
    return validate_config(cfg, f0, f1, f)


def load_problem(path) -> Problem:
    return problem_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class Grid:
    nx: int
    nt: int
    l: float
    t_max: float

    def __post_init__(self):
        if self.nx < 2 or self.nt < 2:
            raise ValidationError("grid needs at least two points per axis")

    @classmethod
    def for_config(cls, cfg: StripConfig, nx: int = 65, nt: int = 101) -> "Grid":
        return cls(nx, nt, cfg.l, cfg.t_max)

    @property
    def x_points(self) -> np.ndarray:
        return np.linspace(0.0, self.l, self.nx)

    @property
    def t_points(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.nt)

    @property
    def dx(self) -> float:
        return self.l / (self.nx - 1)

    @property
    def dt(self) -> float:
        return self.t_max / (self.nt - 1)


@dataclass(frozen=True)
class FieldGrid:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.grid.nx, self.grid.nt):
            raise ValidationError(f"values shape {self.values.shape} does not match grid")

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))
