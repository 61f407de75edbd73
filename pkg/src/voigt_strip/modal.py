"""Per-mode kernels of the damped strip problem.

Mode n obeys T'' + eps*gamma_n^2 T' + c^2 gamma_n^2 T = -f_n.  With
mu = b n^2 = eps*gamma_n^2/2 and ratio = k/n its characteristic roots are
-mu (1 -+ sqrt(1 - ratio^2)), so the impulse response is

    H_n(t) = exp(-mu t) sinh(mu t s) / (mu s),     s = sqrt(1 - ratio^2),

read as sin/sinc for ratio > 1 and as t exp(-mu t) at ratio = 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import NegativeTime, WrongRegime
from .model import StripConfig

DELTA_CRIT = 1e-6
# |z^2| cap for the Taylor band; the degree-7 truncation error is then < 1e-19.
TAYLOR_Z2_MAX = 0.25
SINH_SWITCH = 30.0

_SINHC_COEF = np.array([1.0 / math.factorial(2 * j + 1) for j in range(8)])
_COSH_COEF = np.array([1.0 / math.factorial(2 * j) for j in range(8)])


class Regime(str, enum.Enum):
    OSCILLATORY = "Oscillatory"
    CRITICAL = "Critical"
    HYPERBOLIC = "Hyperbolic"


def classify(discriminant: float) -> Regime:
    if discriminant < -DELTA_CRIT:
        return Regime.OSCILLATORY
    if discriminant > DELTA_CRIT:
        return Regime.HYPERBOLIC
    return Regime.CRITICAL


@dataclass(frozen=True)
class ModeParams:
    n: int
    gamma_n: float
    b: float
    q: float
    k: float
    ratio: float
    discriminant: float
    regime: Regime
    epsilon: float
    c: float

    @property
    def mu(self) -> float:
        """b n^2, half the modal damping rate."""
        return self.b * self.n * self.n

    @property
    def damping(self) -> float:
        return self.epsilon * self.gamma_n**2

    @property
    def stiffness(self) -> float:
        return (self.c * self.gamma_n) ** 2


@dataclass(frozen=True)
class KernelValue:
    h: float
    h_prime: float


def mode_params(cfg: StripConfig, n: int) -> ModeParams:
    if n < 1:
        raise ValueError("mode index must be >= 1")
    k = cfg.k
    if cfg.k_is_integer and n == round(k):
        ratio = 1.0
    else:
        ratio = k / n
    disc = (1.0 - ratio) * (1.0 + ratio)
    return ModeParams(
        n=n,
        gamma_n=math.pi * n / cfg.l,
        b=cfg.b,
        q=cfg.q,
        k=k,
        ratio=ratio,
        discriminant=disc,
        regime=classify(disc),
        epsilon=cfg.epsilon,
        c=cfg.c,
    )


def mode_arrays(cfg: StripConfig, n_lo: int, n_hi: int):
    """(n, mu, ratio) for modes n_lo..n_hi inclusive, as float arrays."""
    n = np.arange(n_lo, n_hi + 1, dtype=float)
    ratio = cfg.k / n
    if cfg.k_is_integer:
        ratio[n == round(cfg.k)] = 1.0
    return n, cfg.b * n * n, ratio


def kernel_arrays(mu, ratio, t, shift: float = 0.0):
    """Vectorised (H, H', G1) for broadcastable mode/time arrays.

    G1 = H' + 2 mu H is the homogeneous solution with T(0)=1, T'(0)=0.
    All three outputs are multiplied by exp(shift * t); a positive shift lets
    callers rescale fast-decaying tails without underflow.
    """
    mu, ratio, t = np.broadcast_arrays(
        np.asarray(mu, dtype=float), np.asarray(ratio, dtype=float), np.asarray(t, dtype=float)
    )
    disc = (1.0 - ratio) * (1.0 + ratio)
    tau = mu * t
    z2 = tau * tau * disc
    taylor = (np.abs(disc) <= DELTA_CRIT) & (np.abs(z2) <= TAYLOR_Z2_MAX)
    hyp = (disc > 0) & ~taylor
    osc = (disc < 0) & ~taylor

    h = np.zeros(mu.shape)
    hp = np.zeros(mu.shape)
    g1 = np.zeros(mu.shape)
    e0 = np.exp((shift - mu) * t)

    if np.any(taylor):
        w = z2[taylor]
        sh = np.polynomial.polynomial.polyval(w, _SINHC_COEF)
        ch = np.polynomial.polynomial.polyval(w, _COSH_COEF)
        e, tt, m = e0[taylor], t[taylor], mu[taylor]
        h[taylor] = e * tt * sh
        hp[taylor] = e * (ch - tau[taylor] * sh)
        g1[taylor] = m * h[taylor] + e * ch

    if np.any(osc):
        sig = np.sqrt(-disc[osc])
        m, e = mu[osc], e0[osc]
        th = tau[osc] * sig
        h[osc] = e * np.sin(th) / (m * sig)
        cos_th = e * np.cos(th)
        hp[osc] = -m * h[osc] + cos_th
        g1[osc] = m * h[osc] + cos_th

    if np.any(hyp):
        s = np.sqrt(disc[hyp])
        one_minus_s = ratio[hyp] ** 2 / (1.0 + s)
        m, tt, e = mu[hyp], t[hyp], e0[hyp]
        x = tau[hyp] * s
        small = x <= SINH_SWITCH
        hh = np.empty_like(s)
        hpp = np.empty_like(s)
        gg = np.empty_like(s)

        xs, es, ss, ms = x[small], e[small], s[small], m[small]
        sh = np.sinh(xs)
        hh[small] = es * sh / (ms * ss)
        hpp[small] = es * (np.exp(-xs) - sh * one_minus_s[small] / ss)
        gg[small] = ms * hh[small] + es * np.cosh(xs)

        big = ~small
        sb, mb, tb, ob = s[big], m[big], tt[big], one_minus_s[big]
        a = np.exp((shift - mb * ob) * tb)
        bb = np.exp((shift - mb * (1.0 + sb)) * tb)
        hh[big] = (a - bb) / (2.0 * mb * sb)
        hpp[big] = (-ob * a + (1.0 + sb) * bb) / (2.0 * sb)
        gg[big] = mb * hh[big] + 0.5 * (a + bb)

        h[hyp], hp[hyp], g1[hyp] = hh, hpp, gg

    return h, hp, g1


def _check_time(t):
    if np.any(np.asarray(t) < 0):
        raise NegativeTime("kernels are defined for t >= 0")


def kernel_h(p: ModeParams, t) -> KernelValue:
    """H_n(t) and dH_n/dt; ``t`` may be scalar or array."""
    _check_time(t)
    h, hp, _ = kernel_arrays(p.mu, p.ratio, t)
    if np.ndim(t) == 0:
        return KernelValue(float(h), float(hp))
    return KernelValue(h, hp)


def kernel_g1(p: ModeParams, t):
    """Homogeneous modal solution with unit initial value and zero velocity."""
    _check_time(t)
    g1 = kernel_arrays(p.mu, p.ratio, t)[2]
    return float(g1) if np.ndim(t) == 0 else g1


def mode_decay_bound(p: ModeParams, t):
    """Rigorous bound exp(-c^2 t/eps) / (2 b n^2 sqrt(disc)) on |H_n(t)| for overdamped modes."""
    if p.regime is not Regime.HYPERBOLIC:
        raise WrongRegime(f"mode {p.n} is {p.regime.value}, bound needs Hyperbolic")
    _check_time(t)
    return np.exp(-p.c**2 * np.asarray(t, dtype=float) / p.epsilon) / (2.0 * p.mu * math.sqrt(p.discriminant))
