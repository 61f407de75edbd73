"""Modal kernel H_n across the oscillatory, critical and overdamped regimes.

Prints, for eps = 0.1 on [0, pi] (threshold k = 20), the kernel against the
adaptive ODE integrator at a few times.
"""

import math

import numpy as np

from voigt_strip.modal import kernel_h, mode_params
from voigt_strip.model import StripConfig
from voigt_strip.oracle import OdeProblem, integrate_mode

cfg = StripConfig(0.1, 1.0, math.pi, 1.0)
t = np.linspace(0.0, 1.0, 6)
print(f"k = {cfg.k:g}, N = {cfg.n_split}")
for n in (1, 10, 19, 20, 21, 60):
    p = mode_params(cfg, n)
    h = kernel_h(p, t).h
    ref, _ = integrate_mode(OdeProblem.for_mode(cfg, n), t)
    err = np.max(np.abs(h - ref)) / np.max(np.abs(ref))
    print(f"n={n:3d} {p.regime.name:12s} H(t)=" + " ".join(f"{v: .3e}" for v in h) + f"   rel.err {err:.1e}")
