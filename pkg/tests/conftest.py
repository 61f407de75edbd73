import math
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from voigt_strip.model import Problem, SineSeriesFn, StripConfig, TimeProfile

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def cfg():
    """eps = 0.1 on the strip [0, pi]: k = 20 exactly."""
    return StripConfig(0.1, 1.0, math.pi, 1.0)


@pytest.fixture
def three_mode_problem():
    cfg = StripConfig(0.1, 1.0, math.pi, 2.0)
    return Problem(
        cfg,
        SineSeriesFn.from_pairs([(1, 0.7), (2, -0.3)]),
        SineSeriesFn.from_pairs([(1, 0.2), (3, 0.5)]),
        SineSeriesFn.from_pairs([(1, 0.4), (3, 1.0)], TimeProfile("cosine", frequency=1.3)),
    )


def single_mode(cfg, f0=(), f1=(), f=(), time=None):
    return Problem(cfg, SineSeriesFn.from_pairs(f0), SineSeriesFn.from_pairs(f1),
                   SineSeriesFn.from_pairs(f, time))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


_VERDICTS = []


@pytest.fixture
def verdict():
    """Record a one-line PASS/FAIL verdict for the terminal summary, then assert it."""

    def record(label, ok, detail=""):
        _VERDICTS.append(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip())
        assert ok, f"{label}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance verdicts")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
