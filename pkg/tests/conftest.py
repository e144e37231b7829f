from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import settings

# mpmath oracles are slow; correctness, not latency, is under test
settings.register_profile("qairy", deadline=None, derandomize=True)
settings.load_profile("qairy")

Q_GRID = (0.2, 0.5, 0.8, 0.5 * cmath.exp(0.3j))


def annulus(seed: int, n: int, low: float = 0.05, high: float = 10.0) -> list[complex]:
    rng = np.random.default_rng(seed)
    r = np.exp(rng.uniform(math.log(low), math.log(high), n))
    phase = rng.uniform(0, 2 * math.pi, n)
    return list(r * np.exp(1j * phase))


@pytest.fixture
def grid_points():
    return annulus(7, 100)


def rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    lines = test_acceptance.summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
