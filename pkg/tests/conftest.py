import math

import numpy as np
import pytest

from lklab.measures import CircleDensity, DrivingMeasure, MeasureSlice


def poisson_values(R: float, n: int) -> np.ndarray:
    th = 2 * np.pi * np.arange(n) / n
    return (R * R - 1) / (2 * np.pi * (1 - 2 * R * np.cos(th) + R * R))


def poisson_density(R: float, n: int = 1024) -> CircleDensity:
    return CircleDensity(poisson_values(R, n))


def random_smooth_density(rng, n: int = 1024, modes: int = 4, scale: float = 0.6) -> CircleDensity:
    """Normalized ``exp`` of a random trigonometric polynomial."""
    th = 2 * np.pi * np.arange(n) / n
    k = np.arange(1, modes + 1)
    a = rng.normal(scale=scale, size=modes) / k
    b = rng.normal(scale=scale, size=modes) / k
    log_rho = (a[:, None] * np.cos(k[:, None] * th) + b[:, None] * np.sin(k[:, None] * th)).sum(axis=0)
    return CircleDensity(np.exp(log_rho)).normalized()


def random_measure(rng, n_slices: int = 8, T: float = 1.0, n: int = 256, normalized: bool = True) -> DrivingMeasure:
    edges = np.sort(rng.uniform(0, T, n_slices - 1))
    edges = np.concatenate([[0.0], edges, [T]])
    # Keep slices from degenerating.
    edges = 0.5 * edges + 0.5 * np.linspace(0, T, n_slices + 1)
    slices = []
    for a, b in zip(edges[:-1], edges[1:]):
        d = random_smooth_density(rng, n)
        if not normalized:
            d = d.scaled(rng.uniform(0.3, 2.5))
        slices.append(MeasureSlice(a, b, d))
    return DrivingMeasure(slices)


def random_time_change(rng, T: float, n: int = 512):
    """``t(s) = s + T sum_k c_k sin(k pi s / T) / (k pi)`` with ``sum |c_k| < 1``."""
    k = np.arange(1, 4)
    c = rng.uniform(-1, 1, size=3)
    c *= rng.uniform(0.2, 0.9) / np.sum(np.abs(c))

    def t(s):
        s = np.asarray(s, dtype=float)
        return s + T * (c[:, None] * np.sin(np.outer(k, s) * np.pi / T) / (k[:, None] * np.pi)).sum(axis=0)

    def dt(s):
        s = np.asarray(s, dtype=float)
        return 1 + (c[:, None] * np.cos(np.outer(k, s) * np.pi / T)).sum(axis=0)

    return t, dt


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def poisson2():
    return DrivingMeasure.constant(poisson_density(2.0), 1.0)


LOG43 = math.log(4.0 / 3.0)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, passed: bool, detail: str) -> None:
    """Print and remember one acceptance line; the test asserts separately."""
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
