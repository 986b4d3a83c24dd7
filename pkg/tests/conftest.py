import numpy as np
import pytest

from capalloc.scenario import ScenarioSet


def random_scenarios(rng, n_range=(2, 5), m_range=(4, 16), scale=3.0, uniform=False):
    n = int(rng.integers(*n_range))
    m = int(rng.integers(*m_range))
    probs = np.full(m, 1.0 / m) if uniform else rng.dirichlet(np.ones(m))
    loc = rng.uniform(-1.0, 1.0)
    return ScenarioSet(probs, rng.normal(loc=loc, size=(n, m)) * scale)


def well_separated(scn, step=1e-4, factor=4.0):
    """Aggregate values distinct enough that +/- step perturbations keep their order."""
    x = np.sort(scn.total())
    return np.min(np.diff(x)) > factor * step * np.max(np.abs(scn.positions))


def same_sign(a, b):
    return (a > 0 and b > 0) or (a < 0 and b < 0)


@pytest.fixture
def euler_demo():
    return ScenarioSet.uniform([[-10, 0, 10, 20], [-2, 1, 1, 1]])


@pytest.fixture
def game_demo():
    return ScenarioSet.uniform([[-6, 2, 4, 8], [4, -6, 2, 8]])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
