import time

import numpy as np
import pytest

from ldgcore.mesh import build_mesh
from ldgcore.optimizer import ObstacleSpec, SolverConfig, initial_guess, minimize, sweep

MU = 10.0

# wall-clock seconds of the expensive session fixtures, and the acceptance lines
TIMINGS: dict = {}
ACCEPTANCE: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def mesh128():
    return build_mesh(128)


@pytest.fixture(scope="session")
def mesh32():
    return build_mesh(32)


def _solve(mesh, obs, mu=MU, **kw):
    u0 = initial_guess(mesh, obs.branch, 0.2, mu)
    return minimize(u0, mu, obs, SolverConfig(**kw))


def _timed(key, fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    TIMINGS[key] = time.perf_counter() - t0
    return out


@pytest.fixture(scope="session")
def plus128(mesh128):
    """Torus branch: b = -1/2, mu = 10, n = 128."""
    return _timed("plus128", _solve, mesh128, ObstacleSpec.plus(-0.5))


@pytest.fixture(scope="session")
def minus128(mesh128):
    """Split-core branch: c = 1/2, mu = 10, n = 128."""
    return _timed("minus128", _solve, mesh128, ObstacleSpec.minus(0.5))


@pytest.fixture(scope="session")
def mu_sweep128(mesh128):
    return _timed("mu_sweep128", sweep, "mu", [1.0, 10.0, 100.0, 1000.0], mesh128,
                  branch="PLUS", analyze=False)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_unit(rng, k):
    x = rng.normal(size=(k, 3))
    return x / np.linalg.norm(x, axis=1, keepdims=True)
