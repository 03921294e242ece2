import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gaugewave.minimizer import SolverConfig, minimize
from gaugewave.nonlinearity import NonlinearityModel
from gaugewave.radial import RadialGrid
from gaugewave.shooting import solve_shooting

settings.register_profile(
    "gaugewave", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("gaugewave")

# lines collected by the acceptance tests, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def saturable():
    return NonlinearityModel.saturable(1.0, 1.0)


@pytest.fixture(scope="session")
def grid():
    return RadialGrid()


@pytest.fixture(scope="session")
def small_grid():
    return RadialGrid(400, 20.0)


@pytest.fixture(scope="session")
def shooting08(saturable, grid):
    return solve_shooting(saturable, 0.8, grid)


@pytest.fixture(scope="session")
def sigma2_08(shooting08, grid):
    return 0.5 * float(np.dot(grid.weights, shooting08.u.values**2))


@pytest.fixture(scope="session")
def solutions(saturable, sigma2_08):
    """Converged solutions at the shooting mass for q in {0, 0.025, 0.05, 0.1}."""
    return {q: minimize(SolverConfig(q=q, sigma2=sigma2_08), saturable)
            for q in (0.0, 0.025, 0.05, 0.1)}


def gaussian(grid, amp=1.0, width=1.0):
    vals = amp * np.exp(-(grid.nodes / width) ** 2)
    vals[-1] = 0.0
    return grid.field(vals)


def random_smooth(grid, rng, n_modes=4):
    """Random smooth radial bump: sum of Gaussians with random widths and centres."""
    r = grid.nodes
    vals = np.zeros_like(r)
    for _ in range(n_modes):
        a = rng.uniform(0.2, 2.0)
        w = rng.uniform(0.5, 3.0)
        c = rng.uniform(0.0, 3.0)
        vals += a * (np.exp(-((r - c) / w) ** 2) + np.exp(-((r + c) / w) ** 2))
    vals[-1] = 0.0
    return grid.field(vals)
