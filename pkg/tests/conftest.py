import logging

import pytest

from fnls.ground_state import solve_ground_state
from fnls.params import PhysParams
from fnls.spectral import make_grid

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session", autouse=True)
def _quiet_boundary_warning():
    # the algebraic tail of Q always trips the boundary-amplitude warning
    logging.getLogger("fnls.spectral").setLevel(logging.ERROR)


@pytest.fixture(scope="session")
def params():
    return PhysParams(2, 0.75, 3.0)


@pytest.fixture(scope="session")
def grid():
    return make_grid(2, 256, 20.0)


@pytest.fixture(scope="session")
def ground(params, grid):
    return solve_ground_state(params, grid, tol=1e-10)


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(2, 128, 12.0)


@pytest.fixture(scope="session")
def small_ground(params, small_grid):
    return solve_ground_state(params, small_grid, tol=1e-10)


@pytest.fixture(scope="session")
def report():
    """Record one acceptance line; returns the pass flag so tests can assert on it."""

    def _report(number, name, passed, detail=""):
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'} criterion {number:>2} {name}: {detail}")
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
