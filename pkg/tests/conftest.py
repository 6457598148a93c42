"""Shared fixtures.

One construction run, one trace file, and one irrational contrast target
serve every test module; building them once per session keeps the suite
fast.  The acceptance module records a one-line verdict per criterion in
CRITERION_LINES and the terminal summary replays them at the end.
"""

import pytest

from simdioph.bestapprox import TargetVector, best_sequence
from simdioph.construction import run, xi_enclosure
from simdioph.exact import DecreasingFn, RatInterval, sqrt_lower, sqrt_upper
from simdioph.trace_io import save_trace

CRITERION_LINES: list = []


@pytest.fixture(scope="session")
def phi():
    return DecreasingFn.power(1)


@pytest.fixture(scope="session")
def state8(phi):
    # 8 certified steps; roughly a second
    return run(phi, 8)


@pytest.fixture(scope="session")
def xi8(state8):
    return xi_enclosure(state8)


@pytest.fixture(scope="session")
def trace8(state8, tmp_path_factory):
    path = tmp_path_factory.mktemp("trace") / "construction.json"
    save_trace(state8, str(path))
    return path


@pytest.fixture(scope="session")
def sqrt23():
    """(sqrt(2)-1, sqrt(3)-1) enclosed at 256 bits."""
    i1 = RatInterval(sqrt_lower(2, 256) - 1, sqrt_upper(2, 256) - 1)
    i2 = RatInterval(sqrt_lower(3, 256) - 1, sqrt_upper(3, 256) - 1)
    return TargetVector.from_intervals(i1, i2, "decimal-literal")


@pytest.fixture(scope="session")
def golden():
    """The golden ratio conjugate (sqrt(5)-1)/2 at 256 bits, n = 1 view."""
    lo = (sqrt_lower(5, 256) - 1) / 2
    hi = (sqrt_upper(5, 256) - 1) / 2
    return TargetVector.from_intervals(RatInterval(lo, hi), None, "decimal-literal")


@pytest.fixture(scope="session")
def seq23(sqrt23):
    return best_sequence(sqrt23, 10**4)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERION_LINES:
            terminalreporter.write_line(line)
