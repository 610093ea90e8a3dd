import numpy as np
import pytest

from parabolic_admm.grid import GridSpec
from parabolic_admm.pde import Discretization


@pytest.fixture(scope="session")
def disc16():
    return Discretization.build(GridSpec(16, 16))


@pytest.fixture(scope="session")
def disc16_sub():
    return Discretization.build(GridSpec(16, 16, subdomain=(0.0, 0.25, 0.0, 0.25)), a0=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def ex1_small():
    from parabolic_admm.problems import discretize, example1
    return discretize(example1(), 8, 8)


@pytest.fixture(scope="session")
def ex2_small():
    from parabolic_admm.problems import discretize, example2
    return discretize(example2(), 8, 8)


@pytest.fixture(scope="session")
def ex1_16():
    from parabolic_admm.problems import discretize, example1
    return discretize(example1(), 16, 16)


_CRITERIA = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(n, ok, detail)`` then assert ``ok``."""
    store = request.config.stash.setdefault(_CRITERIA, {})

    def record(number, ok, detail):
        store[number] = (ok, detail)
        print(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_CRITERIA, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(store):
        ok, detail = store[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
