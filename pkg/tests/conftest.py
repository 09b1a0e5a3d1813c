import numpy as np
import pytest

from levy_schrodinger.cauchy_examples import cauchy1, student3
from levy_schrodinger.grid import Grid
from levy_schrodinger.levy_core import cauchy_triplet


@pytest.fixture(scope="session")
def cauchy():
    return cauchy_triplet()


@pytest.fixture(scope="session")
def s3():
    return student3(1.0)


@pytest.fixture(scope="session")
def c1():
    return cauchy1(1.0)


@pytest.fixture(scope="session")
def s3_ground(s3):
    return s3.ground_state()


@pytest.fixture(scope="session")
def c1_ground(c1):
    return c1.ground_state()


@pytest.fixture
def small_grid():
    return Grid.symmetric(20.0, 1024)


def poisson_kernel(x, s=1.0):
    """Cauchy density of scale ``s``; its Fourier transform is ``exp(-s |u|)``."""
    return s / (np.pi * (s * s + x * x))


def poisson_generator(x, s=1.0):
    """``-|D|`` applied to :func:`poisson_kernel`, i.e. its derivative in ``s``."""
    return (x * x - s * s) / (np.pi * (s * s + x * x) ** 2)


_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(number, passed, text)``."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, {})

    def record(number: int, passed: bool, text: str) -> bool:
        line = f"{'PASS' if passed else 'FAIL'} criterion {number:2d}: {text}"
        lines[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
