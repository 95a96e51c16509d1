import numpy as np
import pytest

from stratexp import BasisSystem, Constant, Interval, Polynomial
from stratexp import _kernels

UNIT = Interval(0.0, 1.0)
ONE = Constant(1.0)
IDENT = Polynomial((0.0, 1.0))

KERNEL_SETS = [pytest.param(_kernels.numpy_kernels, id="numpy")]
if _kernels.numba_kernels is not None:
    KERNEL_SETS.append(pytest.param(_kernels.numba_kernels, id="numba"))


@pytest.fixture(params=KERNEL_SETS)
def kernels(request):
    return request.param


@pytest.fixture
def legendre_unit():
    return BasisSystem("legendre", UNIT)


@pytest.fixture
def trig_unit():
    return BasisSystem("trigonometric", UNIT)


@pytest.fixture(params=["legendre", "trigonometric"])
def any_basis_kind(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)
