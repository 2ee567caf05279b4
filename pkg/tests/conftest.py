import numpy as np
import pytest

from secsense import OfdmGrid, default_grid, make_constellation


@pytest.fixture(scope="session")
def qpsk():
    return make_constellation("QPSK")


@pytest.fixture(scope="session")
def qam16():
    return make_constellation("16QAM")


@pytest.fixture(scope="session")
def grid256():
    return default_grid(m_sym=32)


@pytest.fixture(scope="session")
def grid64():
    return OfdmGrid(n=64, n_cp=16, bandwidth_hz=50e6, m_sym=4)


@pytest.fixture(autouse=True)
def _np_errstate():
    with np.errstate(divide="ignore"):
        yield
