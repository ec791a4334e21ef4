import numpy as np
import pytest

from qspet.config import default_config
from qspet.fields import FrequencyGrid, normalize
from qspet.sources import jsa_spontaneous_ring, jsa_stimulated_ring, jsa_waveguide


@pytest.fixture(scope="session")
def cfg():
    return default_config()


@pytest.fixture(scope="session")
def device(cfg):
    return cfg.ring_params(), cfg.pump(), cfg.waveguide()


@pytest.fixture(scope="session")
def grid(cfg):
    return cfg.frequency_grid()


@pytest.fixture(scope="session")
def small_grid(cfg):
    return FrequencyGrid.square(cfg.nu_s, cfg.nu_i, 25e9, 48)


@pytest.fixture(scope="session")
def jsas(device, grid):
    r, p, w = device
    return {
        "ring": jsa_spontaneous_ring(r, p, grid),
        "stim": jsa_stimulated_ring(r, p, grid),
        "wg": jsa_waveguide(w, p, grid),
    }


@pytest.fixture(scope="session")
def small_jsas(device, small_grid):
    r, p, w = device
    return jsa_spontaneous_ring(r, p, small_grid), jsa_waveguide(w, p, small_grid)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_field(grid, seed=0):
    from qspet.fields import ComplexField2D

    g = np.random.default_rng(seed)
    return normalize(ComplexField2D(grid, g.normal(size=grid.shape) + 1j * g.normal(size=grid.shape)))


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])
