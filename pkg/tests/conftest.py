import numpy as np
import pytest

from igp_delay.model import ModelParams
from igp_delay.presets import PRESETS


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: long simulations and random-draw property suites')


@pytest.fixture
def example1() -> ModelParams:
    return PRESETS['example1'].params


@pytest.fixture
def example2() -> ModelParams:
    return PRESETS['example2'].params


@pytest.fixture
def example3() -> ModelParams:
    return PRESETS['example3'].params


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)


def draw_params(rng: np.random.Generator, low: float = 0.05, high: float = 2.0) -> ModelParams:
    """Positive rate constants drawn uniformly from [low, high]."""
    names = ('a0', 'a1', 'a2', 'a3', 'b0', 'b1', 'b3', 'c0', 'c1', 'c2')
    return ModelParams(**{name: float(v) for name, v in zip(names, rng.uniform(low, high, size=10))})


@pytest.fixture
def param_draw(rng):
    """Callable producing random positive parameter sets from the shared generator."""
    return lambda low=0.05, high=2.0: draw_params(rng, low, high)


def draw_interior(rng: np.random.Generator) -> ModelParams:
    """Random parameters built around a random positive equilibrium, so E4 exists."""
    while True:
        x, y, z = rng.uniform(0.1, 2.0, size=3)
        a1, a2, a3, b1, b3, c1, c2 = rng.uniform(0.05, 2.0, size=7)
        b0 = b1 * x - b3 * z
        if b0 > 0.01:
            break
    return ModelParams(
        a0=float(a1 * x + a2 * y + a3 * z), a1=float(a1), a2=float(a2), a3=float(a3),
        b0=float(b0), b1=float(b1), b3=float(b3),
        c0=float(c1 * x + c2 * y), c1=float(c1), c2=float(c2),
    )


@pytest.fixture
def interior_draw(rng):
    """Callable producing parameter sets with an existing positive equilibrium."""
    return lambda: draw_interior(rng)
