import numpy as np
import pytest

from poissonsir import (
    ChannelAware,
    Constant,
    ConstantPower,
    GammaUnitMean,
    NetworkModel,
    UniformInterval,
)


def rng(seed: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


@pytest.fixture
def rayleigh_fixed() -> NetworkModel:
    """Rayleigh fading, fixed 15 m links, constant power, alpha 4."""
    return NetworkModel(
        intensity=1e-3,
        alpha=4.0,
        fading_h=GammaUnitMean(1.0),
        distance=Constant(15.0),
    )


@pytest.fixture
def no_fading_fixed() -> NetworkModel:
    return NetworkModel(
        intensity=1e-3,
        alpha=4.0,
        fading_h=Constant(1.0),
        distance=Constant(15.0),
    )


def power_control_model(law=None, shape: float = 1.0, intensity: float = 1e-4) -> NetworkModel:
    """Nakagami fading with uniform 15-25 m links, alpha 4."""
    return NetworkModel(
        intensity=intensity,
        alpha=4.0,
        fading_h=GammaUnitMean(shape),
        distance=UniformInterval(15.0, 25.0),
        power=law if law is not None else ConstantPower(1.0),
    )


def aware_law(rho: float = 1.0, upsilon: float = 4.0) -> ChannelAware:
    return ChannelAware(rho=rho, upsilon=upsilon)
