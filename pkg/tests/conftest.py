"""Shared fixtures: the built-in models are cheap, the generic ones are not."""

import numpy as np
import pytest

from restrict_est import (
    NormalSpec,
    Orientation,
    cr_gamma_model,
    generic_model,
    normal_model,
    squared_error_location,
    squared_error_scale,
)


@pytest.fixture(scope="session")
def loc_loss():
    return squared_error_location()


@pytest.fixture(scope="session")
def scale_loss():
    return squared_error_scale()


@pytest.fixture(scope="session")
def std_normal():
    """Independent standard pair: mu1 = -1, beta0 = 1/2, tau = sqrt(2)."""
    return normal_model(NormalSpec(1.0, 1.0, 0.0))


@pytest.fixture(scope="session")
def skew_normal():
    """mu1 = 3.5 > 0, beta0 = 20.5/17: the direction-flipped regime."""
    return normal_model(NormalSpec(1.0, 5.0, 0.9))


@pytest.fixture(scope="session")
def neg_normal():
    """mu1 = -2.25, beta0 = 1/7."""
    return normal_model(NormalSpec(2.0, 0.5, -0.5))


@pytest.fixture(scope="session")
def degenerate_normal():
    """rho = sigma1/sigma2 makes mu1 = 0: no improvement is available."""
    return normal_model(NormalSpec(0.5, 1.0, 0.5))


@pytest.fixture(scope="session")
def crg():
    return cr_gamma_model()


@pytest.fixture(scope="session")
def generic_product_normal():
    """The rho = 0, sigma = (1, 2) normal fed in as a black-box density."""

    def joint(x, y):
        return np.exp(-0.5 * (x * x + y * y / 4.0)) / (2.0 * np.pi * 2.0)

    inf = float("inf")
    return generic_model(joint, Orientation.LOCATION, ((-inf, inf), (-inf, inf)))
