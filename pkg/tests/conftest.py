import warnings

import numpy as np
import pytest

from qwave import BoundaryTrace, Gaussian1D, LinearProblem, SeparableField
from qwave.exceptions import SlowDecay


@pytest.fixture(autouse=True)
def _quiet_slow_decay():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SlowDecay)
        yield


def gaussian_problem(T=0.5, amp=1.0, center=(3.0, 3.0), width=1.0):
    """Free Gaussian restricted to the quadrant with its own boundary traces."""
    u0 = SeparableField(((1.0, Gaussian1D(amp, center[0], width),
                          Gaussian1D(1.0, center[1], width)),))
    return LinearProblem(
        u0=u0,
        g0=BoundaryTrace.free_gaussian(T, amp, center, width, "g0"),
        h0=BoundaryTrace.free_gaussian(T, amp, center, width, "h0"),
        T=T)


@pytest.fixture(scope="session")
def free_gaussian_problem():
    return gaussian_problem()


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)
