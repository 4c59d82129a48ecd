import numpy as np
import pytest

from wosbench.atoms import Atom, Solution
from wosbench.geometry import Domain
from wosbench.manufactured import PdeInstance


@pytest.fixture
def unit_disk():
    return Domain("disk", (1.0,))


@pytest.fixture
def linear_laplace(unit_disk):
    """u = x on the unit disk: the simplest nontrivial harmonic instance."""
    return PdeInstance(
        "linear-x", "laplace", 0.0, 0.0, unit_disk, Solution((Atom("h_linear", (1.0, 0.0)),))
    )


@pytest.fixture
def quadratic_poisson(unit_disk):
    """u = (x^2 + y^2)/4 on the unit disk: lap(u) = 1 exactly."""
    sol = Solution((Atom("poly", (0.0, 0.0, 0.0, 0.25, 0.0, 0.25, 0.0, 0.0, 0.0, 0.0)),))
    return PdeInstance("quad", "poisson", 0.0, 0.0, unit_disk, sol)


def masked_equal(f1, f2):
    return np.array_equal(f1.values, f2.values) and np.array_equal(f1.mask, f2.mask)
