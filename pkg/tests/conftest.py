import numpy as np
import pytest

import starcoupling as sc


@pytest.fixture
def vstar():
    """Reference potential: +1 and -1 on the first two edges, zero on the third."""
    return sc.StarPotential.from_constants([1.0, -1.0, 0.0])


@pytest.fixture
def lam_neg():
    return sc.ScalingFunction(lambda1=-1.0, resonant=True)


@pytest.fixture
def lam_pos():
    return sc.ScalingFunction(lambda1=1.0, resonant=True)


@pytest.fixture
def cc_neg(vstar, lam_neg):
    return sc.coupling_constants(vstar, lam_neg)


@pytest.fixture
def cc_pos(vstar, lam_pos):
    return sc.coupling_constants(vstar, lam_pos)


@pytest.fixture
def zero_potential():
    return sc.StarPotential([sc.PiecewisePolynomial.zero() for _ in range(3)])


@pytest.fixture
def free_scaling():
    return sc.ScalingFunction(lambda1=1.0, resonant=False, lambda0=1.0)


def distinct_theta(rng, n, low=-2.0, high=2.0, gap=1e-3):
    """Random moment vector with all pairwise gaps above ``gap``."""
    while True:
        theta = rng.uniform(low, high, n)
        offdiag = np.abs(np.subtract.outer(theta, theta))[~np.eye(n, dtype=bool)]
        if offdiag.min() > gap:
            return theta
