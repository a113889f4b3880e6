import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_conjugate(a, seed, cond_cap=50.0):
    """Conjugate ``a`` by a random well-conditioned matrix."""
    g = np.random.default_rng(seed)
    n = np.asarray(a).shape[0]
    while True:
        p = g.normal(size=(n, n))
        if np.linalg.cond(p) < cond_cap:
            return np.linalg.inv(p) @ np.asarray(a, dtype=float) @ p, p


# canonical fixtures used across test modules
SHEAR = np.array([[1.0, 1.0], [0.0, 1.0]])
ROT90 = np.array([[0.0, 1.0], [-1.0, 0.0]])
SPIRAL = np.array([[0.0, 2.0], [-2.0, 0.0]])
DIAG23 = np.diag([2.0, 3.0])
DIAG2_HALF = np.diag([2.0, 0.5])
DIAG21 = np.diag([2.0, 1.0])


def imaginary_nilpotent_4d():
    """Modulus-one complex pair with a nontrivial nilpotent part."""
    e = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.block([[e, np.eye(2)], [np.zeros((2, 2)), e]])
