import numpy as np
import pytest

from sliceclifford import CliffordAlgebra, Multivector


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


def random_multivector(alg, rng, integer=False, scale=1.0):
    if integer:
        coeffs = rng.integers(-4, 5, size=alg.dim).astype(float)
    else:
        coeffs = rng.uniform(-1.0, 1.0, size=alg.dim) * scale
    return Multivector(alg, coeffs)


def random_paravector(alg, rng, scale=1.0):
    coeffs = np.zeros(alg.dim)
    coeffs[: alg.m + 1] = rng.uniform(-1.0, 1.0, size=alg.m + 1) * scale
    return Multivector(alg, coeffs)


def random_unit_vector(m, rng):
    v = rng.normal(size=m)
    return v / np.linalg.norm(v)
