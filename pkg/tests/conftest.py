"""Shared fixtures and independent brute-force oracles.

The oracles here sum the defining series directly with a fixed window and no
argument reduction, so they share no code path with the library evaluator.
"""

import cmath
import math

import numpy as np
import pytest

from ellrs import ModelParams, TorusParams, WeightVector

PI = math.pi


def theta_brute(a: float, b: float, z: complex, tau: complex, m_max: int = 60) -> complex:
    """Direct summation over m in [-m_max, m_max], no reduction."""
    total = 0j
    for m in range(-m_max, m_max + 1):
        total += cmath.exp(1j * PI * (m + a) ** 2 * tau + 2j * PI * (m + a) * (z + b))
    return total


def theta_brute_deriv(a: float, b: float, z: complex, tau: complex, m_max: int = 60) -> complex:
    """Termwise differentiated direct summation."""
    total = 0j
    for m in range(-m_max, m_max + 1):
        total += (2j * PI * (m + a)) * cmath.exp(
            1j * PI * (m + a) ** 2 * tau + 2j * PI * (m + a) * (z + b)
        )
    return total


def rand_complex(rng, scale=0.5):
    return complex(rng.uniform(-scale, scale), rng.uniform(-scale, scale))


@pytest.fixture(scope="session")
def torus_i():
    return TorusParams(1j)


@pytest.fixture(scope="session")
def params3(torus_i):
    return ModelParams(3, 0.23, torus_i)


@pytest.fixture(scope="session")
def params2(torus_i):
    return ModelParams(2, 0.23, torus_i)


@pytest.fixture(scope="session")
def fixture_lam(params3):
    return WeightVector(np.array([0.11 + 0.03j, 0.43 - 0.06j, -0.37 + 0.09j]), params3)


@pytest.fixture(scope="session")
def fixture_mu(params3, fixture_lam):
    return WeightVector(fixture_lam.lam - 0.05 - 0.02j + 0.01 * np.arange(3), params3)
