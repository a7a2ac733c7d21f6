"""Checks for the loop-based reference implementations.

These are deliberately independent of the vectorized estimators; the
cross-implementation agreement tests live in the estimator and bounds
modules and in the acceptance suite.
"""

import math

import numpy as np
import pytest

from dpdcor import DataError
from dpdcor.oracle import (
    oracle_dcov,
    oracle_hsic,
    oracle_residual_term,
    warm_up,
)

# hand-frozen: oracle_dcov on x = y = (0, 1, 2, 3, 4)
RAMP_DCOV = 1.0666666666666682


@pytest.fixture(scope="module", autouse=True)
def _compiled():
    warm_up()


def test_dcov_ramp_frozen_value():
    v = np.arange(5.0).reshape(-1, 1)
    assert oracle_dcov(v, v) == pytest.approx(RAMP_DCOV, abs=1e-12)


def test_dcov_constant_input_is_zero():
    c = np.ones((6, 1))
    y = np.random.default_rng(0).standard_normal((6, 2))
    assert oracle_dcov(c, y) == 0.0


def test_dcov_rejects_small_and_mismatched_inputs():
    rng = np.random.default_rng(1)
    with pytest.raises(DataError):
        oracle_dcov(rng.standard_normal((3, 1)), rng.standard_normal((3, 1)))
    with pytest.raises(DataError):
        oracle_dcov(rng.standard_normal((5, 1)), rng.standard_normal((6, 1)))


def test_hsic_two_point_identity_kernels():
    eye = np.eye(2)
    assert oracle_hsic(eye, eye) == 1.0


def test_hsic_constant_kernel_is_zero():
    k = np.full((5, 5), 3.0)
    l = np.random.default_rng(2).standard_normal((5, 5))
    l = (l + l.T) / 2.0
    assert oracle_hsic(k, l) == pytest.approx(0.0, abs=1e-12)


def test_residual_zero_noise_is_zero():
    y = np.random.default_rng(3).standard_normal((8, 2))
    v = np.array([1.0, 0.0])
    assert oracle_residual_term(np.zeros(8), y, v, 8, 3) == 0.0


def test_residual_scales_linearly_in_noise():
    rng = np.random.default_rng(4)
    y = rng.standard_normal((10, 2))
    v = rng.standard_normal(2)
    v /= np.linalg.norm(v)
    noise = rng.standard_normal(10)
    base = oracle_residual_term(noise, y, v, 10, 2)
    assert base > 0.0
    # doubling every |N_i - N_l| doubles the sum exactly in binary arithmetic
    assert oracle_residual_term(2.0 * noise, y, v, 10, 2) == 2.0 * base


def test_residual_decreases_with_projection_count():
    rng = np.random.default_rng(5)
    y = rng.standard_normal((9, 1))
    noise = rng.standard_normal(9)
    v = np.array([1.0])
    r1 = oracle_residual_term(noise, y, v, 9, 1)
    r3 = oracle_residual_term(noise, y, v, 9, 3)
    assert math.isclose(r1, 3.0 * r3, rel_tol=1e-12)
