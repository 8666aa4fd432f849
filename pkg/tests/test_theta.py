import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spintau.acceptance import random_period_matrix
from spintau.errors import DegenerateImaginaryPart, DimensionMismatch, NonPositiveTolerance, NotSymplectic
from spintau.theta import (
    Characteristic,
    PeriodMatrix,
    SymplecticMap,
    all_characteristics,
    parity,
    random_symplectic,
    symplectic_transform,
    theta,
    theta_batch,
    theta_gradient,
    theta_hessian,
    transform_characteristic,
    truncation_radius,
)


def jacobi_theta3(q, terms=200):
    # product formula, independent of the lattice sum
    p = 1.0 + 0j
    for n in range(1, terms):
        p *= (1 - q ** (2 * n)) * (1 + q ** (2 * n - 1)) ** 2
    return p


@pytest.mark.parametrize("tau", [1j, 0.3 + 0.8j, -0.4 + 1.5j])
def test_g1_against_product_formula(tau):
    v = theta(Characteristic.from_string("00"), np.array([[tau]]), np.zeros(1)).value
    q = np.exp(1j * np.pi * tau)
    assert abs(v - jacobi_theta3(q)) < 1e-12


def test_g1_square_lattice_value():
    v = theta(Characteristic.from_string("00"), np.array([[1j]]), np.zeros(1)).value
    ref = math.fsum(math.exp(-math.pi * n * n) for n in range(-30, 31))
    assert abs(v - ref) < 1e-13
    # theta(i) = pi^{1/4} / Gamma(3/4)
    assert abs(ref - math.pi**0.25 / math.gamma(0.75)) < 1e-14


@pytest.mark.parametrize("g", [1, 2, 3])
def test_parity_counts(g):
    odd = sum(parity(e) for e in all_characteristics(g))
    assert odd == 2 ** (g - 1) * (2**g - 1)


@pytest.mark.parametrize("g", [1, 2, 3])
def test_odd_thetas_vanish(g, rng):
    P = random_period_matrix(g, rng)
    for e in all_characteristics(g):
        if parity(e):
            assert abs(theta(e, P, np.zeros(g)).value) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_quasiperiodicity(g, seed):
    rng = np.random.default_rng(seed)
    P = random_period_matrix(g, rng)
    e = Characteristic(tuple(rng.integers(0, 2, 2 * g)))
    z = 0.3 * (rng.standard_normal(g) + 1j * rng.standard_normal(g))
    m = rng.integers(-2, 3, g)
    n = rng.integers(-1, 2, g)
    a, b = 0.5 * e.top, 0.5 * e.bottom
    lhs = theta(e, P, z + m + P.Omega @ n).value
    fac = np.exp(2j * np.pi * a @ m - 1j * np.pi * n @ P.Omega @ n - 2j * np.pi * n @ (z + b))
    rhs = fac * theta(e, P, z).value
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_theta8_transformation(g, seed):
    rng = np.random.default_rng(seed)
    P = random_period_matrix(g, rng)
    sigma = random_symplectic(g, rng)
    for e in all_characteristics(g):
        if parity(e):
            continue
        P2, e2, F = symplectic_transform(sigma, P, e)
        lhs = theta(e2, P2, np.zeros(g)).value ** 8
        rhs = F**4 * theta(e, P, np.zeros(g)).value ** 8
        assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(rhs))


def test_transform_preserves_parity(rng):
    for g in (1, 2, 3):
        sigma = random_symplectic(g, rng)
        for e in all_characteristics(g):
            assert parity(transform_characteristic(sigma, e)) == parity(e)


def test_derivatives_match_finite_differences(period_matrix_g2, rng):
    e = Characteristic.from_string("1101")
    z = 0.2 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
    gr = theta_gradient(e, period_matrix_g2, z).value
    he = theta_hessian(e, period_matrix_g2, z).value
    h = 1e-5
    for i in range(2):
        d = np.zeros(2)
        d[i] = h
        fd = (theta(e, period_matrix_g2, z + d).value - theta(e, period_matrix_g2, z - d).value) / (2 * h)
        assert abs(fd - gr[i]) < 1e-7 * max(1, abs(gr[i]))
        fdg = (theta_gradient(e, period_matrix_g2, z + d).value - theta_gradient(e, period_matrix_g2, z - d).value) / (2 * h)
        assert np.allclose(fdg, he[:, i], atol=1e-6, rtol=1e-6)


def test_batch_matches_single(period_matrix_g2, rng):
    e = Characteristic.from_string("0110")
    W = 0.3 * (rng.standard_normal((5, 2)) + 1j * rng.standard_normal((5, 2)))
    (vals,), err = theta_batch(e, period_matrix_g2, W)
    assert err < 1e-10
    for w, v in zip(W, vals):
        assert abs(v - theta(e, period_matrix_g2, w).value) < 1e-12


def test_radius_shrinks_with_imaginary_part():
    om = np.array([[1j]])
    r1 = truncation_radius(om, 1e-12)
    r4 = truncation_radius(4 * om, 1e-12)
    # the radius is in the Im(Omega) norm; compare in lattice units
    ratio = (r4 / 2.0) / r1
    assert 0.45 < ratio < 0.7


def test_errors():
    with pytest.raises(DegenerateImaginaryPart):
        PeriodMatrix(np.array([[0.5 - 1j]]))
    with pytest.raises(DimensionMismatch):
        PeriodMatrix(np.array([[1j, 0.1], [0.2, 1j]]))
    with pytest.raises(DimensionMismatch):
        theta(Characteristic.from_string("0000"), np.array([[1j]]), np.zeros(1))
    with pytest.raises(NonPositiveTolerance):
        theta(Characteristic.from_string("00"), np.array([[1j]]), np.zeros(1), tol=0.0)
    with pytest.raises(NotSymplectic):
        SymplecticMap.from_matrix(np.array([[2, 0], [0, 1]]))
