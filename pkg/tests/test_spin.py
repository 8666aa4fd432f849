import numpy as np
import pytest

from spintau.errors import EvenCharacteristic
from spintau.spin import Differential, enumerate_characteristics, homological_coordinates, spinor, spinor_zeros
from spintau.surface import Surface
from spintau.theta import Characteristic


@pytest.fixture(scope="module")
def surface_g2(curve_g2):
    return Surface(curve_g2)


def test_characteristic_counts():
    assert len(enumerate_characteristics(2, 1)) == 6
    assert len(enumerate_characteristics(2, 0)) == 10
    assert len(enumerate_characteristics(3, 1)) == 28


def test_g2_odd_spinors_biject_onto_weierstrass_points(surface_g2):
    hit = []
    for eta in enumerate_characteristics(2, 1):
        zs = spinor_zeros(spinor(surface_g2, eta))
        assert len(zs) == 1
        q, m = zs[0]
        assert m == 2 and q.kind in ("branch", "infinity")
        hit.append(q.x if q.kind == "branch" else "inf")
    assert len(set(hit)) == 6


def test_spinor_square_is_gradient_combination(surface_g2):
    # P(x) dx / y = sum_i d_i theta[eta](0) v_i, checked at one point
    eta = Characteristic.from_string("1101")
    sq = spinor(surface_g2, eta)
    x = np.array([0.31 + 0.17j])
    y = surface_g2.curve.y_ref(x)
    lhs = sq.value(x, y)
    V = surface_g2.basis.values(x, y)
    assert np.allclose(lhs, V @ sq.c)


def test_even_characteristic_rejected(surface_g2):
    with pytest.raises(EvenCharacteristic):
        spinor(surface_g2, Characteristic.from_string("0000"))


def test_g3_spinor_multiplicities(rng):
    from spintau.acceptance import random_curve

    S = Surface(random_curve(3, rng))
    for eta in enumerate_characteristics(3, 1)[:6]:
        sq = spinor(S, eta)
        assert sum(sq.multiplicities) == 4
        assert all(m % 2 == 0 for m in sq.multiplicities)


def test_homological_coordinates_shape_and_scaling(surface_g2):
    sq = spinor(surface_g2, Characteristic.from_string("1100"))
    co = homological_coordinates(sq)
    assert len(co.z) == 2 * surface_g2.g + len(sq.zeros) - 1
    co2 = homological_coordinates(sq.scaled(3.0))
    assert np.allclose(co2.z, 3.0 * co.z)
    # a-periods of P dx / y in terms of the normalised basis are the gradient
    A = co.z[: surface_g2.g]
    assert np.allclose(A, sq.c, rtol=1e-9, atol=1e-12)


def test_simple_zero_differential_has_two_zeros(surface_g2):
    x0 = 7.0 + 0.5j
    om = Differential(Surface(surface_g2.curve, avoid=[x0]), [-x0, 1.0])
    assert om.multiplicities == [1, 1]
    assert abs(om.zeros[0][0].y + om.zeros[1][0].y) < 1e-12
