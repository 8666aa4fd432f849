import numpy as np
import pytest

from spintau.acceptance import lemma_defect, simple_zero_differential
from spintau.bergman import (
    BergmanKernel,
    rbr_rhs,
    schwarzian_exact,
    schwarzian_of_differential,
    tau_scaling_exponent,
)
from spintau.spin import spinor
from spintau.surface import Surface, SurfacePoint
from spintau.theta import Characteristic


@pytest.fixture(scope="module")
def surface_g2(curve_g2):
    return Surface(curve_g2)


@pytest.fixture(scope="module")
def kernel_g2(surface_g2):
    return BergmanKernel(surface_g2)


def test_rbr_rhs_values():
    assert abs(rbr_rhs([2]) - (-8j * np.pi / 3)) < 1e-13
    assert abs(rbr_rhs([1, 1]) - (-3j * np.pi)) < 1e-13
    assert abs(rbr_rhs([2, 2]) - (-16j * np.pi / 3)) < 1e-13


def test_schwarzian_formula_matches_fft(surface_g2):
    sq = spinor(surface_g2, Characteristic.from_string("1100"))
    c = surface_g2.curve
    x0 = 0.23 - 0.41j

    def w(x):
        return sq.value(x, c.y_ref(x))

    num = schwarzian_of_differential(w, x0, radius=1e-2, n=64)
    assert abs(num - schwarzian_exact(sq, np.array([x0]))[0]) < 1e-8 * max(1, abs(num))


def test_bidifferential_symmetric_with_double_pole(kernel_g2, surface_g2):
    c = surface_g2.curve
    p = SurfacePoint(0.2 + 0.1j, c.y_ref(0.2 + 0.1j), "regular")
    q = SurfacePoint(-0.3 + 0.2j, c.y_ref(-0.3 + 0.2j), "regular")
    assert abs(kernel_g2.bidifferential(p, q) - kernel_g2.bidifferential(q, p)) < 1e-9
    h = 1e-3
    xq = p.x + h
    q2 = SurfacePoint(xq, c.y_ref(xq), "regular")
    assert abs(h * h * kernel_g2.bidifferential(p, q2) - 1) < 1e-4


def test_lemma_for_odd_spinor(surface_g2):
    lhs, rhs, d = lemma_defect(surface_g2, spinor(surface_g2, Characteristic.from_string("1100")))
    assert abs(rhs - (-8j * np.pi / 3)) < 1e-14
    assert d < 1e-4


def test_lemma_for_simple_zeros(curve_g2):
    S, om = simple_zero_differential(curve_g2)
    lhs, rhs, d = lemma_defect(S, om)
    assert abs(rhs - (-3j * np.pi)) < 1e-14
    assert d < 1e-4


def test_scaling_exponent_g2(kernel_g2, surface_g2):
    val, err = tau_scaling_exponent(kernel_g2, spinor(surface_g2, Characteristic.from_string("1100")))
    assert abs(val - 16) < 1e-3
