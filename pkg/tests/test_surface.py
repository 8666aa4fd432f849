import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spintau.acceptance import random_curve
from spintau.surface import (
    HyperellipticCurve,
    NearSingularConfiguration,
    SurfacePoint,
    Surface,
    abel_branch,
    abel_map,
    load_curve,
    standard_marking,
)
from spintau.errors import DegenerateCurve
from spintau.theta import random_symplectic, symplectic_transform


def lattice_residual(v, Omega):
    """Distance of v from Z^g + Omega Z^g."""
    Y = Omega.imag
    n = np.linalg.solve(Y, v.imag)
    w = v - Omega @ np.round(n)
    return float(np.max(np.abs(v.imag - Y @ np.round(n))) + np.max(np.abs(w.real - np.round(w.real))))


def test_lemniscatic():
    S = Surface(HyperellipticCurve([-1.0, 0.0, 1.0]))
    assert abs(S.Omega[0, 0] - 1j) < 1e-10


def test_hexagonal_torus():
    # y^2 = x^3 - 1 has j = 0: Omega is conjugate to exp(2 pi i / 3)
    w = np.exp(2j * np.pi / 3)
    tau = Surface(HyperellipticCurve([1.0, w, w * w])).Omega[0, 0]
    # reduce to the standard fundamental domain
    for _ in range(50):
        tau = tau - np.round(tau.real)
        if abs(tau) < 1 - 1e-12:
            tau = -1 / tau
        else:
            break
    assert abs(tau - np.exp(2j * np.pi / 3)) < 1e-10 or abs(tau - np.exp(1j * np.pi / 3)) < 1e-10


@settings(max_examples=8, deadline=None)
@given(st.integers(2, 3), st.integers(0, 2**31 - 1))
def test_riemann_relations(g, seed):
    S = Surface(random_curve(g, np.random.default_rng(seed)))
    O = S.Omega
    assert np.max(np.abs(O - O.T)) < 1e-8
    assert np.min(np.linalg.eigvalsh(O.imag)) > 0


def test_marking_change_matches_transform(curve_g2, rng):
    S = Surface(curve_g2)
    sigma = random_symplectic(2, rng)
    S2 = S.with_marking(S.marking.transformed(sigma))
    P2, _, _ = symplectic_transform(sigma, S.period_matrix)
    assert np.max(np.abs(S2.Omega - P2.Omega)) < 1e-9


def test_weierstrass_points_are_half_periods(curve_g2):
    S = Surface(curve_g2)
    for i in range(1, S.curve.n):
        v = abel_branch(S, i, 0)
        assert lattice_residual(2 * v, S.Omega) < 1e-9


def test_abel_map_additive(curve_g2):
    S = Surface(curve_g2)
    c = S.curve
    xs = [0.13 + 0.21j, -0.37 + 0.05j, 0.4 - 0.3j]
    p, q, r = (SurfacePoint(x, c.y_ref(x), "regular") for x in xs)
    d = abel_map(S, p, q).value + abel_map(S, q, r).value - abel_map(S, p, r).value
    assert lattice_residual(d, S.Omega) < 1e-9


def test_standard_marking_is_symplectic(curve_g2):
    S = Surface(curve_g2)
    g = S.g
    J = np.block([[np.zeros((g, g)), np.eye(g)], [-np.eye(g), np.zeros((g, g))]])
    assert np.array_equal(S.marking.intersection_matrix, J)
    assert standard_marking(S.curve).a.shape == (g, S.curve.n - 1)


def test_genus_and_infinity():
    c = HyperellipticCurve([0, 1, 2, 3, 4])
    assert c.g == 2 and c.infinity_is_branch
    c = HyperellipticCurve([0, 1, 2, 3, 4, 5])
    assert c.g == 2 and not c.infinity_is_branch


def test_curve_errors():
    with pytest.raises(DegenerateCurve):
        HyperellipticCurve([0.0, 1.0])
    with pytest.raises(NearSingularConfiguration):
        HyperellipticCurve([0.0, 1e-10, 1.0])


def test_load_curve_roundtrip(tmp_path, curve_g2):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"branch_points": [[e.real, e.imag] for e in curve_g2.e]}))
    c, m = load_curve(str(p))
    assert np.allclose(c.e, curve_g2.e)
