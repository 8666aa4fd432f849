from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from spintau.errors import InconsistentExponentTable
from spintau.picard import (
    DivisorClass,
    basis,
    default_exponent_table,
    farkas_class,
    farkas_identity,
    farkas_mismatch,
    solve_farkas,
    solve_theta_null,
    theta_null_identity,
)

fractions = st.fractions(max_denominator=50).filter(lambda f: abs(f) < 1000)


def test_basis_order():
    assert basis(4) == ["lambda", "alpha0", "alpha1", "alpha2", "beta0", "beta1", "beta2"]


def test_genus_three_class():
    assert solve_farkas(3).to_dict() == {"lambda": "11", "alpha0": "-5/4", "alpha1": "-4", "beta0": "-2", "beta1": "-2"}


@pytest.mark.parametrize("g", range(2, 13))
def test_farkas_matches_closed_formula(g):
    cls = solve_farkas(g)
    assert cls == farkas_class(g)
    assert farkas_mismatch(cls) is None
    t = default_exponent_table(g)
    W = t["tau_weight"] + t["spinor_weight"]
    assert farkas_identity(cls) == W * DivisorClass.generator(g, "lambda")


def test_lambda_coefficient_is_g_plus_8():
    for g in range(2, 20):
        assert solve_farkas(g)["lambda"] == g + 8


def test_wrong_a0_is_detected():
    t = default_exponent_table(3)
    t["A0"] = 7
    d = farkas_mismatch(solve_farkas(3, t))
    assert d.to_dict() == {"lambda": "0", "alpha0": "-1/8", "alpha1": "0", "beta0": "0", "beta1": "0"}


def test_summation_from_two_differs():
    d = solve_farkas(4, j_start=2) - solve_farkas(4)
    assert d == 6 * DivisorClass.generator(4, "alpha1") + 2 * DivisorClass.generator(4, "beta1")
    # g = 2, 3 have no j = 1 boundary term to lose
    assert solve_farkas(3, j_start=2) != solve_farkas(3)


def test_table_errors():
    t = default_exponent_table(3)
    del t["B0"]
    with pytest.raises(InconsistentExponentTable):
        solve_farkas(3, t)
    t = default_exponent_table(3)
    t["Z"] = 0
    with pytest.raises(InconsistentExponentTable):
        solve_farkas(3, t)
    t = default_exponent_table(3)
    t["A0"] = 6.0
    with pytest.raises(InconsistentExponentTable):
        solve_farkas(3, t)
    with pytest.raises(InconsistentExponentTable):
        solve_farkas(1)


@pytest.mark.parametrize("g", range(1, 11))
def test_theta_null(g):
    th = solve_theta_null(g)
    lam, bd, n = theta_null_identity(g)
    assert n * th + bd == lam
    assert th["lambda"] == Fraction(1, 4)
    assert th["alpha0"] == Fraction(-1, 16)
    assert th["beta0"] == 0
    assert all(th["beta%d" % j] == Fraction(-1, 2) for j in range(1, g // 2 + 1))
    assert th.parity == "+"


def test_theta_null_g2_vector():
    assert solve_theta_null(2).coefficients == (Fraction(1, 4), Fraction(-1, 16), 0, 0, Fraction(-1, 2))


def test_parities_do_not_mix():
    with pytest.raises(InconsistentExponentTable):
        solve_theta_null(3) + solve_farkas(3)


def test_from_dict_rejects_unknown():
    with pytest.raises(InconsistentExponentTable):
        DivisorClass.from_dict(2, {"gamma1": 1})


def test_latex():
    assert solve_farkas(3).to_latex() == r"11\lambda - \frac{5}{4}\alpha_{0} - 4\alpha_{1} - 2\beta_{0} - 2\beta_{1}"
    assert DivisorClass.zero(2).to_latex() == "0"


@given(st.integers(2, 8), st.data())
def test_vector_space_axioms(g, data):
    k = 2 * (g // 2 + 1) + 1
    vec = st.lists(fractions, min_size=k, max_size=k)
    a = DivisorClass(g, tuple(data.draw(vec)))
    b = DivisorClass(g, tuple(data.draw(vec)))
    c = data.draw(fractions)
    assert a + b == b + a
    assert (a - b) + b == a
    assert c * (a + b) == c * a + c * b
    assert (a - a).is_zero()
    if c != 0:
        assert (c * a) / c == a
    assert DivisorClass.from_dict(g, a.to_dict()) == a
