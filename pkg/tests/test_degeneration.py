import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spintau.acceptance import CLUSTER_G2, FAR_G2, IRREDUCIBLE_BASE
from spintau.degeneration import (
    CharacteristicBlockMismatch,
    ClusterOverlap,
    CollisionHitsOtherBranchPoint,
    FitConfidencePoor,
    SamplePointEntersNodeRegion,
    check_spinor_degeneration,
    fit_exponent,
    fit_limit,
    irreducible_family,
    limit_surfaces,
    monodromy_check,
    period_degeneration,
    reducible_family,
)
from spintau.theta import Characteristic


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, 10), st.floats(0.2, 0.8))
def test_fit_exponent_recovers_power_law(k, c, ratio):
    ts = 1e-2 * ratio ** np.arange(10)
    fit = fit_exponent(ts, c * ts**k)
    assert abs(fit.slope - k) < 1e-8
    assert abs(fit.intercept - np.log(c)) < 1e-6


def test_fit_exponent_stops_before_noise_floor():
    ts = 1e-2 * 0.5 ** np.arange(14)
    rng = np.random.default_rng(0)
    v = ts**2 + 1e-12 * rng.standard_normal(len(ts))
    fit = fit_exponent(ts, v)
    assert abs(fit.slope - 2) < 0.05
    assert fit.t_range[0] > 1e-6


def test_fit_exponent_needs_points():
    with pytest.raises(FitConfidencePoor):
        fit_exponent([1e-2, 5e-3, 2.5e-3], [1e-20, 1e-20, 1e-20], noise=1e-15)


def test_fit_limit_of_converging_rates():
    ts = 1e-2 * 0.5 ** np.arange(8)
    fit = fit_limit(ts, 6.0 + 3.0 * ts)
    assert abs(fit.slope - 6.0) < 1e-3


def test_irreducible_family_points():
    F = irreducible_family(IRREDUCIBLE_BASE, t0=1e-2, n=5)
    pts = F.points(1e-2)
    assert F.genus == 2 and F.kind == "irreducible"
    assert np.allclose(sorted(abs(p) for p in pts[2:4]), [0.1, 0.1])
    assert len(F.grid()) == 5 and F.grid()[1] == pytest.approx(5e-3)


def test_family_errors():
    with pytest.raises(CollisionHitsOtherBranchPoint):
        irreducible_family(IRREDUCIBLE_BASE, t0=4.0)
    with pytest.raises(ClusterOverlap):
        reducible_family([0, 1], FAR_G2)
    with pytest.raises(ClusterOverlap):
        reducible_family(CLUSTER_G2, [0.5, 4.0, 5.0], t0=0.9)


def test_period_log_slope_and_monodromy():
    F = irreducible_family(IRREDUCIBLE_BASE, n=6)
    r = period_degeneration(F)
    assert abs(r["log_slope"].slope - 1) < 0.02
    m = monodromy_check(F, Characteristic.from_string("0011"), 1e-3)
    assert m["defect"] < 1e-6


def test_reducible_limits_and_rank_one():
    R = reducible_family(CLUSTER_G2, FAR_G2, n=6)
    r = period_degeneration(R)
    assert abs(r["offdiag"].slope - 1) < 0.1
    S1, S2 = limit_surfaces(R)
    om = r["Omega"][-1]
    assert np.max(np.abs(om[:1, :1] - S1.Omega)) < 1e-3
    assert np.max(np.abs(om[1:, 1:] - S2.Omega)) < 1e-3


def test_spinor_guards():
    F = irreducible_family(IRREDUCIBLE_BASE, n=4)
    with pytest.raises(SamplePointEntersNodeRegion):
        check_spinor_degeneration(F, Characteristic.from_string("0011"), samples=[0.01])
    with pytest.raises(CharacteristicBlockMismatch):
        check_spinor_degeneration(F, Characteristic.from_string("001100"))


def test_tau_rate_normalisation_shift():
    # t^{-nu} omega shifts d log tau / d log t by -nu times the Euler sum
    from spintau.degeneration import tau_rate

    F = irreducible_family(IRREDUCIBLE_BASE, n=3)
    eta = Characteristic.from_string("0011")
    r0 = tau_rate(F, eta, 1e-2)
    r1 = tau_rate(F, eta, 1e-2, normalize=0.125)
    assert abs(r0["euler"] - 16) < 1e-6
    assert abs((r0["rate"] - r1["rate"]) - 0.125 * r0["euler"]) < 1e-6
