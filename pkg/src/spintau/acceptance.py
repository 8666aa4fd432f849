"""
Acceptance checks shared by ``verify-all`` and the test suite.

Each check returns a :class:`CheckResult`; ``level='quick'`` keeps to
genus <= 2 and short grids, ``level='full'`` runs everything.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .bergman import BergmanKernel, cycle_integrals, rbr_identity, tau_scaling_exponent
from .degeneration import (
    check_spinor_degeneration,
    check_theta_degeneration as theta_degeneration,
    fit_tau_boundary_exponent,
    irreducible_family,
    monodromy_check,
    period_degeneration,
    reducible_family,
    zg_family,
)
from .picard import farkas_class, solve_farkas, solve_theta_null, theta_null_identity
from .spin import Differential, enumerate_characteristics, homological_coordinates, spinor
from .errors import SpinTauError
from .surface import HyperellipticCurve, Surface
from .theta import (
    Characteristic,
    PeriodMatrix,
    all_characteristics,
    parity,
    random_symplectic,
    symplectic_transform,
    theta,
    theta_batch,
)

__all__ = ["CheckResult", "CHECKS", "run_checks", "random_period_matrix", "random_curve"]

# curves and families used by the checks
IRREDUCIBLE_BASE = [-2.0, -1.0, 1.0, 2.0]
CLUSTER_G2 = [0.0, 0.5 + 1.0j, 1.0]
FAR_G2 = [3.0, 4.0 + 0.5j, 5.0]
CLUSTER_G4 = [0.0, 0.5 + 1.0j, 1.0, 1.6 + 0.6j, 2.2]
FAR_G4 = [3.0, 4.0 + 0.5j, 5.0, 6.0 + 0.3j, 7.5 - 0.2j]
ZG_CURVE = [-3.0, -2.0 + 0.3j, -1.0, 0.5j, 1.0, 2.0 - 0.2j, 3.0, 4.5 + 0.5j]


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def line(self):
        return "[%s] criterion %d: %s  %s" % ("PASS" if self.passed else "FAIL", self.number, self.name,
                                              json.dumps(self.detail, default=_jsonable, sort_keys=True))


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return str(v)


def random_period_matrix(g, rng):
    X = rng.uniform(-0.5, 0.5, (g, g))
    L = rng.standard_normal((g, g)) * 0.4
    Y = L @ L.T + 0.7 * np.eye(g)
    return PeriodMatrix(0.5 * (X + X.T) + 1j * Y)


def random_curve(g, rng, scale=2.0):
    for _ in range(100):
        e = scale * (rng.standard_normal(2 * g + 2) + 1j * rng.standard_normal(2 * g + 2))
        d = np.abs(e[:, None] - e[None, :]) + np.eye(len(e)) * 1e9
        if d.min() > 0.2:
            return HyperellipticCurve(e)
    raise RuntimeError("could not draw a well separated curve")


# -- 1: theta ---------------------------------------------------------------------


def theta_g1_oracle():
    """sum_n exp(-pi n^2) by direct summation with math.fsum."""
    return math.fsum(math.exp(-math.pi * n * n) for n in range(-40, 41))


def check_theta(level="full", seed=0):
    rng = np.random.default_rng(seed)
    worst = {"odd": 0.0, "quasi": 0.0, "theta8": 0.0}
    for g in (1, 2, 3):
        P = random_period_matrix(g, rng)
        evens = [e for e in all_characteristics(g) if parity(e) == 0]
        ref = max(abs(theta(e, P, np.zeros(g)).value) for e in evens)
        for e in all_characteristics(g):
            if parity(e):
                worst["odd"] = max(worst["odd"], abs(theta(e, P, np.zeros(g)).value) / ref)
        for e in all_characteristics(g)[:: max(1, 4 ** g // 8)]:
            z = 0.3 * (rng.standard_normal(g) + 1j * rng.standard_normal(g))
            m = rng.integers(-2, 3, g)
            n = rng.integers(-1, 2, g)
            a, b = 0.5 * e.top, 0.5 * e.bottom
            lhs = theta(e, P, z + m + P.Omega @ n).value
            fac = np.exp(2j * np.pi * a @ m - 1j * np.pi * n @ P.Omega @ n - 2j * np.pi * n @ (z + b))
            rhs = fac * theta(e, P, z).value
            worst["quasi"] = max(worst["quasi"], abs(lhs - rhs) / abs(rhs))
        for _ in range(3):
            sigma = random_symplectic(g, rng)
            for e in evens:
                P2, e2, F = symplectic_transform(sigma, P, e)
                lhs = theta(e2, P2, np.zeros(g)).value ** 8
                rhs = F**4 * theta(e, P, np.zeros(g)).value ** 8
                if abs(rhs) > 1e-6:
                    worst["theta8"] = max(worst["theta8"], abs(lhs - rhs) / abs(rhs))
    v = theta(Characteristic.from_string("00"), np.array([[1j]]), np.zeros(1)).value
    g1 = abs(v - theta_g1_oracle())
    ok = all(x < 1e-8 for x in worst.values()) and g1 < 1e-12
    return CheckResult(1, "theta identities g=1..3", ok, dict(worst, g1_value=v.real, g1_error=g1))


# -- 2: periods ---------------------------------------------------------------------


def check_periods(level="full", seed=0):
    S = Surface(HyperellipticCurve([-1.0, 0.0, 1.0]))
    lem = abs(S.Omega[0, 0] - 1j)
    rng = np.random.default_rng(seed)
    n = 50 if level == "full" else 10
    sym, imin = 0.0, np.inf
    for _ in range(n):
        T = Surface(random_curve(2, rng))
        T.period_matrix
        sym = max(sym, T.symmetry_defect)
        imin = min(imin, float(np.min(np.linalg.eigvalsh(T.Omega.imag))))
    ok = lem < 1e-8 and sym < 1e-8 and imin > 0
    return CheckResult(2, "periods: lemniscatic and Riemann relations", ok,
                       {"lemniscatic_error": lem, "max_symmetry_defect": sym, "min_eig_im": imin, "curves": n})


# -- 3: spinor zeros ------------------------------------------------------------------


def check_spinor_zeros(level="full", seed=0):
    rng = np.random.default_rng(seed + 3)
    S = Surface(random_curve(2, rng))
    e = S.curve.e
    scale = max(1.0, float(np.max(np.abs(e))))
    hit, worst, single = [], 0.0, True
    for eta in enumerate_characteristics(2, 1):
        sq = spinor(S, eta)
        root = -sq.poly[0] / sq.poly[1]
        d = np.abs(e - root)
        hit.append(int(np.argmin(d)))
        worst = max(worst, float(d.min()) / scale)
        single &= len(sq.zeros) == 1 and sq.zeros[0][1] == 2
    ok = single and sorted(hit) == list(range(6)) and worst < 1e-6
    return CheckResult(3, "g=2 odd spinors vanish doubly at distinct Weierstrass points", ok,
                       {"defect": worst, "weierstrass_indices": hit, "single_double_zero": single})


# -- 4: bilinear identity -----------------------------------------------------------


def simple_zero_differential(curve, marking=None):
    """(x - x0) dx / y with x0 pushed out beyond the last branch point.

    Several offsets are tried; the first whose relative path avoids the
    marking loops is used.
    """
    e = curve.e
    u = (e[-1] - e[-2]) / abs(e[-1] - e[-2])
    last = None
    for off in (0.5, 1.0, 0.5j, -0.5j, 2.0):
        x0 = e[-1] + off * u
        S = Surface(curve, marking, avoid=[x0])
        om = Differential(S, [-x0, 1.0])
        try:
            homological_coordinates(om)
        except SpinTauError as exc:
            last = exc
            continue
        return S, om
    raise last


def lemma_defect(S, diff):
    K = BergmanKernel(S)
    co = homological_coordinates(diff)
    integ = cycle_integrals(K, diff, co)
    return rbr_identity(diff, co, integ)


def check_bilinear(level="full", seed=0):
    rng = np.random.default_rng(seed + 4)
    c = random_curve(2, rng)
    S = Surface(c)
    l1, r1, d1 = lemma_defect(S, spinor(S, Characteristic.from_string("1100")))
    S2, om = simple_zero_differential(c)
    l2, r2, d2 = lemma_defect(S2, om)
    ok = d1 < 1e-4 and d2 < 1e-4
    return CheckResult(4, "bilinear identity (spinor, simple zeros)", ok,
                       {"spinor_lhs": l1, "spinor_rhs": r1, "spinor_defect": d1,
                        "simple_lhs": l2, "simple_rhs": r2, "simple_defect": d2})


# -- 5: scaling -------------------------------------------------------------------------


def check_scaling(level="full", seed=0):
    rng = np.random.default_rng(seed + 5)
    out, ok = {}, True
    for g, target in ((2, 16), (3, 32)):
        if g == 3 and level != "full":
            continue
        S = Surface(random_curve(g, rng))
        eta = enumerate_characteristics(g, 1)[0]
        val, err = tau_scaling_exponent(BergmanKernel(S), spinor(S, eta), steps=8)
        out["g%d" % g] = val.real
        out["g%d_error" % g] = abs(val - target)
        ok &= abs(val - target) < 1e-3
    return CheckResult(5, "homogeneity exponent along scaling path", ok, out)


# -- 6: periods near the boundary --------------------------------------------------------


def check_period_degeneration(level="full", seed=0):
    F = irreducible_family(IRREDUCIBLE_BASE)
    r = period_degeneration(F)
    slope = r["log_slope"].slope
    others = r["others"].slope
    R = reducible_family(CLUSTER_G4, FAR_G4)
    q = period_degeneration(R, R.grid(8))
    ok = abs(slope - 1) < 0.02 and others >= 0.9 and q["rank1_ratio"] < 0.05 and abs(q["offdiag"].slope - 1) < 0.1
    return CheckResult(6, "period matrix degeneration", ok,
                       {"log_slope": slope, "others_slope": others, "rank1_ratio": q["rank1_ratio"],
                        "offdiag_slope": q["offdiag"].slope})


# -- 7: theta near the boundary ------------------------------------------------------------


def check_theta_boundary(level="full", seed=0):
    R = reducible_family(CLUSTER_G2, FAR_G2)
    res = theta_degeneration(R, Characteristic.from_string("1100"))["residual"].slope
    F = irreducible_family(IRREDUCIBLE_BASE)
    a0 = theta_degeneration(F, Characteristic.from_string("0010"))["leading"].slope
    b0 = theta_degeneration(F, Characteristic.from_string("0000"))["correction"].slope
    ok = abs(res - 2) < 0.1 and abs(a0 - 0.125) < 0.01 and abs(b0 - 0.5) < 0.05
    return CheckResult(7, "theta degeneration exponents", ok,
                       {"reducible_residual": res, "delta1_leading": a0, "delta0_correction": b0})


# -- 8: spinors near the boundary -----------------------------------------------------------


def check_spinors_degeneration(level="full", seed=0):
    R = reducible_family(CLUSTER_G2, FAR_G2)
    red = check_spinor_degeneration(R, Characteristic.from_string("1100"))
    F = irreducible_family(IRREDUCIBLE_BASE)
    a0 = check_spinor_degeneration(F, Characteristic.from_string("0011"))["leading"].slope
    b0 = check_spinor_degeneration(F, Characteristic.from_string("1100"))["correction"].slope
    mono = monodromy_check(F, Characteristic.from_string("0011"), 1e-3)["defect"]
    c1, c2 = red["C1"].slope, red["C2"].slope
    ok = abs(c1) < 0.05 and abs(c2 - 1) < 0.05 and abs(a0 - 0.125) < 0.02 and abs(b0 - 0.5) < 0.05 and mono < 1e-6
    return CheckResult(8, "spinor degeneration exponents", ok,
                       {"C1_side": c1, "C2_side": c2, "delta1": a0, "delta0_correction": b0, "monodromy": mono})


# -- 9: tau ---------------------------------------------------------------------------------


def check_tau_boundary(level="full", seed=0):
    n = 6 if level == "full" else 4
    F = irreducible_family(IRREDUCIBLE_BASE, n=n)
    out = {}
    out["A0"] = fit_tau_boundary_exponent(F, Characteristic.from_string("0011"))["fit"].slope
    out["B0"] = fit_tau_boundary_exponent(F, Characteristic.from_string("1100"))["fit"].slope
    targets = {"A0": 6.0, "B0": 16.0}
    if level == "full":
        R = reducible_family(CLUSTER_G2, [3.0, 4.0 + 0.5j, 5.0, 6.0 + 0.3j, 7.5 - 0.2j], n=5)
        out["A1_g3"] = fit_tau_boundary_exponent(R, Characteristic.from_string("110000"))["fit"].slope
        # residue circles at the merging zeros lose precision below eps ~ 1.5e-3
        Z = zg_family(ZG_CURVE, ratio=0.7, n=5)
        out["Zg"] = fit_tau_boundary_exponent(Z)["fit"].slope
        targets.update({"A1_g3": 32.0, "Zg": 16.0 / 5.0})
    ok = all(abs(out[k] - v) < 0.05 * v for k, v in targets.items())
    return CheckResult(9, "tau boundary exponents", ok, dict(out, targets=targets))


# -- 10: Picard ---------------------------------------------------------------------------------


def check_picard(level="full", seed=0):
    ok_f = all(solve_farkas(g) == farkas_class(g) for g in range(3, 11))
    js = solve_farkas(3).to_dict()
    want = {"lambda": "11", "alpha0": "-5/4", "beta0": "-2", "alpha1": "-4", "beta1": "-2"}
    ok_t = True
    for g in range(1, 11):
        th = solve_theta_null(g)
        lam, bd, nn = theta_null_identity(g)
        ok_t &= (nn * th + bd) == lam and th["lambda"] == 0.25 and th["alpha0"] == -1 / 16
        ok_t &= all(th["beta%d" % j] == -0.5 for j in range(1, g // 2 + 1))
    ok = ok_f and js == want and ok_t
    return CheckResult(10, "exact divisor classes", ok, {"farkas_g3_10": ok_f, "g3_json": js, "theta_null": ok_t})


CHECKS = [check_theta, check_periods, check_spinor_zeros, check_bilinear, check_scaling,
          check_period_degeneration, check_theta_boundary, check_spinors_degeneration,
          check_tau_boundary, check_picard]


def run_checks(level="full", seed=0, only=None, report=print):
    results = []
    for k, fn in enumerate(CHECKS, start=1):
        if only is not None and k not in only:
            continue
        r = fn(level=level, seed=seed)
        if report is not None:
            report(r.line())
        results.append(r)
    return results
