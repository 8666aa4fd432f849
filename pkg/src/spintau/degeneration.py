"""
Degenerating families of hyperelliptic curves and exponent fits.

Boundary approaches are realised by moving branch points:

* irreducible (Delta_0): two branch points c +- sqrt(t) collide, and the
  loop around them is the vanishing a-cycle a_g;
* reducible (Delta_j): a cluster of 2j + 1 branch points is scaled by
  s = t^2. The off-diagonal period block then decays like t, which fixes
  the calibration of t against the plumbing parameter;
* Z_g: the curve is fixed and two double zeros of omega = (x - a)^2 dx / y
  merge at a Weierstrass point e as a = e + eps.

Exponents are read from log-log fits on geometric grids, restricted to
the window before the quadrature noise floor.  Tau exponents come from
the one-form d log tau contracted with dz/d log t, where z are the
homological coordinates and dz is a five point central difference in
log t.
"""

from dataclasses import dataclass, field

import numpy as np

from .bergman import BergmanKernel, dlogtau
from .errors import SpinTauError
from .spin import Differential, homological_coordinates, spinor
from .surface import HomologyMarking, HyperellipticCurve, Surface, standard_marking
from .theta import Characteristic, PeriodMatrix, SymplecticMap, theta_batch, transform_characteristic

__all__ = [
    "DegenerationFamily",
    "ExponentFit",
    "irreducible_family",
    "reducible_family",
    "zg_family",
    "fit_exponent",
    "fit_limit",
    "period_degeneration",
    "check_theta_degeneration",
    "check_spinor_degeneration",
    "monodromy_check",
    "tau_rate",
    "fit_tau_boundary_exponent",
    "CollisionHitsOtherBranchPoint",
    "ClusterOverlap",
    "CharacteristicBlockMismatch",
    "SamplePointEntersNodeRegion",
    "FamilyLeavesTransversalSlice",
    "FitConfidencePoor",
]


class CollisionHitsOtherBranchPoint(SpinTauError, ValueError):
    pass


class ClusterOverlap(SpinTauError, ValueError):
    pass


class CharacteristicBlockMismatch(SpinTauError, ValueError):
    pass


class SamplePointEntersNodeRegion(SpinTauError, ValueError):
    pass


class FamilyLeavesTransversalSlice(SpinTauError, ValueError):
    pass


class FitConfidencePoor(SpinTauError, RuntimeError):
    pass


# -- families -----------------------------------------------------------------------


@dataclass
class DegenerationFamily:
    """One-parameter family t -> (curve, marking) approaching a boundary stratum.

    ``points(t)`` returns the branch points in loop order; ``marking(K)``
    the marking as loop coefficients (K loops).  For ``zg_collision`` the
    curve is fixed and ``differential(surface, t)`` gives omega_t.
    """

    kind: str
    genus: int
    points: object
    marking: object = None
    t0: float = 1e-2
    ratio: float = 0.5
    n: int = 12
    j: int = None
    scale: object = None
    note: str = ""
    data: dict = field(default_factory=dict)
    differential: object = None

    def grid(self, n=None):
        n = self.n if n is None else n
        return self.t0 * self.ratio ** np.arange(n)

    def curve_at(self, t):
        sep = 1e-8 * (self.scale(t) if self.scale is not None else 1.0)
        return HyperellipticCurve(self.points(t), separation=sep, sort=False)

    def surface_at(self, t, **kw):
        curve = self.curve_at(t)
        mk = None if self.marking is None else self.marking(curve.n - 1)
        return Surface(curve, mk, **kw)

    def to_json(self):
        pts = np.asarray(self.points(self.t0), dtype=complex)
        out = {
            "kind": self.kind,
            "genus": self.genus,
            "j": self.j,
            "grid": {"t0": self.t0, "ratio": self.ratio, "n": self.n},
            "branch_points_at_t0": [[p.real, p.imag] for p in pts],
            "note": self.note,
        }
        out.update({k: v for k, v in self.data.items() if isinstance(v, (int, float, str, list))})
        return out


def _cpx(v):
    return [complex(z) for z in v]


def irreducible_family(base_points, collision_point=0.0, t0=1e-2, ratio=0.5, n=12):
    """Branch points c +- sqrt(t) added to a genus g-1 curve.

    Parameters
    ----------
    base_points : sequence of complex
        Branch points of the normalization (2g of them, or 2g - 1 when
        infinity is a branch point), in loop order.
    collision_point : complex
        c; the pair is inserted after the first 2g - 2 base points so that
        its loop is a_g in the standard marking.
    """
    base = _cpx(base_points)
    c = complex(collision_point)
    g = (len(base) + 1) // 2
    dmin = min(abs(b - c) for b in base)
    if np.sqrt(t0) >= 0.25 * dmin:
        raise CollisionHitsOtherBranchPoint("sqrt(t0) = %.3g too large for gap %.3g" % (np.sqrt(t0), dmin))
    k = 2 * g - 2

    def points(t):
        r = np.sqrt(complex(t))
        return base[:k] + [c - r, c + r] + base[k:]

    return DegenerationFamily(
        "irreducible", g, points, None, t0, ratio, n,
        scale=lambda t: np.sqrt(abs(t)),
        note="branch points c -+ sqrt(t) collide; a_%d is the vanishing cycle" % g,
        data={"collision_point": [c.real, c.imag], "base_points": [[b.real, b.imag] for b in base]},
    )


def _cluster_marking(j, gj, K):
    """a/b over K loops: standard inside the cluster (loops 1..2j) and the far part."""
    g = j + gj
    a = np.zeros((g, K), dtype=np.int64)
    b = np.zeros((g, K), dtype=np.int64)
    for i in range(j):
        a[i, 2 * i] = 1
        for k in range(i, j):
            b[i, 2 * k + 1] = 1
    off = 2 * j + 1
    for i in range(gj):
        a[j + i, off + 2 * i] = 1
        for k in range(i, gj):
            b[j + i, off + 2 * k + 1] = 1
    return HomologyMarking(a, b)


def reducible_family(cluster, far, t0=1e-2, ratio=0.5, n=12):
    """Cluster of 2j + 1 branch points scaled by s = t^2 next to 2(g-j) + 1 fixed ones.

    The genus j part is the cluster with infinity (the node) as the last
    branch point; the genus g - j part is ``far`` together with 0.
    """
    cl = _cpx(cluster)
    fr = _cpx(far)
    if len(cl) % 2 == 0 or len(fr) % 2 == 0:
        raise ClusterOverlap("both parts need an odd number of branch points")
    j = (len(cl) - 1) // 2
    gj = (len(fr) - 1) // 2
    ext = max(abs(z) for z in cl) * t0**2
    if ext >= 0.25 * min(abs(z) for z in fr):
        raise ClusterOverlap("cluster of size %.3g overlaps the far branch points" % ext)

    def points(t):
        s = t * t
        return [s * z for z in cl] + fr

    fam = DegenerationFamily(
        "reducible", j + gj, points, lambda K: _cluster_marking(j, gj, K), t0, ratio, n, j=j,
        scale=lambda t: t * t,
        note="cluster scaled by s = t^2; off-diagonal periods decay like t (calibration)",
        data={"cluster": [[z.real, z.imag] for z in cl], "far": [[z.real, z.imag] for z in fr]},
    )
    return fam


def limit_surfaces(family):
    """Smooth limits (C_1, C_2) of a reducible family with matching markings."""
    cl = [complex(a, b) for a, b in family.data["cluster"]]
    fr = [complex(a, b) for a, b in family.data["far"]]
    S1 = Surface(HyperellipticCurve(cl, sort=False))
    c2 = HyperellipticCurve([0.0] + fr, sort=False)
    gj = c2.g
    K = c2.n - 1
    a = np.zeros((gj, K), dtype=np.int64)
    b = np.zeros((gj, K), dtype=np.int64)
    for i in range(gj):
        a[i, 2 * i + 1] = 1
        for k in range(i, gj):
            b[i, 2 * k + 2] = 1
    S2 = Surface(c2, HomologyMarking(a, b))
    return S1, S2


def zg_family(base_points, index=-1, t0=1e-2, ratio=0.5, n=12):
    """omega_eps = (x - a)^2 dx / y with a = e + eps, e a Weierstrass point.

    Genus 3 only (deg (x - a)^2 = g - 1).  e must be a branch point no
    marking loop covers, so that the relative path (a, +) -> e -> (a, -)
    crosses no marking cycle.
    """
    pts = _cpx(base_points)
    curve = HyperellipticCurve(pts, sort=False)
    if curve.g != 3:
        raise FamilyLeavesTransversalSlice("zg_family needs genus 3")
    i = index % curve.n
    e = curve.e[i]
    nb = np.delete(curve.e, i)
    near = nb[np.argmin(np.abs(nb - e))]
    u = (e - near) / abs(e - near)

    def differential(surface, eps):
        a = e + eps * u
        return Differential(surface, [a * a, -2 * a, 1.0], cluster_radius=1e-12)

    fam = DegenerationFamily(
        "zg_collision", 3, lambda t: pts, None, t0, ratio, n,
        note="two double zeros merge at e_%d; fixed curve, moving differential" % (i + 1),
        data={"index": i}, differential=differential,
    )
    if i not in Surface(curve).uncovered_branch_points():
        raise FamilyLeavesTransversalSlice("e_%d is covered by a marking loop" % (i + 1))
    return fam


# -- fits -----------------------------------------------------------------------------


@dataclass
class ExponentFit:
    """Least squares slope of log|q| against log t on the pre-noise window."""

    slope: float
    intercept: float
    confidence: float
    t_range: tuple
    n_used: int
    local: list = field(default_factory=list)
    improving: bool = True

    def to_json(self):
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "confidence": self.confidence,
            "t_range": list(self.t_range),
            "n_used": self.n_used,
            "local": list(self.local),
            "improving": self.improving,
        }


def _pre_noise(local, floor=1e-4):
    """Number of local slopes before the approach stops improving."""
    d = np.abs(np.diff(local))
    for k in range(1, len(d)):
        if d[k] > 2 * d[k - 1] and d[k] > floor:
            return k + 1, False
    return len(local), True


def fit_exponent(ts, values, window=4, noise=0.0):
    """Slope of log|values| against log ts.

    Points with |value| <= noise are dropped; the fit uses the last
    ``window`` points before the local slopes start to degrade.
    """
    ts = np.asarray(ts, dtype=float)
    v = np.abs(np.asarray(values))
    keep = v > noise
    ts, v = ts[keep], v[keep]
    if len(ts) < 3:
        raise FitConfidencePoor("fewer than three points above the noise floor")
    lx, ly = np.log(ts), np.log(v)
    local = np.diff(ly) / np.diff(lx)
    m, improving = _pre_noise(local)
    stop = m + 1
    lo = max(0, stop - window)
    X, Y = lx[lo:stop], ly[lo:stop]
    A = np.vstack([X, np.ones_like(X)]).T
    (k, c), *_ = np.linalg.lstsq(A, Y, rcond=None)
    res = float(np.max(np.abs(A @ np.array([k, c]) - Y)))
    return ExponentFit(float(k), float(c), res, (float(ts[stop - 1]), float(ts[lo])), stop - lo,
                       [float(s) for s in local], improving)


def fit_limit(ts, rates):
    """Limit of a converging sequence of rates (last pre-noise value)."""
    ts = np.asarray(ts, dtype=float)
    r = np.real(np.asarray(rates, dtype=complex))
    m, improving = _pre_noise(r)
    last = m - 1 if m < len(r) else len(r) - 1
    conf = float(abs(r[last] - r[last - 1])) if last > 0 else float("nan")
    return ExponentFit(float(r[last]), float("nan"), conf, (float(ts[last]), float(ts[0])), last + 1,
                       [float(x) for x in r], improving)


# -- periods ----------------------------------------------------------------------------


def _omegas(family, ts):
    return np.array([family.surface_at(t).Omega for t in ts])


def period_degeneration(family, ts=None, window=4):
    """Fits describing Omega_t along the family.

    irreducible: 'log_slope' = d(2 pi i Omega_gg) / d log t (limit) and
    'others' = decay exponent of successive differences of the other
    entries.  reducible: 'offdiag' = decay exponent of the off-diagonal
    block, plus the singular values of its t coefficient.
    """
    ts = family.grid() if ts is None else np.asarray(ts)
    om = _omegas(family, ts)
    g = family.genus
    out = {"t": ts, "Omega": om}
    if family.kind == "irreducible":
        L = np.log(ts)
        rates = 2j * np.pi * np.diff(om[:, g - 1, g - 1]) / np.diff(L)
        out["log_slope"] = fit_limit(ts[1:], rates)
        mask = np.ones((g, g), dtype=bool)
        mask[g - 1, g - 1] = False
        dif = np.array([np.max(np.abs((om[k + 1] - om[k])[mask])) for k in range(len(ts) - 1)])
        out["others"] = fit_exponent(ts[:-1], dif, window)
    elif family.kind == "reducible":
        j = family.j
        off = om[:, :j, j:]
        nrm = np.linalg.norm(off.reshape(len(ts), -1), axis=1)
        out["offdiag"] = fit_exponent(ts, nrm, window)
        C = kappa_coefficient(ts, off)
        sv = np.linalg.svd(C, compute_uv=False)
        out["first_order"] = C
        out["singular_values"] = sv
        out["rank1_ratio"] = float(sv[1] / sv[0]) if len(sv) > 1 else 0.0
    return out


def kappa_coefficient(ts, off, nfit=4):
    """t coefficient C of the off-diagonal block: off(t)/t = C + D t on the smallest ts."""
    ts = np.asarray(ts)[-nfit:]
    q = np.asarray(off)[-nfit:] / ts[:, None, None]
    A = np.vstack([np.ones_like(ts), ts]).T
    coef, *_ = np.linalg.lstsq(A, q.reshape(len(ts), -1), rcond=None)
    return coef[0].reshape(off.shape[1:])


# -- theta ------------------------------------------------------------------------------


def _check_eta(family, eta):
    if eta.g != family.genus:
        raise CharacteristicBlockMismatch("characteristic of genus %d on a genus %d family" % (eta.g, family.genus))


def _split(eta, j):
    b = eta.bits
    return Characteristic(b[: 2 * j]), Characteristic(b[2 * j:])


def check_theta_degeneration(family, eta, W_samples=None, ts=None, window=4, tol=1e-14):
    """Theta asymptotics along the family.

    reducible: 'residual' = max over W of
        |theta[eta](W, Omega_t) - theta1 theta2 - (1/2 pi i) sum_ik C_ik t d_i theta1 d_k theta2|
    with theta1, theta2 on the smooth limits and C the fitted t coefficient.
    irreducible: 'leading' = |theta[eta](0, Omega_t)|; for delta = 0 also
    'correction' = |theta[eta](0, Omega_t) - theta[eta1](0, Omega_t')|, Omega_t'
    the leading (g-1) block.
    """
    _check_eta(family, eta)
    ts = family.grid() if ts is None else np.asarray(ts)
    g = family.genus
    om = _omegas(family, ts)
    out = {"t": ts}
    if family.kind == "reducible":
        j = family.j
        e1, e2 = _split(eta, j)
        if W_samples is None:
            rng = np.random.default_rng(7)
            W_samples = 0.3 * (rng.standard_normal((4, g)) + 1j * rng.standard_normal((4, g)))
        W = np.atleast_2d(W_samples)
        S1, S2 = limit_surfaces(family)
        (t1, d1), _ = theta_batch(e1, S1.period_matrix, W[:, :j], tol, order=1)
        (t2, d2), _ = theta_batch(e2, S2.period_matrix, W[:, j:], tol, order=1)
        C = kappa_coefficient(ts, om[:, :j, j:])
        res = []
        for t, O in zip(ts, om):
            full, _ = theta_batch(eta, PeriodMatrix(O), W, tol, order=0)
            first = np.einsum("mi,ik,mk->m", d1, C * t, d2) / (2j * np.pi)
            res.append(np.max(np.abs(full[0] - t1 * t2 - first)))
        out["residual"] = fit_exponent(ts, res, window, noise=1e-13)
        out["values"] = np.array(res)
        out["limit_defect"] = float(np.max(np.abs(om[-1][:j, :j] - S1.Omega)) + np.max(np.abs(om[-1][j:, j:] - S2.Omega)))
    elif family.kind == "irreducible":
        delta = eta.top[g - 1]
        e1 = Characteristic(eta.bits[: 2 * g - 2])
        z = np.zeros((1, g))
        lead, corr = [], []
        for O in om:
            v, _ = theta_batch(eta, PeriodMatrix(O), z, tol, order=0)
            lead.append(v[0][0])
            if delta == 0:
                v1, _ = theta_batch(e1, PeriodMatrix(O[: g - 1, : g - 1]), z[:, : g - 1], tol, order=0)
                corr.append(v[0][0] - v1[0][0])
        out["leading"] = fit_exponent(ts, lead, window)
        out["values"] = np.array(lead)
        if delta == 0:
            out["correction"] = fit_exponent(ts, corr, window, noise=1e-13)
    else:
        raise CharacteristicBlockMismatch("no theta asymptotics for kind %r" % family.kind)
    return out


# -- spinors -------------------------------------------------------------------------


def _spinor_values(S, eta, xs):
    sq = spinor(S, eta)
    xs = np.asarray(xs, dtype=complex)
    P = np.polyval(sq.poly[::-1], xs)
    return P, P / S.curve.y_ref(xs)


def check_spinor_degeneration(family, eta, samples=None, ts=None, window=4):
    """Decay exponents of the spinor square on compacta away from the node.

    reducible: samples (u on C_1, x on C_2) with C_1 values taken in the
    chart u = x / s; fits 'C1' (slope 0) and 'C2' (slope 1).
    irreducible: 'leading' fits |sigma(x)|; for delta = 0 'correction'
    fits successive differences of P(x) = y sigma / dx (slope 1/2).
    """
    _check_eta(family, eta)
    ts = family.grid() if ts is None else np.asarray(ts)
    g = family.genus
    out = {"t": ts}
    if family.kind == "reducible":
        if samples is None:
            samples = ([0.3 + 0.4j, 0.6 - 0.3j], [3.4 + 1.0j, 4.6 - 0.8j])
        u1, x2 = (np.asarray(s, dtype=complex) for s in samples)
        fr = np.array([complex(a, b) for a, b in family.data["far"]])
        if np.min(np.abs(x2[:, None] - fr[None, :])) < 1e-3 or np.min(np.abs(x2)) < 1.0:
            raise SamplePointEntersNodeRegion("C_2 samples must stay away from branch points and the node")
        v1, v2 = [], []
        for t in ts:
            S = family.surface_at(t)
            s = t * t
            _, a = _spinor_values(S, eta, s * u1)
            _, b = _spinor_values(S, eta, x2)
            v1.append(np.max(np.abs(a)) * s)
            v2.append(np.max(np.abs(b)))
        out["C1"] = fit_exponent(ts, v1, window)
        out["C2"] = fit_exponent(ts, v2, window)
        out["values"] = np.array([v1, v2])
    elif family.kind == "irreducible":
        delta = eta.top[g - 1]
        c = complex(*family.data["collision_point"])
        if samples is None:
            samples = [c + 0.4 + 0.5j, c - 0.7 + 0.3j]
        xs = np.asarray(samples, dtype=complex)
        if np.min(np.abs(xs - c)) < 3 * np.sqrt(family.t0):
            raise SamplePointEntersNodeRegion("sample within the collision region")
        Ps, vs = [], []
        for t in ts:
            P, v = _spinor_values(family.surface_at(t), eta, xs)
            Ps.append(P)
            vs.append(np.max(np.abs(v)))
        out["leading"] = fit_exponent(ts, vs, window)
        Ps = np.array(Ps)
        out["values"] = np.array(vs)
        if delta == 0:
            dif = np.max(np.abs(np.diff(Ps, axis=0)), axis=1)
            out["correction"] = fit_exponent(ts[:-1], dif, window, noise=1e-12)
    else:
        raise CharacteristicBlockMismatch("no spinor asymptotics for kind %r" % family.kind)
    return out


def monodromy_check(family, eta, t, x=None):
    """|gamma^8 - 1| for the spinor square transported around t = 0.

    The monodromy of an irreducible family is the Dehn twist b_g -> b_g + a_g
    about the vanishing cycle; gamma is the ratio of the spinor squares in
    the twisted and the original marking.
    """
    if family.kind != "irreducible":
        raise CharacteristicBlockMismatch("monodromy check needs an irreducible family")
    g = family.genus
    S = family.surface_at(t)
    M = np.eye(2 * g, dtype=np.int64)
    M[2 * g - 1, g - 1] = 1
    sigma = SymplecticMap.from_matrix(M)
    S2 = S.with_marking(S.marking.transformed(sigma))
    eta2 = transform_characteristic(sigma, eta)
    c = complex(*family.data["collision_point"])
    x = c + 0.4 + 0.5j if x is None else x
    _, v1 = _spinor_values(S, eta, [x])
    _, v2 = _spinor_values(S2, eta2, [x])
    gamma = complex(v2[0] / v1[0])
    return {"gamma": gamma, "defect": abs(gamma**8 - 1), "eta_twisted": str(eta2),
            "omega_shift": complex(S2.Omega[g - 1, g - 1] - S.Omega[g - 1, g - 1])}


# -- tau -----------------------------------------------------------------------------


def _match_zeros(ref, zeros):
    return [min(zeros, key=lambda zm: abs(zm[0].x - q.x) + abs(zm[0].y - q.y)) for q, _ in ref]


def _state(family, eta, t):
    if family.kind == "zg_collision":
        if "_surface" not in family.data:
            family.data["_surface"] = family.surface_at(t)
        S = family.data["_surface"]
        return S, family.differential(S, t)
    S = family.surface_at(t)
    return S, spinor(S, eta)


def _kernel(family, S):
    if family.kind == "zg_collision":
        if "_kernel" not in family.data:
            family.data["_kernel"] = BergmanKernel(S)
        return family.data["_kernel"]
    return BergmanKernel(S)


def tau_rate(family, eta, t, h=0.02, normalize=0.0):
    """d log tau / d log t at t.

    ``normalize`` = nu replaces omega_t by t^{-nu} omega_t (the t^{1/8}
    normalised spinor near A_0 uses nu = 1/8).  For ``zg_collision`` the
    rate is taken against log z_rel, the relative period between the two
    merging zeros.

    Returns a dict with 'rate', 'euler' (sum z_k d log tau / d z_k) and
    the lemma defect of the underlying identity.
    """
    S, diff = _state(family, eta, t)
    coords = homological_coordinates(diff)
    K = _kernel(family, S)
    form = dlogtau(K, diff, coords)
    zs = {}
    for k in (-2, -1, 1, 2):
        tk = t * np.exp(k * h)
        S2, d2 = _state(family, eta, tk)
        d2 = Differential(S2, d2.poly, zeros=_match_zeros(diff.zeros, d2.zeros))
        # z of t^{-nu} omega_t relative to t: the stencil then carries the -nu z term
        zs[k] = homological_coordinates(d2).z * np.exp(-normalize * k * h)
    dz = (8 * (zs[1] - zs[-1]) - (zs[2] - zs[-2])) / (12 * h)
    coef = form.coefficients
    rate = complex(np.sum(coef * dz))
    if family.kind == "zg_collision":
        rate = rate / complex(dz[-1] / coords.z[-1])
    euler = complex(np.sum(coef * coords.z))
    return {"t": t, "rate": rate, "euler": euler, "z": coords.z, "noise": list(K.noise_notes)}


def fit_tau_boundary_exponent(family, eta=None, ts=None, h=0.02):
    """Limit of d log tau / d log(parameter) along the family.

    irreducible delta = 1: t^{1/8} normalised spinor, parameter t (A_0);
    irreducible delta = 0: parameter r = sqrt(t) (B_0);
    reducible: parameter t (A_j / B_j); zg_collision: against z_rel.
    """
    ts = family.grid() if ts is None else np.asarray(ts)
    g = family.genus
    nu, factor, param = 0.0, 1.0, "t"
    if family.kind == "irreducible":
        delta = eta.top[g - 1]
        if delta == 1:
            nu = 0.125
        else:
            factor, param = 2.0, "r"
    elif family.kind == "zg_collision":
        param = "z_rel"
    rows = [tau_rate(family, eta, t, h, nu) for t in ts]
    rates = [factor * r["rate"] for r in rows]
    fit = fit_limit(ts, rates)
    return {"fit": fit, "rates": np.array(rates), "rows": rows, "parameter": param, "t": ts}
