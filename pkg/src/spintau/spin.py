"""
Spin structures, spinor squares and homological coordinates.

For an odd characteristic eta the holomorphic differential

    sigma = sum_i d_{w_i} theta[eta](0, Omega) v_i

is the square of a section of the corresponding spin bundle.  On a
hyperelliptic model it reads P(x) dx / y with deg P <= g - 1, so its zeros
are roots of P (a root at a branch point counts twice) together with
possible zeros at infinity when P has deficient degree.
"""

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import (
    DegenerateSpinor,
    EvenCharacteristic,
    OddMultiplicity,
    PathCrossesCycle,
    PathThroughBranchPoint,
    SpinTauError,
    UnresolvedCluster,
)
from .surface import SurfacePoint, _lift_crossings, _segment_integral, segment_y
from .theta import Characteristic, parity, theta_gradient

__all__ = [
    "enumerate_characteristics",
    "Differential",
    "SpinorSquare",
    "HomologicalCoords",
    "spinor",
    "spinor_zeros",
    "polynomial_roots",
    "homological_coordinates",
    "UnlabeledZeros",
    "ZeroNearBranchCut",
]


class UnlabeledZeros(SpinTauError, ValueError):
    pass


class ZeroNearBranchCut(SpinTauError, ValueError):
    pass


def enumerate_characteristics(g, parity_bit):
    """All characteristics of genus g with the given parity, in bit order."""
    out = []
    for bits in product((0, 1), repeat=2 * g):
        eta = Characteristic(bits)
        if parity(eta) == parity_bit:
            out.append(eta)
    return out


# -- roots by the argument principle ----------------------------------------------


def _winding(coef, z):
    """Winding number of the polynomial around the closed polyline z."""
    vals = np.polyval(coef[::-1], z)
    if np.any(vals == 0):
        return None
    ph = np.angle(np.concatenate([vals, vals[:1]]))
    d = np.diff(ph)
    d = (d + np.pi) % (2 * np.pi) - np.pi
    if np.max(np.abs(d)) > 0.5 * np.pi:
        return None
    return int(round(np.sum(d) / (2 * np.pi)))


def _box_boundary(c, h, n):
    t = np.linspace(-1, 1, n, endpoint=False)
    return np.concatenate([c + h * (t - 1j), c + h * (1 + 1j * t), c + h * (-t + 1j), c + h * (-1 - 1j * t)])


def _count(coef, c, h):
    n = 64
    while n <= 2 ** 16:
        w = _winding(coef, _box_boundary(c, h, n))
        if w is not None:
            return w
        n *= 4
    return None


def _quadtree(coef, nprime, c0, h0, bound, min_size):
    boxes = [(c0, h0)]
    found = []
    while boxes:
        c, h = boxes.pop()
        m = _count(coef, c, h)
        if m is None:
            return None
        if m == 0:
            continue
        if h < 1e-3 * bound or h < min_size:
            z = c
            for _ in range(60):
                fp = np.polyval(nprime[m][::-1], z)
                if fp == 0:
                    break
                dz = np.polyval(nprime[m - 1][::-1], z) / fp
                z = z - dz
                if abs(dz) < 1e-16 * max(1.0, abs(z)):
                    break
            found.append((complex(z) if abs(z - c) < 4 * h else complex(c), m))
            continue
        q = 0.5 * h
        for dx, dy in ((-1, -1), (1, -1), (-1, 1), (1, 1)):
            boxes.append((c + q * (dx + 1j * dy), q))
    return found


def polynomial_roots(coef, min_size=1e-9):
    """Roots with multiplicities of sum coef[k] x^k.

    Quadtree subdivision of a bounding square stops where the argument
    principle isolates a cluster; each cluster is polished by Newton's
    method for the (m-1)-th derivative.  A root on a box edge restarts the
    subdivision with a shifted grid.  Returns a sorted list of (root, m).
    """
    coef = np.trim_zeros(np.asarray(coef, dtype=complex), "b")
    deg = len(coef) - 1
    if deg <= 0:
        return []
    bound = 1.0 + np.max(np.abs(coef[:-1] / coef[-1]))
    nprime = [coef]
    for _ in range(deg):
        c = nprime[-1]
        nprime.append(c[1:] * np.arange(1, len(c)))
    for attempt in range(20):
        shift = bound * (0.0137 + 0.0091j) * (1 + 0.618 * attempt)
        found = _quadtree(coef, nprime, shift, 1.05 * bound + abs(shift), bound, min_size)
        if found is not None and sum(m for _, m in found) == deg:
            break
    else:
        # fall back on companion-matrix roots, one by one
        found = [(complex(r), 1) for r in np.roots(coef[::-1])]
    merged = []
    for z, m in sorted(found, key=lambda r: (r[0].real, r[0].imag)):
        for k, (z2, m2) in enumerate(merged):
            if abs(z - z2) < 1e-6 * bound:
                merged[k] = ((z * m + z2 * m2) / (m + m2), m + m2)
                break
        else:
            merged.append((z, m))
    merged.sort(key=lambda r: (r[0].real, r[0].imag))
    return merged


# -- differentials --------------------------------------------------------------


@dataclass(eq=False)
class Differential:
    """Holomorphic differential P(x) dx / y on a marked surface.

    ``poly[k]`` is the coefficient of x^k dx / y.
    """

    surface: object
    poly: np.ndarray
    zeros: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    cluster_radius: float = 1e-4

    def __post_init__(self):
        self.poly = np.asarray(self.poly, dtype=complex)
        if not self.zeros:
            self.zeros = _locate_zeros(self, self.cluster_radius)

    def value(self, x, y):
        """omega / dx."""
        x = np.asarray(x, dtype=complex)
        return np.polyval(self.poly[::-1], x) / y

    def dlog_terms(self, x):
        """P, P', P'' at x (used by the Schwarzian)."""
        c = self.poly[::-1]
        return np.polyval(c, x), np.polyval(np.polyder(c), x), np.polyval(np.polyder(c, 2), x)

    def scaled(self, t):
        return Differential(self.surface, t * self.poly, list(self.zeros), list(self.notes), self.cluster_radius)

    @property
    def multiplicities(self):
        return [m for _, m in self.zeros]


def _locate_zeros(diff, cluster_radius):
    S = diff.surface
    curve = S.curve
    g = curve.g
    p = diff.poly
    scale = max(1.0, float(np.max(np.abs(curve.e))))
    pmax = np.max(np.abs(p))
    if pmax == 0:
        raise DegenerateSpinor("zero differential")
    deg = g - 1
    while deg > 0 and abs(p[deg]) < 1e-11 * pmax:
        deg -= 1
    zeros = []
    notes = diff.notes
    for x0, m in polynomial_roots(p[: deg + 1]):
        d = np.abs(curve.e - x0)
        i = int(np.argmin(d))
        if d[i] < cluster_radius * scale:
            if d[i] > 1e-8 * scale:
                notes.append("UnresolvedCluster: zero at distance %.2e from e_%d merged" % (d[i], i + 1))
            zeros.append((curve.branch_point(i), 2 * m))
        else:
            yv = curve.y_ref(x0)
            pair = [SurfacePoint(complex(x0), complex(s * yv), "regular") for s in (1, -1)]
            zeros.extend((q, m) for q in pair)
    defic = (g - 1) - deg
    if defic:
        if curve.infinity_is_branch:
            zeros.append((curve.infinity(), 2 * defic))
        else:
            zeros.extend([(curve.infinity(1), defic), (curve.infinity(-1), defic)])
    total = sum(m for _, m in zeros)
    if total != 2 * g - 2:
        raise SpinTauError("zero count %d != 2g-2" % total)
    return _sorted_zeros(zeros)


def _sorted_zeros(zeros):
    def key(z):
        q = z[0]
        x = q.x if np.isfinite(q.x) else complex(1e300, 0)
        return (round(x.real, 9), round(x.imag, 9), q.y.real, q.y.imag)

    return sorted(zeros, key=key)


@dataclass(eq=False)
class SpinorSquare(Differential):
    eta: Characteristic = None
    c: np.ndarray = None


def spinor(surface, eta, tol=1e-12, cluster_radius=1e-4):
    """Spinor square of the odd characteristic ``eta`` on a marked surface."""
    if parity(eta) != 1:
        raise EvenCharacteristic("characteristic %s is even" % eta)
    P = surface.period_matrix
    c = theta_gradient(eta, P, np.zeros(surface.g), tol).value
    if np.linalg.norm(c) < max(tol, 1e-10):
        raise DegenerateSpinor("theta gradient %.2e below tolerance" % np.linalg.norm(c))
    poly = surface.basis.N.T @ c
    sq = SpinorSquare(surface, poly, cluster_radius=cluster_radius, eta=eta, c=c)
    for q, m in sq.zeros:
        if m % 2:
            sq.notes.append("OddMultiplicity: zero at x=%s has multiplicity %d" % (q.x, m))
    return sq


def spinor_zeros(sq, tol=None):
    """Zeros of the spinor square with multiplicities (sorted)."""
    return list(sq.zeros)


# -- homological coordinates ------------------------------------------------------


@dataclass
class HomologicalCoords:
    """Periods of a differential over (a, b, relative paths).

    ``paths[j]`` is the polyline certificate of l_j, from the hub zero
    (the last zero in the sorted order) to the zero ``labels[j]``.
    ``dual`` records the dual cycles: s_j = -b_j, s_{g+j} = a_j, and
    s_{2g+j}, a small positive circle around zero j.
    """

    z: np.ndarray
    labels: list
    paths: list
    dual: list
    hub: int
    crossings: list


def _used_loops(surface):
    return [k for k in range(len(surface.loops)) if np.any(surface.marking.cycles[:, k] != 0)]


def _count_crossings(surface, xs, ys):
    """Unsigned count of crossings between an open lifted polyline and loops."""
    total = 0
    for k in _used_loops(surface):
        xl, yl = surface.loops[k].polygon()
        p0, p1 = xs[:-1], xs[1:]
        q0, q1 = xl, np.roll(xl, -1)
        dp = (p1 - p0)[:, None]
        dq = (q1 - q0)[None, :]
        r = q0[None, :] - p0[:, None]
        den = (np.conj(dp) * dq).imag
        with np.errstate(divide="ignore", invalid="ignore"):
            u = (np.conj(r) * dq).imag / den
            v = (np.conj(r) * dp).imag / den
        hit = (u >= 0) & (u < 1) & (v >= 0) & (v < 1) & (den != 0)
        for i, j in zip(*np.nonzero(hit)):
            ya = ys[i] + u[i, j] * (ys[i + 1] - ys[i])
            yb = yl[j] + v[i, j] * (yl[(j + 1) % len(yl)] - yl[j])
            if abs(ya - yb) < abs(ya + yb):
                total += 1
    return total


def _segment_samples(curve, x0, x1, ref, n=400):
    u = np.linspace(0.0, 1.0, n)
    return x0 + u * (x1 - x0), segment_y(curve, x0, x1, u, *ref)


def _plan_path(diff, start, end):
    """Polyline from zero ``start`` to zero ``end`` with a value of int omega.

    Returns (value, certificate dict).
    """
    S = diff.surface
    curve = S.curve

    def f(x, y):
        return diff.value(x, y)[None, :]

    def seg(x0, x1, b0, b1, ref):
        return _segment_integral(curve, f, x0, x1, b0, b1, ref, rtol=1e-12)[0]

    p, q = start, end
    cands = []
    if p.kind == "branch" and q.kind == "branch":
        mid = 0.5 * (p.x + q.x)
        for bend in (0.0, 0.3, -0.3):
            w = mid + 1j * bend * (q.x - p.x)
            for sh in (1, -1):
                yw = sh * curve.y_ref(w)
                try:
                    if bend == 0.0:
                        xs, ys = _segment_samples(curve, p.x, q.x, (0.5, yw))
                    else:
                        xs1, ys1 = _segment_samples(curve, p.x, w, (1.0, yw))
                        xs2, ys2 = _segment_samples(curve, w, q.x, (0.0, yw))
                        xs, ys = np.concatenate([xs1, xs2]), np.concatenate([ys1, ys2])
                except PathThroughBranchPoint:
                    continue
                cr = _count_crossings(S, xs, ys)
                if bend == 0.0:
                    val = (lambda yw=yw: seg(p.x, q.x, True, True, (0.5, yw)))
                else:
                    val = (lambda w=w, yw=yw: seg(p.x, w, True, False, (1.0, yw)) + seg(w, q.x, False, True, (0.0, yw)))
                # prefer straight paths at equal crossing count
                cands.append((cr + 0.1 * (bend != 0.0), val, {"vertices": [p.x, w, q.x] if bend else [p.x, q.x], "sheet": sh}))
    elif p.kind == "regular" and q.kind == "regular":
        yend = segment_y(curve, p.x, q.x, np.array([1.0]), 0.0, p.y)[0] if p.x != q.x else -q.y
        if p.x != q.x and abs(yend - q.y) < abs(yend + q.y):
            xs, ys = _segment_samples(curve, p.x, q.x, (0.0, p.y))
            cands.append((_count_crossings(S, xs, ys), lambda: seg(p.x, q.x, False, False, (0.0, p.y)),
                          {"vertices": [p.x, q.x]}))
        unc = S.uncovered_branch_points() or list(range(curve.n))
        for i in sorted(unc, key=lambda i: abs(curve.e[i] - p.x) + abs(curve.e[i] - q.x)):
            e = curve.e[i]
            try:
                xs1, ys1 = _segment_samples(curve, p.x, e, (0.0, p.y))
                xs2, ys2 = _segment_samples(curve, e, q.x, (1.0, q.y))
            except PathThroughBranchPoint:
                continue
            cr = _count_crossings(S, xs1, ys1) + _count_crossings(S, xs2, ys2)

            def val(e=e):
                return seg(p.x, e, False, True, (0.0, p.y)) + seg(e, q.x, True, False, (1.0, q.y))

            cands.append((cr, val, {"vertices": [p.x, e, q.x]}))
    else:
        if p.kind == "branch":
            ref = (1.0, q.y)
        else:
            ref = (0.0, p.y)
        xs, ys = _segment_samples(curve, p.x, q.x, ref)
        cands.append((_count_crossings(S, xs, ys),
                      lambda: seg(p.x, q.x, p.kind == "branch", q.kind == "branch", ref), {"vertices": [p.x, q.x]}))
    cands.sort(key=lambda c: c[0])
    if not cands:
        raise PathThroughBranchPoint("no admissible path between zeros")
    cr, val, cert = cands[0]
    cert["crossings"] = int(cr)
    cert["vertices"] = [[complex(v).real, complex(v).imag] for v in cert["vertices"]]
    return val(), cert


def homological_coordinates(diff, path_plan=None):
    """The 3g-2 (more generally 2g + d - 1) periods of ``diff``.

    Zeros are labelled in sorted order; the hub is the last zero.  Paths
    crossing a marking loop are rejected unless the residue at the far
    endpoint vanishes identically (zeros at Weierstrass points, where
    (S_B - S_omega)/omega is odd under the involution).
    """
    S = diff.surface
    g = S.g
    zeros = [q for q, _ in diff.zeros]
    if any(q.kind == "infinity" for q in zeros):
        raise UnlabeledZeros("zeros at infinity are not supported by the path planner")
    zA = S.A @ diff.poly
    zB = S.B @ diff.poly
    d = len(zeros)
    hub = d - 1
    rel, paths, crossings = [], [], []
    for j in range(d - 1):
        if path_plan is not None and j in path_plan:
            val, cert = path_plan[j](diff)
        else:
            val, cert = _plan_path(diff, zeros[hub], zeros[j])
        if cert["crossings"] and zeros[j].kind != "branch":
            raise PathCrossesCycle("relative path %d crosses the marking loops" % j)
        rel.append(val)
        paths.append(cert)
        crossings.append(cert["crossings"])
    z = np.concatenate([zA, zB, np.array(rel, dtype=complex)])
    dual = ["-b%d" % (j + 1) for j in range(g)] + ["a%d" % (j + 1) for j in range(g)]
    dual += ["circle(p%d)" % (j + 1) for j in range(d - 1)]
    return HomologicalCoords(z, zeros, paths, dual, hub, crossings)
