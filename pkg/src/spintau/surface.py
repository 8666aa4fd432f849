"""
Hyperelliptic Riemann surfaces y^2 = prod (x - e_i).

Homology is generated by the closed loops c_1, ..., c_K, where c_k is an
ellipse with foci e_k, e_{k+1} (branch points in the stored order) that
keeps every other branch point outside. On such an ellipse

    (x - e_k)(x - e_{k+1}) = s^2 sinh^2(rho + i theta),
    x = m + s cosh(rho + i theta),

so y is s sinh(rho + i theta) times a factor that is single-valued around
the loop.  Integrands are periodic and analytic in theta. The trapezoid
rule therefore converges geometrically; node counts are doubled until the
estimate settles.

The lift of each ellipse is chosen so that c_k . c_{k+1} = +1. Intersection
numbers are measured geometrically, from crossings of the lifted polygons,
not assumed.  With that convention the standard marking is

    a_j = c_{2j-1},   b_j = c_{2j} + c_{2j+2} + ... + c_{2g},

and period matrices come out with Im(Omega) > 0.
"""

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate

from .errors import (
    DegenerateCurve,
    NotSymplecticMarking,
    PathThroughBranchPoint,
    QuadratureFailure,
    SpinTauError,
)
from .theta import PeriodMatrix

__all__ = [
    "HyperellipticCurve",
    "SurfacePoint",
    "HomologyMarking",
    "DifferentialBasis",
    "PairLoop",
    "Surface",
    "standard_marking",
    "symplectic_reduction",
    "period_matrix",
    "abel_map",
    "differential_value",
    "segment_y",
    "load_curve",
    "SheetDiscontinuity",
    "ChartMismatch",
    "NearSingularConfiguration",
    "QuadratureNonConvergence",
]


class SheetDiscontinuity(SpinTauError, ValueError):
    pass


class ChartMismatch(SpinTauError, ValueError):
    pass


class NearSingularConfiguration(DegenerateCurve):
    pass


class QuadratureNonConvergence(QuadratureFailure):
    pass


def _sort_key(z):
    return (round(z.real, 14), round(z.imag, 14))


@dataclass(frozen=True, eq=False)
class HyperellipticCurve:
    """Curve y^2 = prod_i (x - e_i) with monic right-hand side.

    An odd number 2g+1 of finite branch points means infinity is a branch
    point as well.  Points are sorted lexicographically by (Re, Im) unless
    ``sort=False``.
    """

    branch_points: tuple
    separation: float = 1e-8
    sort: bool = True

    def __post_init__(self):
        pts = [complex(e) for e in self.branch_points]
        if self.sort:
            pts = sorted(pts, key=_sort_key)
        n = len(pts)
        if n < 3:
            raise DegenerateCurve("need at least 3 finite branch points")
        arr = np.array(pts)
        d = np.abs(arr[:, None] - arr[None, :])
        np.fill_diagonal(d, np.inf)
        if np.min(d) <= self.separation:
            raise NearSingularConfiguration(
                "branch points closer than %.1e; use a degeneration family" % self.separation
            )
        object.__setattr__(self, "branch_points", tuple(pts))

    @cached_property
    def e(self):
        a = np.array(self.branch_points)
        a.setflags(write=False)
        return a

    @property
    def n(self):
        return len(self.branch_points)

    @property
    def g(self):
        return (self.n - 1) // 2

    @property
    def infinity_is_branch(self):
        return self.n % 2 == 1

    @cached_property
    def min_separation(self):
        d = np.abs(self.e[:, None] - self.e[None, :])
        np.fill_diagonal(d, np.inf)
        return float(np.min(d))

    def y2(self, x):
        x = np.asarray(x, dtype=complex)
        return np.prod(x[..., None] - self.e, axis=-1)

    def y_ref(self, x):
        """Reference branch: principal square root of y^2."""
        return np.sqrt(self.y2(x))

    def point(self, x, sheet=1):
        x = complex(x)
        return SurfacePoint(x, complex(sheet * self.y_ref(x)), "regular")

    def branch_point(self, i):
        return SurfacePoint(self.branch_points[i], 0j, "branch", i)

    def infinity(self, sheet=1):
        if self.infinity_is_branch:
            return SurfacePoint(complex("inf"), 0j, "infinity", None)
        return SurfacePoint(complex("inf"), complex(sheet), "infinity", sheet)

    def nearest_branch_distance(self, x):
        x = np.asarray(x, dtype=complex)
        return np.min(np.abs(x[..., None] - self.e), axis=-1)

    def to_json(self):
        return {"branch_points": [[e.real, e.imag] for e in self.branch_points]}


def load_curve(path_or_dict):
    """Read the JSON curve format ``{"branch_points": [[re, im], ...]}``."""
    if isinstance(path_or_dict, dict):
        data = path_or_dict
    else:
        with open(path_or_dict) as fh:
            data = json.load(fh)
    pts = [complex(re, im) for re, im in data["branch_points"]]
    marking = data.get("marking")
    curve = HyperellipticCurve(tuple(pts), sort=marking is None or marking.get("sort", True))
    if marking is not None and "a" in marking:
        marking = HomologyMarking(np.array(marking["a"]), np.array(marking["b"]))
    else:
        marking = None
    return curve, marking


@dataclass(frozen=True, eq=False)
class SurfacePoint:
    """Point of the curve with an explicit y value.

    ``kind`` is 'regular', 'branch' (finite Weierstrass point, index in
    ``tag``) or 'infinity' (``tag`` = sheet sign, or None when infinity is
    a branch point).
    """

    x: complex
    y: complex
    kind: str = "regular"
    tag: object = None

    @property
    def sheet_swapped(self):
        if self.kind == "regular":
            return SurfacePoint(self.x, -self.y, "regular")
        if self.kind == "infinity" and self.tag is not None:
            return SurfacePoint(self.x, -self.y, "infinity", -self.tag)
        return self


# -- analytic continuation of y -------------------------------------------------


def _factor_roots(e, x0, x1, u, exclude=()):
    """prod_i f_i(u) with f_i^2 proportional to (x(u) - e_i), continuous in u.

    x(u) = x0 + u (x1 - x0).  Each factor stays in a half plane where the
    principal root is continuous, so the product is analytic along the
    segment; a global constant remains and is fixed by the caller.
    """
    d = x1 - x0
    u = np.asarray(u, dtype=float)
    out = np.ones(u.shape, dtype=complex)
    for i, ei in enumerate(e):
        if i in exclude:
            continue
        ui = (ei - x0) / d
        if abs(ui) < 1e-12:
            ui = 0j
        elif abs(ui - 1) < 1e-12:
            ui = 1 + 0j
        if ui.real <= 0.0:
            out *= np.sqrt(u - ui)
        elif ui.real >= 1.0:
            out *= np.sqrt(ui - u)
        else:
            if abs(ui.imag) < 1e-14:
                raise PathThroughBranchPoint("segment passes through branch point %r" % ei)
            out *= np.sqrt(u - ui)
    return out


def segment_y(curve, x0, x1, u, ref_u, ref_y):
    """y along x0 + u (x1 - x0), continued from y(ref_u) = ref_y."""
    F = _factor_roots(curve.e, x0, x1, u)
    Fr = _factor_roots(curve.e, x0, x1, np.array([ref_u]))[0]
    return F * (ref_y / Fr)


def _continue_sqrt(w2, start):
    """Continuous square root of the samples ``w2`` starting near ``start``."""
    r = np.sqrt(w2)
    ratio = r[1:] * np.conj(r[:-1])
    flips = np.concatenate([[1.0], np.where(ratio.real < 0, -1.0, 1.0)])
    r = r * np.cumprod(flips)
    if (r[0] * np.conj(start)).real < 0:
        r = -r
    return r


# -- loops ---------------------------------------------------------------------


class PairLoop:
    """Ellipse around the pair (e_k, e_{k+1}) lifted to one sheet.

    Parameters
    ----------
    curve : HyperellipticCurve
    k : int
        Zero-based index of the first focus.
    avoid : sequence of complex
        Extra points that must stay outside the ellipse (zeros of a
        differential, for instance).
    sheet : {+1, -1}
        Lift whose value at the top vertex continues sheet * i s h(m),
        where h is the principal root of prod_{j != k, k+1} (m - e_j).
    """

    RHO_CAP = 1.2

    def __init__(self, curve, k, avoid=(), sheet=1, rho=None):
        self.curve = curve
        self.k = k
        self.sheet = sheet
        e = curve.e
        self.f0, self.f1 = e[k], e[k + 1]
        self.m = 0.5 * (self.f0 + self.f1)
        self.s = 0.5 * (self.f1 - self.f0)
        self.others = np.array([e[j] for j in range(curve.n) if j not in (k, k + 1)])
        self.avoid = np.array(list(avoid), dtype=complex)
        pts = np.concatenate([self.others, self.avoid])
        if rho is None:
            rho_p = np.real(np.arccosh((pts - self.m) / self.s)) if len(pts) else np.array([np.inf])
            rho = min(self.RHO_CAP, 0.5 * float(np.min(np.abs(rho_p))))
        self.rho = rho
        if not rho > 1e-9:
            raise NearSingularConfiguration("no room for a loop around pair %d" % k)
        self._cache = {}

    def with_sheet(self, sheet):
        return PairLoop(self.curve, self.k, self.avoid, sheet, self.rho)

    def h2(self, x):
        x = np.asarray(x, dtype=complex)
        return np.prod(x[..., None] - self.others, axis=-1) if len(self.others) else np.ones_like(x)

    @cached_property
    def _h_top(self):
        # continue h from the centre to the top vertex along the minor axis
        r = np.linspace(0.0, self.rho, 257)
        xs = self.m + 1j * self.s * np.sinh(r)
        h = _continue_sqrt(self.h2(xs), np.sqrt(self.h2(np.array([self.m])))[0])
        return h[-1]

    @cached_property
    def _aux_theta(self):
        """Uniform grid refined geometrically near both vertices."""
        base = 0.5 * np.pi + 2 * np.pi * np.arange(1024) / 1024
        off = self.rho * np.geomspace(0.02, max(0.05, 0.6 / self.rho), 80)
        extra = [np.pi + off, np.pi - off, 2 * np.pi + off, 2 * np.pi - off, [np.pi, 2 * np.pi]]
        th = np.unique(np.concatenate([base] + [np.asarray(e) for e in extra]))
        return th[(th >= 0.5 * np.pi) & (th < 2.5 * np.pi)]

    def lift(self, th):
        """x, y on the loop at angles th in [pi/2, 5 pi/2)."""
        th = np.asarray(th, dtype=float)
        aux = self._aux_theta
        allt = np.concatenate([aux, th])
        order = np.argsort(allt, kind="stable")
        xs = self.m + self.s * np.cosh(self.rho + 1j * allt[order])
        h_sorted = _continue_sqrt(self.h2(xs), self._h_top)
        h = np.empty_like(h_sorted)
        h[order] = h_sorted
        h = h[len(aux):]
        w = self.rho + 1j * th
        # at theta = pi/2 this is i s cosh(rho) h_top, continuing i s h(m)
        return self.m + self.s * np.cosh(w), self.sheet * self.s * np.sinh(w) * h

    def nodes(self, N):
        """Return x, y and trapezoid weights dx for N nodes (theta from pi/2)."""
        if N in self._cache:
            return self._cache[N]
        th = 0.5 * np.pi + 2 * np.pi * np.arange(N) / N
        x, y = self.lift(th)
        dx = 1j * self.s * np.sinh(self.rho + 1j * th) * (2 * np.pi / N)
        out = (x, y, dx)
        self._cache[N] = out
        return out

    @property
    def n_start(self):
        n = int(2 ** np.ceil(np.log2(max(32.0, 12.0 / self.rho))))
        return n

    def integrate(self, f, rtol=1e-13, atol=0.0, n_max=2 ** 16, return_n=False):
        """Adaptive trapezoid integral of f(x, y) dx; f returns (..., N) arrays."""
        N = self.n_start
        x, y, dx = self.nodes(N)
        prev = np.sum(f(x, y) * dx, axis=-1)
        while True:
            N *= 2
            if N > n_max:
                raise QuadratureNonConvergence("loop %d did not converge" % self.k)
            x, y, dx = self.nodes(N)
            cur = np.sum(f(x, y) * dx, axis=-1)
            err = np.max(np.abs(cur - prev))
            if err <= max(atol, rtol * np.max(np.abs(cur))):
                return (cur, N) if return_n else cur
            prev = cur

    def polygon(self):
        return self.lift(self._aux_theta)


def _lift_crossings(xp, yp, xq, yq):
    """Signed intersection number of two closed lifted polygons."""
    p0, p1 = xp, np.roll(xp, -1)
    q0, q1 = xq, np.roll(xq, -1)
    dp = (p1 - p0)[:, None]
    dq = (q1 - q0)[None, :]
    r = q0[None, :] - p0[:, None]
    den = (np.conj(dp) * dq).imag
    with np.errstate(divide="ignore", invalid="ignore"):
        u = (np.conj(r) * dq).imag / den
        v = (np.conj(r) * dp).imag / den
    hit = (u >= 0) & (u < 1) & (v >= 0) & (v < 1) & (den != 0)
    total = 0
    for i, j in zip(*np.nonzero(hit)):
        ya = yp[i] + u[i, j] * (yp[(i + 1) % len(yp)] - yp[i])
        yb = yq[j] + v[i, j] * (yq[(j + 1) % len(yq)] - yq[j])
        if abs(ya - yb) < abs(ya + yb):
            total += int(np.sign(den[i, j]))
    return total


# -- markings --------------------------------------------------------------------


def _jmat(g):
    z = np.zeros((g, g), dtype=np.int64)
    i = np.eye(g, dtype=np.int64)
    return np.block([[z, i], [-i, z]])


@dataclass(frozen=True, eq=False)
class HomologyMarking:
    """Symplectic basis as integer combinations of the pair loops c_k.

    ``a[j]`` and ``b[j]`` are coefficient vectors over (c_1, ..., c_K).
    """

    a: np.ndarray
    b: np.ndarray
    intersection_matrix: np.ndarray = None

    def __post_init__(self):
        object.__setattr__(self, "a", np.atleast_2d(np.asarray(self.a, dtype=np.int64)))
        object.__setattr__(self, "b", np.atleast_2d(np.asarray(self.b, dtype=np.int64)))

    @property
    def g(self):
        return self.a.shape[0]

    @property
    def cycles(self):
        return np.vstack([self.a, self.b])

    def with_intersections(self, cmat):
        C = self.cycles
        I = C @ cmat @ C.T
        return HomologyMarking(self.a, self.b, I)

    def transformed(self, sigma):
        """Marking a' = s11 a + s12 b, b' = s21 a + s22 b."""
        a2 = sigma.s11 @ self.a + sigma.s12 @ self.b
        b2 = sigma.s21 @ self.a + sigma.s22 @ self.b
        return HomologyMarking(a2, b2)

    def describe(self):
        def one(v):
            return " + ".join("%d*c%d" % (c, k + 1) for k, c in enumerate(v) if c)

        return {"a": [one(v) for v in self.a], "b": [one(v) for v in self.b]}

    def to_json(self):
        return {"a": self.a.tolist(), "b": self.b.tolist()}


def standard_marking(curve):
    """a_j = c_{2j-1}, b_j = c_{2j} + c_{2j+2} + ... + c_{2g}."""
    g = curve.g
    K = curve.n - 1
    a = np.zeros((g, K), dtype=np.int64)
    b = np.zeros((g, K), dtype=np.int64)
    for j in range(g):
        a[j, 2 * j] = 1
        for k in range(j, g):
            b[j, 2 * k + 1] = 1
    return HomologyMarking(a, b)


def symplectic_reduction(cmat, a_first, candidates=None):
    """Symplectic basis from the loop intersection matrix.

    Parameters
    ----------
    cmat : (K, K) int array
        Intersection numbers of the pair loops.
    a_first : list of int
        Loop indices (zero based) to use, in order, as a-cycles where
        possible.
    candidates : list of int, optional
        Priority order of loops used for b-cycle partners.

    Returns
    -------
    HomologyMarking
    """
    K = cmat.shape[0]
    g = K // 2
    vecs = [np.eye(K, dtype=np.int64)[k] for k in range(K)]
    order = list(candidates) if candidates is not None else list(range(K))
    pool = {k: vecs[k].copy() for k in range(K)}
    A, B = [], []

    def ip(u, v):
        return int(u @ cmat @ v)

    pending = list(a_first) + [k for k in order if k not in a_first]
    while len(A) < g:
        found = False
        for ka in pending:
            if ka not in pool or not np.any(pool[ka]):
                continue
            av = pool[ka]
            for kb in order:
                if kb == ka or kb not in pool:
                    continue
                s = ip(av, pool[kb])
                if abs(s) == 1:
                    bv = s * pool[kb]
                    del pool[ka]
                    del pool[kb]
                    for k in list(pool):
                        x = pool[k]
                        pool[k] = x - ip(x, bv) * av + ip(x, av) * bv
                    A.append(av)
                    B.append(bv)
                    found = True
                    break
            if found:
                break
        if not found:
            raise NotSymplecticMarking("symplectic reduction failed")
    return HomologyMarking(np.array(A), np.array(B))


@dataclass(frozen=True, eq=False)
class DifferentialBasis:
    """v_i = sum_k N[i, k] x^{k-1} dx / y, normalised on the a-cycles."""

    N: np.ndarray

    @property
    def g(self):
        return self.N.shape[0]

    def mu(self, x, y):
        """Holomorphic basis mu_k / dx at (x, y); shape (..., g)."""
        x = np.asarray(x, dtype=complex)
        return (x[..., None] ** np.arange(self.g)) / np.asarray(y)[..., None]

    def values(self, x, y):
        """v_i / dx at (x, y); shape (..., g)."""
        return self.mu(x, y) @ self.N.T


# -- the surface object ------------------------------------------------------------


class Surface:
    """Curve together with a marking and cached loop data.

    Parameters
    ----------
    curve : HyperellipticCurve
    marking : HomologyMarking, optional
        Defaults to :func:`standard_marking`.
    avoid : sequence of complex
        Points the loops must keep outside.
    quad_tol : float
        Relative tolerance of loop quadrature.
    """

    def __init__(self, curve, marking=None, avoid=(), quad_tol=1e-13):
        if curve.min_separation <= curve.separation:
            raise NearSingularConfiguration("branch points too close")
        self.curve = curve
        self.quad_tol = quad_tol
        self.avoid = tuple(complex(a) for a in avoid)
        self.loops = self._build_loops()
        self.cmat = self._loop_intersections()
        mk = standard_marking(curve) if marking is None else marking
        self.marking = mk.with_intersections(self.cmat)
        if not np.array_equal(self.marking.intersection_matrix, _jmat(curve.g)):
            raise NotSymplecticMarking(
                "intersection matrix is\n%s" % self.marking.intersection_matrix
            )
        self._sb_cache = {}

    @property
    def g(self):
        return self.curve.g

    def _build_loops(self):
        c = self.curve
        loops = [PairLoop(c, 0, self.avoid, 1)]
        for k in range(1, c.n - 1):
            lp = PairLoop(c, k, self.avoid, 1)
            xp, yp = loops[-1].polygon()
            xq, yq = lp.polygon()
            s = _lift_crossings(xp, yp, xq, yq)
            if s == 0:
                raise NotSymplecticMarking("loops %d and %d do not meet on a sheet" % (k, k + 1))
            if s < 0:
                lp = lp.with_sheet(-1)
            loops.append(lp)
        return loops

    def _loop_intersections(self):
        K = len(self.loops)
        polys = [lp.polygon() for lp in self.loops]
        C = np.zeros((K, K), dtype=np.int64)
        for i in range(K):
            for j in range(i + 1, K):
                s = _lift_crossings(*polys[i], *polys[j])
                C[i, j], C[j, i] = s, -s
        return C

    def with_marking(self, marking):
        s = Surface.__new__(Surface)
        s.__dict__.update({k: v for k, v in self.__dict__.items() if k not in ("marking", "_sb_cache")})
        s.marking = marking.with_intersections(self.cmat)
        if not np.array_equal(s.marking.intersection_matrix, _jmat(self.g)):
            raise NotSymplecticMarking("intersection matrix is\n%s" % s.marking.intersection_matrix)
        s._sb_cache = {}
        for key in ("A", "B", "period_matrix", "basis", "used_loops", "loop_periods"):
            s.__dict__.pop(key, None)
        return s

    def loop_integrals(self, f, rtol=None):
        """Integrals of f(x, y) dx over every pair loop, shape (K, ...)."""
        rtol = self.quad_tol if rtol is None else rtol
        return np.array([lp.integrate(f, rtol=rtol) for lp in self.loops])

    @cached_property
    def used_loops(self):
        return [k for k in range(len(self.loops)) if np.any(self.marking.cycles[:, k] != 0)]

    @cached_property
    def loop_periods(self):
        """Periods of mu_1..mu_g over the loops used by the marking (others 0)."""
        g = self.g
        out = np.zeros((len(self.loops), g), dtype=complex)
        for k in self.used_loops:
            out[k] = self.loops[k].integrate(lambda x, y: (x[None, :] ** np.arange(g)[:, None]) / y[None, :],
                                             rtol=self.quad_tol)
        return out

    @cached_property
    def A(self):
        return self.marking.a @ self.loop_periods

    @cached_property
    def B(self):
        return self.marking.b @ self.loop_periods

    @cached_property
    def basis(self):
        return DifferentialBasis(np.linalg.inv(self.A).T)

    @cached_property
    def period_matrix(self):
        om = self.basis.N @ self.B.T
        defect = float(np.max(np.abs(om - om.T)))
        self.symmetry_defect = defect
        return PeriodMatrix(om, tolerance=max(10 * defect, 1e-12) if defect < 1e-6 else defect / 2)

    @property
    def Omega(self):
        return self.period_matrix.Omega

    def cycle_integral(self, coeffs, f, rtol=None):
        """Integral of f(x, y) dx over sum_k coeffs[k] c_k."""
        rtol = self.quad_tol if rtol is None else rtol
        tot = 0.0
        for k, c in enumerate(coeffs):
            if c:
                tot = tot + c * self.loops[k].integrate(f, rtol=rtol)
        return tot

    def uncovered_branch_points(self):
        """Branch points that are foci of no pair loop used by the marking."""
        used = np.any(self.marking.cycles != 0, axis=0)
        cover = set()
        for k, u in enumerate(used):
            if u:
                cover.update((k, k + 1))
        return [i for i in range(self.curve.n) if i not in cover]


def period_matrix(curve, marking=None, quad_tol=1e-13):
    """Return (A, B, Omega) for ``curve`` in ``marking``."""
    S = Surface(curve, marking, quad_tol=quad_tol)
    return S.A, S.B, S.period_matrix


# -- paths and the Abel map ------------------------------------------------------


def _segment_integral(curve, f, x0, x1, kind0, kind1, ref, rtol=1e-12):
    """Integral of f(x, y) dx along a straight segment.

    ``kind0``/``kind1`` flag branch point endpoints, which get a square
    root substitution; ``ref`` = (u, y) fixes the sheet.
    """
    d = x1 - x0
    ur, yr = ref

    if kind0 and kind1:
        def xu(t):
            return np.sin(t) ** 2, 2 * np.sin(t) * np.cos(t)
        span = (0.0, 0.5 * np.pi)
    elif kind0:
        def xu(t):
            return t * t, 2 * t
        span = (0.0, 1.0)
    elif kind1:
        def xu(t):
            return 1 - t * t, -2 * t
        span = (1.0, 0.0)
    else:
        def xu(t):
            return t, np.ones_like(t)
        span = (0.0, 1.0)

    def integrand(t):
        u, du = xu(np.atleast_1d(t))
        u = np.clip(u, 0.0, 1.0)
        x = x0 + u * d
        y = segment_y(curve, x0, x1, u, ur, yr)
        return f(x, y)[..., 0] * d * du[0]

    val, err = integrate.quad_vec(integrand, span[0], span[1], epsabs=0, epsrel=rtol, limit=400)
    return val


@dataclass(frozen=True)
class AbelResult:
    value: np.ndarray
    lattice: np.ndarray  # columns generate Z^g + Omega Z^g
    path: tuple


def _y_at_end(curve, x0, x1, ref):
    return segment_y(curve, x0, x1, np.array([1.0]), *ref)[0]


def abel_map(surface, p, q, via=None, rtol=1e-12):
    """Integral of the normalised differentials from q to p.

    Parameters
    ----------
    surface : Surface
    p, q : SurfacePoint
        Finite points (regular or branch).
    via : int, optional
        Branch point index to route through.  When omitted a straight
        segment is used if it lands on the sheet of ``p``, otherwise the
        path is routed through the branch point minimising the length.

    Returns
    -------
    AbelResult
        The value for the chosen path and the lattice generators.
    """
    curve = surface.curve
    basis = surface.basis
    lattice = np.hstack([np.eye(surface.g), surface.Omega])

    def f(x, y):
        return basis.values(x, y).T

    if p.x == q.x and p.y == q.y:
        return AbelResult(np.zeros(surface.g, dtype=complex), lattice, ())
    if via is None:
        if p.kind == "regular" and q.kind == "regular":
            yend = _y_at_end(curve, q.x, p.x, (0.0, q.y))
            if abs(yend - p.y) < abs(yend + p.y):
                v = _segment_integral(curve, f, q.x, p.x, False, False, (0.0, q.y), rtol)
                return AbelResult(v, lattice, (q.x, p.x))
        elif p.kind == "branch" and q.kind == "branch":
            raise SheetDiscontinuity("branch-to-branch paths need an explicit sheet; use abel_branch")
        else:
            if q.kind == "branch":
                v = _segment_integral(curve, f, q.x, p.x, True, False, (1.0, p.y), rtol)
            else:
                v = _segment_integral(curve, f, q.x, p.x, False, True, (0.0, q.y), rtol)
            return AbelResult(v, lattice, (q.x, p.x))
        cand = [i for i in range(curve.n)]
        lengths = [abs(q.x - curve.e[i]) + abs(curve.e[i] - p.x) for i in cand]
        via = cand[int(np.argmin(lengths))]
    e = curve.branch_point(via)
    v1 = abel_map(surface, e, q, rtol=rtol).value
    v2 = abel_map(surface, p, e, rtol=rtol).value
    return AbelResult(v1 + v2, lattice, (q.x, e.x, p.x))


def abel_branch(surface, i, j, sheet=1, rtol=1e-12):
    """Integral of v from e_j to e_i along the straight segment.

    ``sheet`` selects y at the midpoint as sheet * y_ref(midpoint).
    """
    curve = surface.curve
    basis = surface.basis
    x0, x1 = curve.e[j], curve.e[i]
    ym = sheet * curve.y_ref(0.5 * (x0 + x1))
    return _segment_integral(curve, lambda x, y: basis.values(x, y).T, x0, x1, True, True, (0.5, ym), rtol)


def differential_value(curve, basis, i, p, chart="x"):
    """v_i / d zeta at p in the local parameter ``chart``.

    Charts: 'x' (x - x0 at a regular point), 'sqrt' (sqrt(x - e) at a
    finite branch point, with the branch fixed by p.y / sqrt(x - e) -> h),
    'inf' (1/x at infinity for an even count, 1/sqrt(x) for an odd count).
    For 'sqrt' the returned value corresponds to the branch of zeta for
    which y = zeta * h(x) with h the principal root of prod_{j != i}(e - e_j).
    """
    N = basis.N
    g = N.shape[0]
    if chart == "x":
        if p.kind != "regular":
            raise ChartMismatch("chart x needs a regular point")
        return complex(basis.values(p.x, p.y)[i])
    if chart == "sqrt":
        if p.kind != "branch":
            raise ChartMismatch("chart sqrt needs a finite branch point")
        e = curve.e
        k = p.tag
        h = np.sqrt(np.prod([e[k] - e[j] for j in range(curve.n) if j != k]))
        poly = np.sum(N[i] * e[k] ** np.arange(g))
        return complex(2 * poly / h)
    if chart == "inf":
        if p.kind != "infinity":
            raise ChartMismatch("chart inf needs the point at infinity")
        if curve.infinity_is_branch:
            return complex(-2 * N[i, g - 1])
        return complex(-N[i, g - 1] * p.tag)
    raise ChartMismatch("unknown chart %r" % chart)
