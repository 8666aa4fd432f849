"""
Bergman bidifferential, projective connections and the tau one-form.

The bidifferential is represented through an odd non-singular theta
characteristic delta,

    B(x, y) = d_x d_y log theta[delta](A(x) - A(y)),

and S_B(x) is six times the constant term of B(x, y) - dz(x)dz(y)/(z(x)-z(y))^2
on the diagonal. It is read off from a circle stencil around x: the mean
over K equispaced points kills all Taylor terms except multiples of K.
Any non-singular delta gives the same B.  For each point we pick the one
whose spinor is largest there, which keeps theta[delta] away from its
extra zeros.

For a holomorphic differential omega = P(x) dx / y the Schwarzian of the
abelian integral is exact in the x chart:

    L = P'/P - (1/2) sum 1/(x - e_i),   S_omega = L' - L^2 / 2.

The quadratic differential Q = (S_B - S_omega)/omega is integrated over
the dual cycles s_k to give the coefficients of d log tau.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ContourHitsPole, SpinTauError
from .spin import Differential, HomologicalCoords, homological_coordinates
from .theta import theta_batch
from .spin import enumerate_characteristics

__all__ = [
    "BergmanKernel",
    "ProjectiveConnectionSample",
    "TauLogDerivative",
    "bidifferential",
    "bergman_projective_connection",
    "schwarzian_exact",
    "schwarzian_of_differential",
    "cycle_integrals",
    "rbr_identity",
    "rbr_rhs",
    "dlogtau",
    "integrate_dlogtau",
    "tau_scaling_exponent",
    "SingularDeltaCharacteristic",
    "CoincidentPoints",
    "ZeroOfOmegaAtPoint",
    "PoorFit",
    "StencilCrossesCut",
    "ResidueFitFailure",
    "PathLeavesStratum",
    "StepEstimateDiverges",
]


class SingularDeltaCharacteristic(SpinTauError, ValueError):
    pass


class CoincidentPoints(SpinTauError, ValueError):
    pass


class ZeroOfOmegaAtPoint(SpinTauError, ValueError):
    pass


class PoorFit(SpinTauError, RuntimeError):
    pass


class StencilCrossesCut(SpinTauError, ValueError):
    pass


class ResidueFitFailure(SpinTauError, RuntimeError):
    pass


class PathLeavesStratum(SpinTauError, ValueError):
    pass


class StepEstimateDiverges(SpinTauError, RuntimeError):
    pass


_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)
_GL_X = 0.5 * (_GL_X + 1)
_GL_W = 0.5 * _GL_W

# rounding in B grows like eps / r^3, truncation like (r/d)^K
STENCIL_POINTS = 16
STENCIL_FRACTION = 0.2


@dataclass
class ProjectiveConnectionSample:
    point: object
    chart: str
    value: complex
    fit_residual: float


@dataclass
class TauLogDerivative:
    """Coefficients of d log tau in the homological coordinates."""

    coefficients: np.ndarray
    integrals: np.ndarray
    labels: list


def _continue_near(curve, pts, y0):
    """y at points close to a regular point with value y0 (sign by proximity)."""
    r = np.sqrt(curve.y2(pts))
    flip = (r * np.conj(y0)).real < 0
    return np.where(flip, -r, r)


class BergmanKernel:
    """Bidifferential and projective connection on a marked surface."""

    def __init__(self, surface, tol=1e-12, threshold=1e-6):
        self.surface = surface
        self.tol = tol
        P = surface.period_matrix
        g = surface.g
        self.deltas = []
        for eta in enumerate_characteristics(g, 1):
            vals, _ = theta_batch(eta, P, np.zeros((1, g)), tol, order=1)
            c = vals[1][0]
            if np.linalg.norm(c) > threshold:
                self.deltas.append((eta, c))
        if not self.deltas:
            raise SingularDeltaCharacteristic("every odd characteristic is singular")
        self.delta = self.deltas[0][0]
        self._cache = {}
        self.noise_notes = []

    # -- core evaluation -------------------------------------------------------

    def _pick_delta(self, V):
        """Index of the delta maximising |h_delta| / |c| at each row of V."""
        scores = np.array([np.abs(V @ c) / np.linalg.norm(c) for _, c in self.deltas])
        return np.argmax(scores, axis=0)

    def _log_hessian(self, Z, choice):
        """d_i d_j log theta[delta](Z) with delta chosen per row."""
        M, g = Z.shape
        H = np.empty((M, g, g), dtype=complex)
        P = self.surface.period_matrix
        for k in np.unique(choice):
            rows = np.nonzero(choice == k)[0]
            vals, _ = theta_batch(self.deltas[k][0], P, Z[rows], self.tol, order=2)
            th, gr, he = vals
            H[rows] = he / th[:, None, None] - gr[:, :, None] * gr[:, None, :] / (th * th)[:, None, None]
        return H

    def _stencil(self, x, yx, radius, K=None, phase=0.1):
        """Stencil points y_k, their y values and Abel differences A(x)-A(y_k)."""
        basis = self.surface.basis
        curve = self.surface.curve
        K = STENCIL_POINTS if K is None else K
        phi = phase + 2 * np.pi * np.arange(K) / K
        Y = x[:, None] + radius[:, None] * np.exp(1j * phi)[None, :]
        # quadrature nodes on the segments x -> y_k
        nodes = x[:, None, None] + (Y - x[:, None])[:, :, None] * _GL_X[None, None, :]
        ynodes = _continue_near(curve, nodes, yx[:, None, None])
        vn = basis.values(nodes, ynodes)
        Z = -np.einsum("mkl,mklg->mkg", (Y - x[:, None])[:, :, None] * _GL_W[None, None, :], vn)
        yY = _continue_near(curve, Y, yx[:, None])
        return Y, yY, Z

    def _constant_term(self, x, yx, radius):
        basis = self.surface.basis
        Y, yY, Z = self._stencil(x, yx, radius)
        M, K = Y.shape
        Vx = basis.values(x, yx)
        VY = basis.values(Y, yY)
        choice = np.repeat(self._pick_delta(Vx), K)
        g = Z.shape[2]
        H = self._log_hessian(Z.reshape(M * K, g), choice).reshape(M, K, g, g)
        B = -np.einsum("mi,mkij,mkj->mk", Vx, H, VY)
        f = B - 1.0 / (x[:, None] - Y) ** 2
        return np.mean(f, axis=1)

    def projective_connection(self, x, yx):
        """S_B in the x chart at regular points; returns (values, residuals)."""
        x = np.atleast_1d(np.asarray(x, dtype=complex))
        yx = np.atleast_1d(np.asarray(yx, dtype=complex))
        d = self.surface.curve.nearest_branch_distance(x)
        r = STENCIL_FRACTION * d
        m1 = self._constant_term(x, yx, r)
        m2 = self._constant_term(x, yx, 0.5 * r)
        K = STENCIL_POINTS
        rich = (2.0 ** K * m2 - m1) / (2.0 ** K - 1)
        return 6 * rich, 6 * np.abs(m2 - m1)

    def bidifferential(self, p, q, via=None):
        """B(p, q) in the x charts of two regular points."""
        from .surface import abel_map

        if abs(p.x - q.x) == 0 and p.y == q.y:
            raise CoincidentPoints("B has a pole on the diagonal")
        z = abel_map(self.surface, p, q, via=via).value
        basis = self.surface.basis
        Vp = basis.values(np.array([p.x]), np.array([p.y]))
        Vq = basis.values(np.array([q.x]), np.array([q.y]))
        choice = self._pick_delta(Vp)
        H = self._log_hessian(z[None, :], choice)
        return complex(-(Vp @ H[0] @ Vq.T)[0, 0])

    # -- loop data ---------------------------------------------------------------

    def loop_samples(self, k, N):
        """Nodes of loop k with S_B values (cached)."""
        key = (k, N)
        if key not in self._cache:
            lp = self.surface.loops[k]
            x, y, dx = lp.nodes(N)
            sb, res = self.projective_connection(x, y)
            self._cache[key] = (x, y, dx, sb, res)
        return self._cache[key]


def bidifferential(surface, p, q, tol=1e-12):
    """B(p, q) for regular points, in the x charts."""
    return BergmanKernel(surface, tol).bidifferential(p, q)


def bergman_projective_connection(kernel, p, chart="x", tol=1e-7):
    """Projective connection at a point in the x chart or a sqrt chart.

    ``chart`` is 'x' or ('sqrt', i) for zeta = sqrt(x - e_i), in which case
    the value is transported by the Schwarzian cocycle.
    """
    sb, res = kernel.projective_connection(np.array([p.x]), np.array([p.y]))
    sb, res = complex(sb[0]), float(res[0])
    if res > tol * max(1.0, abs(sb)):
        raise PoorFit("stencil residual %.2e" % res)
    if chart == "x":
        return ProjectiveConnectionSample(p, "x", sb, res)
    if isinstance(chart, tuple) and chart[0] == "sqrt":
        e = kernel.surface.curve.e[chart[1]]
        zeta = np.sqrt(p.x - e)
        # S^zeta = S^x (dx/dzeta)^2 + {x, zeta}, x = e + zeta^2
        val = sb * (2 * zeta) ** 2 - 1.5 / zeta**2
        return ProjectiveConnectionSample(p, "sqrt(x-e_%d)" % (chart[1] + 1), complex(val), res)
    raise StencilCrossesCut("unknown chart %r" % (chart,))


# -- Schwarzian --------------------------------------------------------------------


def schwarzian_exact(diff, x):
    """S_omega in the x chart for omega = P(x) dx / y."""
    e = diff.surface.curve.e
    x = np.asarray(x, dtype=complex)
    P, P1, P2 = diff.dlog_terms(x)
    if np.any(P == 0):
        raise ZeroOfOmegaAtPoint("omega vanishes at the sample point")
    inv = 1.0 / (x[..., None] - e)
    L = P1 / P - 0.5 * np.sum(inv, axis=-1)
    L1 = P2 / P - (P1 / P) ** 2 + 0.5 * np.sum(inv * inv, axis=-1)
    return L1 - 0.5 * L * L


def schwarzian_of_differential(omega, center, radius=None, n=32):
    """Schwarzian w''/w - (3/2)(w'/w)^2 of a chart expression w of omega.

    Parameters
    ----------
    omega : callable or array_like
        Either a function of the chart variable or the samples
        omega(center + radius * exp(2 pi i k / n)), k = 0..n-1.
    center : complex
    radius : float
        Circle radius, required with samples; defaults to 1e-2 otherwise.
    """
    if callable(omega):
        radius = 1e-2 if radius is None else radius
        pts = center + radius * np.exp(2j * np.pi * np.arange(n) / n)
        samples = np.asarray(omega(pts), dtype=complex)
    else:
        samples = np.asarray(omega, dtype=complex)
        n = len(samples)
        if radius is None:
            raise ValueError("radius is required with samples")
    c = np.fft.fft(samples) / n
    w0, w1, w2 = c[0], c[1] / radius, 2 * c[2] / radius**2
    if abs(w0) < 1e-300:
        raise ZeroOfOmegaAtPoint("omega vanishes at the centre")
    return complex(w2 / w0 - 1.5 * (w1 / w0) ** 2)


# -- cycle integrals and the one-form --------------------------------------------


def _check_poles(diff, k):
    lp = diff.surface.loops[k]
    for q, _ in diff.zeros:
        if q.kind != "regular":
            continue
        rho = np.real(np.arccosh((q.x - lp.m) / lp.s))
        if abs(rho) < 1.05 * lp.rho:
            raise ContourHitsPole("zero at x=%s lies within loop %d" % (q.x, k + 1))


def loop_q_integral(kernel, diff, k, rtol=1e-9, n_max=2 ** 14, floor=1e-6):
    """Integral of (S_B - S_omega)/omega over loop k with adaptive doubling.

    Doubling stops at ``rtol``, or once successive differences stop
    shrinking below ``floor`` (relative): the stencil rounding noise of
    S_B then dominates and further doubling cannot help.
    """
    _check_poles(diff, k)
    lp = kernel.surface.loops[k]
    N = lp.n_start
    prev, last = None, None
    while N <= n_max:
        x, y, dx, sb, _ = kernel.loop_samples(k, N)
        q = (sb - schwarzian_exact(diff, x)) / diff.value(x, y)
        cur = np.sum(q * dx)
        if prev is not None:
            delta = abs(cur - prev)
            scale = max(abs(cur), 1e-300)
            if delta <= rtol * scale + 1e-14:
                return cur
            if last is not None and delta >= 0.5 * last and delta <= floor * scale:
                kernel.noise_notes.append((k, N, delta / scale))
                return cur
            last = delta
        prev = cur
        N *= 2
    raise ResidueFitFailure("loop %d integral did not converge" % (k + 1))


def zero_residue(kernel, diff, q, m, n=64):
    """2 pi i Res_q of (S_B - S_omega)/omega (positive circle at the zero)."""
    curve = kernel.surface.curve
    if q.kind == "regular":
        others = [z.x for z, _ in diff.zeros if z.kind != "infinity" and abs(z.x - q.x) > 0]
        dist = min([float(np.min(np.abs(curve.e - q.x)))] + [abs(o - q.x) for o in others])
        r = 0.25 * dist
        turns = 1
    elif q.kind == "branch":
        others = [z.x for z, _ in diff.zeros if z.kind != "infinity" and abs(z.x - q.x) > 0]
        dd = np.abs(curve.e - q.x)
        dd = dd[dd > 0]
        dist = min([float(np.min(dd))] + [abs(o - q.x) for o in others])
        r = 0.25 * dist
        turns = 2
    else:
        raise ResidueFitFailure("residues at infinity are not implemented")
    vals = []
    for npts in (n, 2 * n):
        M = npts * turns
        th = 2 * np.pi * turns * np.arange(M) / M + 0.3
        x = q.x + r * np.exp(1j * th)
        if q.kind == "regular":
            start = q.y
            y = np.empty(M, dtype=complex)
            fine = q.x + r * np.exp(1j * (0.3 + 2 * np.pi * turns * np.arange(8 * M) / (8 * M)))
            from .surface import _continue_sqrt

            seed = _continue_near(curve, np.array([fine[0]]), np.array([start]))[0]
            yf = _continue_sqrt(curve.y2(fine), seed)
            y = yf[::8]
        else:
            from .surface import _continue_sqrt

            fine = q.x + r * np.exp(1j * (0.3 + 2 * np.pi * turns * np.arange(8 * M) / (8 * M)))
            yf = _continue_sqrt(curve.y2(fine), np.sqrt(curve.y2(fine[:1]))[0])
            y = yf[::8]
        sb, _ = kernel.projective_connection(x, y)
        Q = (sb - schwarzian_exact(diff, x)) / diff.value(x, y)
        dx = 1j * (x - q.x) * (2 * np.pi * turns / M)
        vals.append(np.sum(Q * dx))
    if abs(vals[1] - vals[0]) > 1e-6 * max(1.0, abs(vals[1])):
        raise ResidueFitFailure("residue circle not converged")
    return vals[1]


def cycle_integrals(kernel, diff, coords, rtol=1e-9):
    """Integrals of (S_B - S_omega)/omega over the dual cycles s_k.

    Order: s_j = -b_j (j = 1..g), s_{g+j} = a_j, then circles at the
    non-hub zeros in label order.
    """
    S = kernel.surface
    K = len(S.loops)
    per_loop = {}
    for k in range(K):
        if np.any(S.marking.cycles[:, k] != 0):
            per_loop[k] = loop_q_integral(kernel, diff, k, rtol)
    vec = np.array([per_loop.get(k, 0.0) for k in range(K)], dtype=complex)
    Ia = S.marking.a @ vec
    Ib = S.marking.b @ vec
    circles = []
    mult = {id(q): m for q, m in diff.zeros}
    for j, q in enumerate(coords.labels):
        if j == coords.hub:
            continue
        circles.append(zero_residue(kernel, diff, q, mult.get(id(q), 0)))
    return np.concatenate([-Ib, Ia, np.array(circles, dtype=complex)])


def rbr_rhs(multiplicities):
    d = len(multiplicities)
    return -np.pi * 1j * (d + sum(m - 1.0 / (1 + m) for m in multiplicities))


def rbr_identity(diff, coords, integrals):
    """Left side, right side and relative defect of the bilinear identity."""
    lhs = complex(np.sum(coords.z * integrals))
    rhs = complex(rbr_rhs(diff.multiplicities))
    return lhs, rhs, abs(lhs - rhs) / abs(rhs)


def dlogtau(kernel, diff, coords=None, integrals=None):
    """d log tau = -(6 / pi i) sum_k (int_{s_k} Q) dz_k."""
    if coords is None:
        coords = homological_coordinates(diff)
    if integrals is None:
        integrals = cycle_integrals(kernel, diff, coords)
    coef = -(6.0 / (np.pi * 1j)) * integrals
    return TauLogDerivative(coef, integrals, list(coords.dual))


def integrate_dlogtau(rate, t0, t1, steps=8, richardson=True):
    """Delta log tau along a one-parameter path by composite Simpson.

    Parameters
    ----------
    rate : callable
        t -> d log tau / dt along the path.
    t0, t1 : float
    steps : int
        Number of Simpson panels for the coarse estimate (even).

    Returns
    -------
    value : complex
    error : float
        |fine - coarse| / 15 when ``richardson`` is set.
    """
    steps += steps % 2
    cache = {}

    def f(t):
        key = round(t, 15)
        if key not in cache:
            cache[key] = complex(rate(t))
        return cache[key]

    def simpson(n):
        ts = np.linspace(t0, t1, n + 1)
        w = np.ones(n + 1)
        w[1:-1:2] = 4
        w[2:-1:2] = 2
        return (t1 - t0) / (3 * n) * sum(wi * f(ti) for wi, ti in zip(w, ts))

    coarse = simpson(steps)
    if not richardson:
        return coarse, float("nan")
    fine = simpson(2 * steps)
    err = abs(fine - coarse) / 15
    if not np.isfinite(err):
        raise StepEstimateDiverges("non-finite one-form along the path")
    return fine + (fine - coarse) / 15, err


def tau_scaling_exponent(kernel, diff, c1=2.0, steps=4):
    """Homogeneity degree of tau from the path omega -> c omega, c in [1, c1].

    Along the path d log tau / dc = sum_k coef_k(c omega) z_k(omega), so the
    exponent is Delta log tau / log c1.  Returns (exponent, error).
    """
    z = homological_coordinates(diff).z

    def rate(c):
        dc = diff.scaled(c)
        co = homological_coordinates(dc)
        return np.sum(dlogtau(kernel, dc, co).coefficients * z)

    val, err = integrate_dlogtau(rate, 1.0, c1, steps=steps)
    return complex(val / np.log(c1)), float(err / np.log(c1))
