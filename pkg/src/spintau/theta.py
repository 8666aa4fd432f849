"""
Riemann theta functions with half-integer characteristics.

Characteristics are stored interleaved, ``bits = (e1, e2, ..., e_{2g})``.
The odd positions ``top = (e1, e3, ...)`` shift the summation lattice and
the even positions ``bottom = (e2, e4, ...)`` shift the argument::

    theta[e](w, Omega) = sum_n exp(pi i (n + a)^T Omega (n + a)
                                   + 2 pi i (n + a)^T (w + b)),
    a = top / 2,  b = bottom / 2.

With this convention the parity sum(e_{2j-1} e_{2j}) mod 2 is the usual
top . bottom mod 2.

The lattice sum is restricted to an ellipsoid.  Its radius comes from a
Gaussian tail bound that depends only on the smallest eigenvalue of
Im(Omega), so every returned value carries an explicit error bound.
"""

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

import numpy as np
from scipy import integrate, linalg

from .errors import (
    DegenerateImaginaryPart,
    DimensionMismatch,
    NonPositiveTolerance,
    NotSymplectic,
    SingularAutomorphyFactor,
)

__all__ = [
    "Characteristic",
    "PeriodMatrix",
    "ThetaResult",
    "SymplecticMap",
    "parity",
    "truncation_radius",
    "theta",
    "theta_gradient",
    "theta_hessian",
    "theta_batch",
    "symplectic_transform",
    "random_symplectic",
    "DEFAULT_TOL",
    "all_characteristics",
    "transform_characteristic",
]

DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class Characteristic:
    """Half-integer characteristic in interleaved storage order."""

    bits: tuple

    def __post_init__(self):
        bits = tuple(int(b) % 2 for b in self.bits)
        if len(bits) == 0 or len(bits) % 2:
            raise DimensionMismatch("characteristic needs 2g bits, got %d" % len(bits))
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_string(cls, s):
        s = s.replace(",", "").replace(" ", "")
        return cls(tuple(int(c) for c in s))

    @classmethod
    def from_rows(cls, top, bottom):
        bits = []
        for t, b in zip(top, bottom):
            bits += [int(t), int(b)]
        return cls(tuple(bits))

    @property
    def g(self):
        return len(self.bits) // 2

    @property
    def top(self):
        return np.array(self.bits[0::2], dtype=int)

    @property
    def bottom(self):
        return np.array(self.bits[1::2], dtype=int)

    @property
    def parity(self):
        return parity(self)

    def __str__(self):
        return "".join(str(b) for b in self.bits)

    def __add__(self, other):
        """Direct sum, used for block characteristics of reducible limits."""
        return Characteristic(self.bits + other.bits)


def parity(eta):
    """Return 1 for an odd and 0 for an even characteristic."""
    b = eta.bits
    return sum(b[2 * j] * b[2 * j + 1] for j in range(len(b) // 2)) % 2


@dataclass(frozen=True, eq=False)
class PeriodMatrix:
    """Symmetric g x g matrix with positive definite imaginary part."""

    Omega: np.ndarray
    tolerance: float = 1e-10

    def __post_init__(self):
        om = np.atleast_2d(np.asarray(self.Omega, dtype=complex))
        if om.shape[0] != om.shape[1]:
            raise DimensionMismatch("period matrix must be square")
        defect = np.max(np.abs(om - om.T))
        if defect > self.tolerance:
            raise DimensionMismatch("symmetry defect %.3e exceeds %.3e" % (defect, self.tolerance))
        om = 0.5 * (om + om.T)
        om.setflags(write=False)
        object.__setattr__(self, "Omega", om)
        if self.lambda_min <= 0:
            raise DegenerateImaginaryPart("Im(Omega) has eigenvalue %.3e" % self.lambda_min)

    @property
    def g(self):
        return self.Omega.shape[0]

    @cached_property
    def Y(self):
        return self.Omega.imag.copy()

    @cached_property
    def lambda_min(self):
        return float(np.linalg.eigvalsh(self.Y)[0])

    @cached_property
    def cholesky(self):
        """Upper triangular T with Y = T^T T."""
        return linalg.cholesky(self.Y, lower=False)

    @cached_property
    def Yinv(self):
        return linalg.cho_solve((self.cholesky, False), np.eye(self.g))

    def __repr__(self):
        return "PeriodMatrix(%s)" % np.array2string(self.Omega, precision=6)


def _as_period_matrix(Omega):
    if isinstance(Omega, PeriodMatrix):
        return Omega
    return PeriodMatrix(np.asarray(Omega, dtype=complex), tolerance=1e-8)


@dataclass(frozen=True)
class ThetaResult:
    """Value (scalar, vector or matrix) together with a certified bound."""

    value: object
    error_bound: float
    order: int


# -- truncation ---------------------------------------------------------------


def _tail_bound(R, g, rho, tau, mu, quad_exp, N):
    """Bound on sum over lattice points x with |x| > R of f(|x|).

    f(s) = exp(pi quad_exp) (2 pi)^N (tau s + mu)^N exp(-pi s^2); the lattice
    has minimal distance >= rho, so disjoint balls of radius rho/2 give the
    packing estimate  g (2/rho)^g int_{R-rho}^inf f(s) (s + rho/2)^{g-1} ds.
    """
    lo = R - rho

    def f(s):
        return (2 * np.pi) ** N * (tau * s + mu) ** N * np.exp(-np.pi * s * s) * (s + 0.5 * rho) ** (g - 1)

    val, _ = integrate.quad(f, lo, np.inf, epsabs=0.0, epsrel=1e-6, limit=200)
    return g * (2.0 / rho) ** g * val * np.exp(np.pi * quad_exp)


def _radius_from_params(g, rho, tau, mu, quad_exp, N, tol):
    # f must be decreasing beyond R - rho: 2 pi s (tau s + mu) >= N tau
    s_star = 0.0
    if N > 0:
        s_star = (-mu + np.sqrt(mu * mu + 2 * N * tau * tau / np.pi)) / (2 * tau)
    lo = rho + s_star + 1e-12
    if _tail_bound(lo, g, rho, tau, mu, quad_exp, N) <= tol:
        return lo
    hi = lo + 1.0
    while _tail_bound(hi, g, rho, tau, mu, quad_exp, N) > tol:
        hi = lo + 2 * (hi - lo)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _tail_bound(mid, g, rho, tau, mu, quad_exp, N) > tol:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-9 * hi:
            break
    return hi


def _bound_params(P, im_w):
    """Uniform constants over the batch of imaginary parts ``im_w``."""
    g = P.g
    rho = np.sqrt(P.lambda_min)
    tau = float(np.sqrt(1.0 / P.lambda_min))  # ||T^{-1}||_2
    if im_w is None:
        return rho, tau, 0.0, 0.0
    y = np.atleast_2d(np.asarray(im_w, dtype=float)).reshape(-1, g)
    u = y @ P.Yinv
    quad_exp = float(np.max(np.einsum("mi,mi->m", y, u)))
    mu = float(np.max(np.linalg.norm(u, axis=1)))
    return rho, tau, mu, quad_exp


def truncation_radius(Omega, tol=DEFAULT_TOL, deriv_order=0, im_w=None):
    """Ellipsoid radius R guaranteeing a lattice tail below ``tol``.

    The radius is measured in the metric of Im(Omega) around the shifted
    centre, i.e. lattice points with (n - c)^T Y (n - c) <= R^2 are kept.

    Parameters
    ----------
    Omega : PeriodMatrix or array_like
    tol : float
        Target absolute tail for each component of the derivative tensor.
    deriv_order : {0, 1, 2}
    im_w : array_like, optional
        Imaginary parts of the arguments that will be used.  The bound is
        uniform over all of them.

    Returns
    -------
    float
    """
    if not tol > 0:
        raise NonPositiveTolerance("tol must be positive, got %r" % (tol,))
    P = _as_period_matrix(Omega)
    rho, tau, mu, quad_exp = _bound_params(P, im_w)
    return _radius_from_params(P.g, rho, tau, mu, quad_exp, int(deriv_order), tol)


def _tail_at(P, R, N, im_w):
    rho, tau, mu, quad_exp = _bound_params(P, im_w)
    return _tail_bound(R, P.g, rho, tau, mu, quad_exp, N)


def _ellipsoid_points(P, center, R):
    """Integer points n with |T (n - center)| <= R (box enumeration + filter)."""
    g = P.g
    half = R * np.sqrt(np.diag(P.Yinv))
    ranges = [np.arange(np.ceil(c - h), np.floor(c + h) + 1) for c, h in zip(center, half)]
    if g == 1:
        pts = ranges[0][:, None]
    else:
        pts = np.array(np.meshgrid(*ranges, indexing="ij")).reshape(g, -1).T
    d = (pts - center) @ P.cholesky.T
    keep = np.einsum("ki,ki->k", d, d) <= R * R
    return pts[keep]


def theta_batch(eta, Omega, W, tol=DEFAULT_TOL, order=0):
    """Theta and derivatives at many arguments.

    Parameters
    ----------
    eta : Characteristic
    Omega : PeriodMatrix or array_like
    W : array_like, shape (M, g) or (g,)
    tol : float
    order : {0, 1, 2}
        Highest derivative order returned.

    Returns
    -------
    values : list
        ``[theta]`` for order 0, ``[theta, grad]`` for order 1 and
        ``[theta, grad, hess]`` for order 2, with leading batch axis M.
    error_bound : float
        Uniform bound over the batch and all returned components.
    """
    P = _as_period_matrix(Omega)
    g = P.g
    if eta.g != g:
        raise DimensionMismatch("characteristic has g=%d, period matrix g=%d" % (eta.g, g))
    W = np.asarray(W, dtype=complex)
    single = W.ndim == 1
    W = np.atleast_2d(W)
    if W.shape[1] != g:
        raise DimensionMismatch("argument has %d components, expected %d" % (W.shape[1], g))
    if not tol > 0:
        raise NonPositiveTolerance("tol must be positive")
    a = 0.5 * eta.top
    b = 0.5 * eta.bottom
    # half the budget for truncation, the rest for rounding
    R = truncation_radius(P, 0.5 * tol, order, W.imag)
    # one lattice patch covering all ellipsoids of the batch
    U = W.imag @ P.Yinv
    centers = -a - U
    c0 = np.round(np.mean(centers, axis=0))
    spread = np.max(np.sqrt(np.einsum("mi,ij,mj->m", centers - c0, P.Y, centers - c0)))
    pts = _ellipsoid_points(P, c0, R + spread) + a
    phase = np.pi * 1j * np.einsum("ki,ij,kj->k", pts, P.Omega, pts)
    expo = phase[None, :] + 2j * np.pi * ((W + b) @ pts.T)
    terms = np.exp(expo)
    out = [np.sum(terms, axis=1)]
    if order >= 1:
        q = 2j * np.pi * pts
        out.append(terms @ q)
    if order >= 2:
        out.append(np.einsum("mk,ki,kj->mij", terms, q, q))
    # rounding estimate on top of the truncation certificate
    scale = np.max(np.sum(np.abs(terms), axis=1)) * (1.0 + (2 * np.pi * np.max(np.abs(pts))) ** order)
    err = _tail_at(P, R, order, W.imag) + 4 * np.finfo(float).eps * scale * max(1, len(pts)) ** 0.5
    if single:
        out = [o[0] for o in out]
    return out, float(err)


def theta(eta, Omega, w, tol=DEFAULT_TOL):
    """Theta function with characteristic ``eta`` at the argument ``w``."""
    vals, err = theta_batch(eta, Omega, np.atleast_1d(w), tol, order=0)
    return ThetaResult(complex(vals[0]), err, 0)


def theta_gradient(eta, Omega, w, tol=DEFAULT_TOL):
    """Gradient in w; ``value`` is a complex g-vector."""
    vals, err = theta_batch(eta, Omega, np.atleast_1d(w), tol, order=1)
    return ThetaResult(vals[1], err, 1)


def theta_hessian(eta, Omega, w, tol=DEFAULT_TOL):
    """Hessian in w; symmetric because each summand is symmetric."""
    vals, err = theta_batch(eta, Omega, np.atleast_1d(w), tol, order=2)
    return ThetaResult(vals[2], err, 2)


# -- symplectic transformations -----------------------------------------------


def _J(g):
    z = np.zeros((g, g), dtype=np.int64)
    i = np.eye(g, dtype=np.int64)
    return np.block([[z, i], [-i, z]])


@dataclass(frozen=True, eq=False)
class SymplecticMap:
    """Integer change of marking a' = s11 a + s12 b, b' = s21 a + s22 b."""

    s11: np.ndarray
    s12: np.ndarray
    s21: np.ndarray
    s22: np.ndarray

    def __post_init__(self):
        for name in ("s11", "s12", "s21", "s22"):
            m = np.atleast_2d(np.asarray(getattr(self, name)))
            if not np.all(m == np.round(m)):
                raise NotSymplectic("block %s is not integral" % name)
            object.__setattr__(self, name, m.astype(np.int64))
        M = self.matrix
        g = M.shape[0] // 2
        if not np.array_equal(M.T @ _J(g) @ M, _J(g)):
            raise NotSymplectic("sigma^T J sigma != J")

    @classmethod
    def from_matrix(cls, M):
        M = np.asarray(M)
        g = M.shape[0] // 2
        return cls(M[:g, :g], M[:g, g:], M[g:, :g], M[g:, g:])

    @classmethod
    def identity(cls, g):
        return cls.from_matrix(np.eye(2 * g, dtype=np.int64))

    @property
    def matrix(self):
        return np.block([[self.s11, self.s12], [self.s21, self.s22]])

    @property
    def g(self):
        return self.s11.shape[0]

    def __matmul__(self, other):
        return SymplecticMap.from_matrix(self.matrix @ other.matrix)


def transform_characteristic(sigma, eta):
    """Classical transformation law of characteristics, with diagonal term.

    In the (A Omega + B)(C Omega + D)^{-1} form the blocks are A = s22,
    B = s21, C = s12, D = s11 and, for bits (top, bottom),

        top'    = D top - C bottom + diag(C D^T)   (mod 2)
        bottom' = -B top + A bottom + diag(A B^T)  (mod 2).
    """
    A, B, C, D = sigma.s22, sigma.s21, sigma.s12, sigma.s11
    t, b = eta.top, eta.bottom
    t2 = (D @ t - C @ b + np.diag(C @ D.T)) % 2
    b2 = (-B @ t + A @ b + np.diag(A @ B.T)) % 2
    return Characteristic.from_rows(t2, b2)


def symplectic_transform(sigma, Omega, eta=None):
    """Action of a change of marking on (Omega, eta).

    Returns
    -------
    Omega2 : PeriodMatrix
        (s22 Omega + s21)(s12 Omega + s11)^{-1}.
    eta2 : Characteristic or None
    autF : complex
        det(s12 Omega + s11).
    """
    P = _as_period_matrix(Omega)
    if sigma.g != P.g:
        raise DimensionMismatch("symplectic map and period matrix disagree on g")
    F = sigma.s12 @ P.Omega + sigma.s11
    autF = complex(np.linalg.det(F))
    if abs(autF) < 1e-14 * max(1.0, np.linalg.norm(F)) ** P.g:
        raise SingularAutomorphyFactor("det(s12 Omega + s11) vanishes")
    om2 = np.linalg.solve(F.T, (sigma.s22 @ P.Omega + sigma.s21).T).T
    # rounding destroys exact symmetry; measure and absorb it
    defect = float(np.max(np.abs(om2 - om2.T)))
    P2 = PeriodMatrix(om2, tolerance=max(P.tolerance, 10 * defect, 1e-12))
    eta2 = None if eta is None else transform_characteristic(sigma, eta)
    return P2, eta2, autF


def random_symplectic(g, rng, n_factors=6, max_entry=3):
    """Random integer symplectic map built from elementary generators.

    Products of shears [[I, S], [0, I]], [[I, 0], [S, I]] (S symmetric) and
    block rotations [[U, 0], [0, U^{-T}]] with U unimodular.
    """
    I = np.eye(g, dtype=np.int64)
    Z = np.zeros((g, g), dtype=np.int64)
    M = np.eye(2 * g, dtype=np.int64)
    for _ in range(n_factors):
        kind = rng.integers(3)
        if kind < 2:
            S = rng.integers(-1, 2, size=(g, g))
            S = np.triu(S) + np.triu(S, 1).T
            E = np.block([[I, S], [Z, I]]) if kind == 0 else np.block([[I, Z], [S, I]])
        else:
            U = I.copy()
            if g > 1:
                i, j = rng.choice(g, size=2, replace=False)
                U[i, j] = rng.integers(-1, 2)
            E = np.block([[U, Z], [Z, np.round(np.linalg.inv(U).T).astype(np.int64)]])
        M2 = E @ M
        if np.max(np.abs(M2)) > max_entry:
            continue
        M = M2
    return SymplecticMap.from_matrix(M)


def all_characteristics(g):
    return [Characteristic(bits) for bits in product((0, 1), repeat=2 * g)]
