"""
Exact bookkeeping in Pic(S_g) (x) Q over the basis

    lambda, alpha_0, ..., alpha_[g/2], beta_0, ..., beta_[g/2].

The class of Z_g follows by comparing two expressions for the divisor of
one section psi of lambda^(8g+64): its weight, and its vanishing orders on
the boundary components read off from the tau asymptotics.  The theta-null
class follows the same way from the modular form of weight n = 16 built
from the even theta constants.
"""

from dataclasses import dataclass
from fractions import Fraction

from .errors import InconsistentExponentTable

__all__ = [
    "DivisorClass",
    "basis",
    "default_exponent_table",
    "solve_farkas",
    "farkas_class",
    "farkas_identity",
    "farkas_mismatch",
    "solve_theta_null",
    "theta_null_identity",
    "THETA_NULL_WEIGHT",
]

# weight of the modular form whose divisor is 16 Theta_null + ... (classical)
THETA_NULL_WEIGHT = 16


def basis(g):
    h = g // 2
    return ["lambda"] + ["alpha%d" % j for j in range(h + 1)] + ["beta%d" % j for j in range(h + 1)]


def _frac(v):
    if isinstance(v, float):
        raise InconsistentExponentTable("floating point entry %r; use int, str or Fraction" % v)
    return Fraction(v)


@dataclass(frozen=True)
class DivisorClass:
    """Rational combination of the standard generators, parity '-' or '+'."""

    g: int
    coefficients: tuple
    parity: str = "-"

    def __post_init__(self):
        c = tuple(_frac(v) for v in self.coefficients)
        if len(c) != 2 * (self.g // 2 + 1) + 1:
            raise InconsistentExponentTable("basis length %d for g=%d" % (len(c), self.g))
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def zero(cls, g, parity="-"):
        return cls(g, (0,) * (2 * (g // 2 + 1) + 1), parity)

    @classmethod
    def generator(cls, g, name, parity="-"):
        names = basis(g)
        c = [0] * len(names)
        c[names.index(name)] = 1
        return cls(g, tuple(c), parity)

    @classmethod
    def from_dict(cls, g, d, parity="-"):
        names = basis(g)
        extra = set(d) - set(names)
        if extra:
            raise InconsistentExponentTable("unknown generators %s" % sorted(extra))
        return cls(g, tuple(_frac(d.get(n, 0)) for n in names), parity)

    @property
    def names(self):
        return basis(self.g)

    def __getitem__(self, name):
        return self.coefficients[self.names.index(name)]

    def _check(self, other):
        if not isinstance(other, DivisorClass) or other.g != self.g or other.parity != self.parity:
            raise InconsistentExponentTable("classes live in different Picard groups")

    def __add__(self, other):
        self._check(other)
        return DivisorClass(self.g, tuple(a + b for a, b in zip(self.coefficients, other.coefficients)), self.parity)

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, k):
        k = _frac(k)
        return DivisorClass(self.g, tuple(k * a for a in self.coefficients), self.parity)

    __mul__ = __rmul__

    def __truediv__(self, k):
        return (1 / _frac(k)) * self

    def __neg__(self):
        return (-1) * self

    def is_zero(self):
        return all(a == 0 for a in self.coefficients)

    def to_dict(self):
        return {n: str(a) for n, a in zip(self.names, self.coefficients)}

    def to_json(self):
        return {"g": self.g, "parity": self.parity, "coefficients": self.to_dict()}

    def to_latex(self):
        sup = "^+" if self.parity == "+" else ""
        parts = []
        for n, a in zip(self.names, self.coefficients):
            if a == 0:
                continue
            if n == "lambda":
                sym = r"\lambda"
            else:
                greek = n.rstrip("0123456789")
                sym = "\\%s%s_{%s}" % (greek, sup, n[len(greek):])
            mag = abs(a)
            if mag == 1:
                num = ""
            elif mag.denominator == 1:
                num = str(mag.numerator)
            else:
                num = r"\frac{%d}{%d}" % (mag.numerator, mag.denominator)
            sign = "-" if a < 0 else "+"
            parts.append((sign, num + sym))
        if not parts:
            return "0"
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for s, t in parts[1:]:
            out += " %s %s" % (s, t)
        return out

    def __str__(self):
        return self.to_latex()


# -- Z_g --------------------------------------------------------------------------


def default_exponent_table(g):
    """Boundary and section data entering the Z_g identity.

    tau_weight: tau maps L^{16(g-1)} to Lambda^72; spinor_weight: the
    section sigma^{16(g-1)} carries Lambda^{8(g-1)}; A0_shift: extra order
    16(g-1)/8 from the t^{1/8} normalisation near A_0.
    """
    t = {
        "tau_weight": 72,
        "spinor_weight": 8 * (g - 1),
        "Z": 8,
        "A0": 6,
        "A0_shift": Fraction(16 * (g - 1), 8),
        "B0": 16,
    }
    for j in range(1, g // 2 + 1):
        t["A%d" % j] = 16 * (g - j)
        t["B%d" % j] = 16 * j
    return t


def _get(table, key):
    if key not in table:
        raise InconsistentExponentTable("exponent table lacks %r" % key)
    return _frac(table[key])


def _boundary_part(g, table, j_start):
    B = DivisorClass.zero(g)
    B = B + (_get(table, "A0") + _get(table, "A0_shift")) * DivisorClass.generator(g, "alpha0")
    B = B + _get(table, "B0") * DivisorClass.generator(g, "beta0")
    for j in range(j_start, g // 2 + 1):
        B = B + _get(table, "A%d" % j) * DivisorClass.generator(g, "alpha%d" % j)
        B = B + _get(table, "B%d" % j) * DivisorClass.generator(g, "beta%d" % j)
    return B


def solve_farkas(g, table=None, j_start=1):
    """[Z_g] from  W lambda = boundary orders + Z [Z_g],  W = tau_weight + spinor_weight.

    ``j_start`` = 1 follows the closed formula; 2 starts the boundary sum at
    j = 2, a variant kept to expose the resulting discrepancy.  Entries for j > [g/2] are ignored.
    """
    if g < 2:
        raise InconsistentExponentTable("g >= 2 required")
    table = default_exponent_table(g) if table is None else table
    Z = _get(table, "Z")
    if Z == 0:
        raise InconsistentExponentTable("zero vanishing order along Z_g")
    W = _get(table, "tau_weight") + _get(table, "spinor_weight")
    lam = W * DivisorClass.generator(g, "lambda")
    return (lam - _boundary_part(g, table, j_start)) / Z


def farkas_class(g):
    """(g+8) lambda - (g+2)/4 alpha_0 - 2 beta_0 - sum 2(g-j) alpha_j - sum 2j beta_j."""
    d = {"lambda": g + 8, "alpha0": Fraction(-(g + 2), 4), "beta0": -2}
    for j in range(1, g // 2 + 1):
        d["alpha%d" % j] = -2 * (g - j)
        d["beta%d" % j] = -2 * j
    return DivisorClass.from_dict(g, d)


def farkas_mismatch(cls):
    """Difference from the closed formula, or None when they agree exactly."""
    d = cls - farkas_class(cls.g)
    return None if d.is_zero() else d


def farkas_identity(cls, table=None, j_start=1):
    """Boundary orders + Z [cls]; equals W lambda exactly when cls solves the identity."""
    g = cls.g
    table = default_exponent_table(g) if table is None else table
    return _boundary_part(g, table, j_start) + _get(table, "Z") * cls


# -- Theta_null --------------------------------------------------------------------


def theta_null_identity(g):
    """Coefficients of  (n/4) lambda = n [Theta_null] + alpha_0^+ + (n/2) sum_{j>=1} beta_j^+ , n = 16.

    Returned as (lambda class, boundary class, multiplier of Theta_null).
    """
    n = THETA_NULL_WEIGHT
    lam = Fraction(n, 4) * DivisorClass.generator(g, "lambda", "+")
    bd = DivisorClass.generator(g, "alpha0", "+")
    for j in range(1, g // 2 + 1):
        bd = bd + Fraction(n, 2) * DivisorClass.generator(g, "beta%d" % j, "+")
    return lam, bd, n


def solve_theta_null(g):
    """[Theta_null] = 1/4 lambda - 1/16 alpha_0^+ - 1/2 sum_{j>=1} beta_j^+."""
    if g < 1:
        raise InconsistentExponentTable("g >= 1 required")
    lam, bd, n = theta_null_identity(g)
    return (lam - bd) / n
