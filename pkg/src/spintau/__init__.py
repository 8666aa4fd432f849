"""Spin moduli numerics: theta functions, hyperelliptic periods, spinors and tau."""

from .errors import SpinTauError
from .theta import Characteristic, PeriodMatrix, SymplecticMap, theta, theta_batch, theta_gradient, theta_hessian
from .surface import HomologyMarking, HyperellipticCurve, Surface, load_curve
from .spin import Differential, homological_coordinates, spinor
from .bergman import BergmanKernel, dlogtau, rbr_identity, tau_scaling_exponent
from .picard import DivisorClass, solve_farkas, solve_theta_null

__version__ = "0.1.0"

__all__ = [
    "SpinTauError",
    "Characteristic",
    "PeriodMatrix",
    "SymplecticMap",
    "theta",
    "theta_batch",
    "theta_gradient",
    "theta_hessian",
    "HomologyMarking",
    "HyperellipticCurve",
    "Surface",
    "load_curve",
    "Differential",
    "homological_coordinates",
    "spinor",
    "BergmanKernel",
    "dlogtau",
    "rbr_identity",
    "tau_scaling_exponent",
    "DivisorClass",
    "solve_farkas",
    "solve_theta_null",
]
