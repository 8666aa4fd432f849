"""Exception hierarchy shared by all modules."""


class SpinTauError(Exception):
    """Base class for every error raised by the package."""


class NonPositiveTolerance(SpinTauError, ValueError):
    pass


class DegenerateImaginaryPart(SpinTauError, ValueError):
    pass


class DimensionMismatch(SpinTauError, ValueError):
    pass


class NotSymplectic(SpinTauError, ValueError):
    pass


class SingularAutomorphyFactor(SpinTauError, ArithmeticError):
    pass


class DegenerateCurve(SpinTauError, ValueError):
    """Branch points collide or the count is inconsistent with the genus."""


class PathThroughBranchPoint(SpinTauError, ValueError):
    pass


class PathCrossesCycle(SpinTauError, ValueError):
    pass


class NotSymplecticMarking(SpinTauError, ValueError):
    pass


class QuadratureFailure(SpinTauError, RuntimeError):
    pass


class EvenCharacteristic(SpinTauError, ValueError):
    pass


class DegenerateSpinor(SpinTauError, ValueError):
    """The theta gradient vanishes, so the spinor square is undefined."""


class UnresolvedCluster(SpinTauError, RuntimeError):
    pass


class OddMultiplicity(SpinTauError, RuntimeError):
    pass


class ContourHitsPole(SpinTauError, ValueError):
    pass


class FitFailure(SpinTauError, RuntimeError):
    pass


class InconsistentSystem(SpinTauError, ValueError):
    pass


class InconsistentExponentTable(SpinTauError, ValueError):
    """Exponent table missing entries or not solvable for the class."""
