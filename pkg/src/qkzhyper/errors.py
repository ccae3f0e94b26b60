"""Exception types shared across the package."""


class QkzError(Exception):
    pass


class DomainError(QkzError, ValueError):
    """Argument outside the mathematical domain (e.g. |p| >= 1, u = 0)."""


class PoleProximityError(QkzError):
    """An evaluation or quadrature node is too close to a pole."""


class ResonanceError(QkzError):
    """Parameters violate a genericity (non-resonance) condition."""


class ConvergenceError(QkzError):
    """A series/sum is outside its convergence region or failed to settle."""


class DegeneracyError(QkzError):
    """Singularity hyperplanes have a multiple intersection at a residue point."""


class SamplingError(QkzError):
    """No admissible parameter draw found within the attempt budget."""
