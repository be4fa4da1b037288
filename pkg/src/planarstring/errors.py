"""Exception hierarchy.

Validation problems (bad input, malformed files) and numerical failures are
kept apart so the CLI can map them to distinct exit codes.
"""


class PlanarStringError(Exception):
    """Base class for all package errors."""

    stage = None


class ValidationError(PlanarStringError, ValueError):
    """Input is outside the accepted domain (exit code 2)."""


class NumericalError(PlanarStringError, ArithmeticError):
    """A numerical stage could not produce a trustworthy result (exit code 3)."""


class GridError(ValidationError):
    """Point outside the sampling grid, or grids of two fields disagree."""


class DecayError(NumericalError):
    """Field does not decay below tolerance at the grid edges."""


class QuantizationError(NumericalError):
    """Total integral of rho is not an integer multiple of pi."""


class ConvergenceError(NumericalError):
    """Integration step too coarse or an iterative solve did not converge."""


class SingularSystemError(NumericalError):
    """Degenerate scattering data (e.g. a zero norming constant)."""


class EigenvalueSearchError(NumericalError):
    """Eigenvalue count inconsistent with the topological charge."""


class CuspError(NumericalError):
    """Requested quantity is undefined on a cusp."""


class ConstraintError(NumericalError):
    """Angular functional vanishes, so the constraint ratio is undefined."""


class TrackingError(NumericalError):
    """Cusp continuation could not match roots between time slices."""
