"""Provide the exceptions raised by the package."""
from typing import Optional

from .const import EXIT_CROSS_CHECK, EXIT_VALIDATION


class FellerError(Exception):
    """Represent a failure the cli reports with a dedicated exit code."""

    exit_code = EXIT_VALIDATION


class ValidationError(FellerError, ValueError):
    """Represent invalid parameters, grids or scenarios."""


class CrossCheckError(FellerError, ArithmeticError):
    """Represent a failed numerical self-check.

    The achieved error and the tolerance it was held to are kept on the
    exception so callers can report them.
    """

    exit_code = EXIT_CROSS_CHECK

    def __init__(
        self, message: str, achieved: float, tolerance: Optional[float] = None
    ) -> None:
        """Set up the error."""
        super().__init__(
            "{} (achieved {:.3e}{})".format(
                message,
                achieved,
                "" if tolerance is None else ", tolerance {:.1e}".format(tolerance),
            )
        )
        self.achieved = achieved
        self.tolerance = tolerance


class AdmissibilityError(FellerError):
    """Represent a violated admissibility condition at a given time."""

    def __init__(self, message: str, first_violation: float) -> None:
        """Set up the error."""
        super().__init__(
            "{} (first violation at t={:.6g})".format(message, first_violation)
        )
        self.first_violation = first_violation
