"""Exception hierarchy for henon-symmetry-lab.

Every error carries a stable ``code`` (rendered by the CLI as structured JSON)
and the process ``exit_code`` the CLI returns for it. Precondition failures
also subclass :class:`ValueError`, numerical failures :class:`ArithmeticError`.
"""

from __future__ import annotations

from typing import Any, Optional


class HenonLabError(Exception):
    """Root of all henon-symmetry-lab errors."""

    code = "error"
    exit_code = 1

    def to_dict(self) -> dict:
        return {"code": self.code, "type": type(self).__name__, "message": str(self)}


# -- precondition failures ---------------------------------------------------


class InvalidParameter(HenonLabError, ValueError):
    """A parameter violates a documented precondition."""

    code = "invalid_parameter"
    exit_code = 2


class DimensionTooSmall(InvalidParameter):
    code = "dimension_too_small"


class WeightOutOfRange(InvalidParameter):
    code = "weight_out_of_range"


class WeightNotIntegrable(InvalidParameter):
    code = "weight_not_integrable"


class GridTooCoarse(InvalidParameter):
    code = "grid_too_coarse"


class GridMismatch(InvalidParameter):
    code = "grid_mismatch"


class SupercriticalExponent(InvalidParameter):
    code = "supercritical_exponent"


class HypothesisViolation(InvalidParameter):
    code = "hypothesis_violation"


class NonPositiveData(InvalidParameter):
    code = "non_positive_data"


class InsufficientData(InvalidParameter):
    code = "insufficient_data"


class DegenerateExponent(InvalidParameter):
    code = "degenerate_exponent"


class FileAccessError(InvalidParameter):
    """An input file is missing or unreadable, or an output path cannot be written."""

    code = "file_access"


class MalformedFile(InvalidParameter):
    """An input file does not follow its documented format."""

    code = "malformed_file"


# -- numerical failures ------------------------------------------------------


class NumericalError(HenonLabError, ArithmeticError):
    """A computation ran but could not produce a trustworthy result."""

    code = "numerical_error"
    exit_code = 3


class ZeroDenominator(NumericalError):
    code = "zero_denominator"


class NotConverged(NumericalError):
    """Raised only in strict mode; ``result`` holds the best iterate."""

    code = "not_converged"

    def __init__(self, message: str, result: Optional[Any] = None):
        super().__init__(message)
        self.result = result


class NotBracketed(NumericalError):
    code = "not_bracketed"


class NegativeLaplacianBeyondTol(NumericalError):
    code = "negative_laplacian"


class NotASolution(NumericalError):
    code = "not_a_solution"
