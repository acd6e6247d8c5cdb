"""Exception types shared across the package."""


class PmmError(Exception):
    """Base class for all pmmest errors."""


class InputTooShortError(PmmError):
    """Input vector has fewer observations than the operation requires."""


class InadmissibleCumulantsError(PmmError):
    """Cumulants violate the admissibility inequalities (g2/g3 undefined or outside [0,1])."""


class DegenerateDistributionError(PmmError):
    """Moment configuration leaves the quadratic correction weight undefined (m4 <= m2^2)."""


class DegenerateMomentsError(PmmError):
    """Moment matrix is singular or indefinite; polynomial weights undefined."""


class SingularDesignError(PmmError):
    """Design matrix is rank deficient at the working tolerance."""


class DegenerateInputError(PmmError):
    """Input has zero variance or is otherwise unusable for method selection."""


class FitFailureError(PmmError):
    """Model fitting failed irrecoverably."""


class DataError(PmmError):
    """Malformed input data (CSV parsing, missing values, wrong shapes)."""
