"""Exception hierarchy.

Every error maps onto a CLI exit code: validation problems with the inputs
exit with 1, numerical or convergence failures exit with 2.
"""


class ToolkitError(Exception):
    exit_code = 1


class ValidationError(ToolkitError, ValueError):
    """Input data or configuration violates a documented invariant."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class DuplicateKeyError(ValidationError):
    pass


class UnknownCountyError(ValidationError):
    pass


class MissingObservationError(ValidationError):
    pass


class TieError(ValidationError):
    def __init__(self, fips, year):
        super().__init__(f"exact majority tie for county {fips} in {year}")
        self.fips = fips
        self.year = year


class EmptyJoinError(ValidationError):
    pass


class IsolatedCountyError(ValidationError):
    def __init__(self, fips):
        super().__init__(f"county {fips} has zero total connection weight")
        self.fips = fips


class TooManyPredictorsError(ValidationError):
    pass


class TooManyFeaturesError(ValidationError):
    pass


class IncompleteRunError(ValidationError):
    def __init__(self, stage, detail=""):
        msg = f"run is missing artifacts of stage {stage!r}"
        super().__init__(f"{msg}: {detail}" if detail else msg)
        self.stage = stage


class NumericalError(ToolkitError, ArithmeticError):
    exit_code = 2


class DivisionByZeroError(NumericalError, ZeroDivisionError):
    pass


class DegenerateError(NumericalError):
    pass


class DegenerateVarianceError(NumericalError):
    pass


class SingularDesignError(NumericalError):
    def __init__(self, message, subset=None):
        super().__init__(message)
        self.subset = subset


class InfiniteVifError(NumericalError):
    def __init__(self, feature):
        super().__init__(f"feature {feature!r} is perfectly collinear with the others")
        self.feature = feature


class ConvergenceError(NumericalError):
    """Raised when an iterative solver hits its iteration cap.

    ``last`` carries whatever the solver had when it stopped.
    """

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class StageError(ToolkitError):
    """Pipeline stage failure; wraps the original error."""

    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 2)
