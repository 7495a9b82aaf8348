"""Exception types raised across the package."""


class ProductEnsembleError(Exception):
    pass


class ValidationError(ProductEnsembleError, ValueError):
    """Bad input; the CLI maps these to exit code 2."""


class PoleError(ValidationError):
    pass


class RangeError(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class NoSoftEdgeError(ValidationError):
    pass


class BranchPointError(ValidationError):
    pass


class SingularityError(ValidationError):
    pass


class GeometryError(ProductEnsembleError):
    pass


class PoleClearanceError(ProductEnsembleError):
    pass


class IllConditionedError(ProductEnsembleError):
    pass


class SingularFactorError(ProductEnsembleError):
    pass


class ConvergenceError(ProductEnsembleError):
    """Numerical target not reached; the CLI maps these to exit code 3."""
