# probability/errors.py - Exception hierarchy shared by every package

from typing import Optional


class SeparabilityError(Exception):
    """
    Base class for all errors raised by this library.

    The CLI maps every subclass to a one-line diagnostic and exit status 2.
    """
    pass


class ScopeError(SeparabilityError):
    """
    Exception raised for scope mismatches.

    Used for:
    - Overlapping scopes in a product
    - Marginalizing onto variables outside the scope
    - Applying a CPD to a distribution over the wrong parents
    - Groupings that do not partition a scope
    """
    pass


class NormalizationError(SeparabilityError):
    """Table entries outside [0, 1] or not summing to 1 beyond tolerance"""
    pass


class ZeroNormalizerError(SeparabilityError):
    """Conditioning on evidence that has zero probability under the belief"""

    def __init__(self, message: str, step: Optional[int] = None):
        super().__init__(message)
        self.step = step

    def at_step(self, step: int) -> 'ZeroNormalizerError':
        """Copy of this error tagged with the 1-based filtering step"""
        return ZeroNormalizerError(f"step {step}: {self}", step=step)


class AbsoluteContinuityError(SeparabilityError):
    """KL divergence requested where q(i) = 0 but p(i) > 0"""
    pass


class ModelSyntaxError(SeparabilityError):
    """Model document is not well-formed JSON; carries the position"""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ModelValidationError(SeparabilityError):
    """
    Exception raised for semantically invalid models.

    Used for:
    - Unknown or duplicate variable names
    - CPD rows that do not sum to 1
    - Factorizations that are not a partition of the state variables
    """
    pass


class UnsupportedArityError(SeparabilityError):
    """More parent groups than the sign-pattern LP supports"""
    pass


class SolverError(SeparabilityError):
    """The LP solver failed on a problem that is always feasible"""
    pass


class EnumerationGuardError(SeparabilityError):
    """Too many state variables to enumerate factorizations"""
    pass


class ConfigurationError(SeparabilityError):
    """Experiment settings outside their valid ranges"""
    pass
