# probability/__init__.py
from .errors import (
    AbsoluteContinuityError,
    NormalizationError,
    ScopeError,
    SeparabilityError,
    ZeroNormalizerError,
)
from .tables import Categorical, Cpd, SignedTable, VariableSpec
from .ops import apply_cpd, condition, dependence, kl, linf, marginalize, product
