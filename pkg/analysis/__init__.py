# analysis/__init__.py
from .bounds import BoundQuantities, ErrorBound, bound_quantities, theorem61_bound
from .isolation import (
    ErrorDecomposition,
    IsolationState,
    initial_isolation_state,
    run_error_decomposition,
    type_a_step,
    type_b_step,
)
from .monte_carlo import ExpectedErrors, exact_expected_errors, monte_carlo_errors
