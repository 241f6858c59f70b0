# separability/persistence.py - Persistence (stay-probability) decomposition

import numpy as np

from probability.errors import ScopeError
from probability.tables import Cpd, assignment_of, scope_size
from .types import PersistenceResult


def persistence(cpd: Cpd) -> PersistenceResult:
    """
    Split P(X | X-, ...) into kappa I(X | X-) + (1 - kappa) P_residual

    kappa is the smallest probability of keeping the previous value over all
    parent rows. The residual keeps P(x | .) / (1 - kappa) off the diagonal
    and (P(x | .) - kappa) / (1 - kappa) on it.

    Args:
        cpd: CPD with one child whose previous-slice copy is a parent

    Returns:
        PersistenceResult; residual is None when kappa = 1

    Raises:
        ScopeError: If the child's previous copy is not among the parents
    """
    if len(cpd.child_scope) != 1:
        raise ScopeError("Persistence needs a single child variable")
    child = cpd.child_scope[0]
    previous_name = child.previous().name
    if previous_name not in cpd.parent_names:
        raise ScopeError(f"Persistence of {child.name} needs {previous_name} among the parents")
    position = cpd.parent_names.index(previous_name)
    previous = cpd.parent_scope[position]
    if previous.cardinality != child.cardinality:
        raise ScopeError(f"{previous_name} and {child.name} have different cardinalities")

    stay = np.array([assignment_of(cpd.parent_scope, r)[position] for r in range(scope_size(cpd.parent_scope))])
    rows = np.arange(len(stay))
    identity = np.zeros_like(cpd.table)
    identity[rows, stay] = 1.0

    kappa = float(cpd.table[rows, stay].min())
    residual = None
    if kappa < 1.0:
        table = np.clip((cpd.table - kappa * identity) / (1.0 - kappa), 0.0, None)
        residual = Cpd(cpd.child_scope, cpd.parent_scope, table / table.sum(axis=1, keepdims=True))
    return PersistenceResult(
        kappa=kappa,
        identity_component=Cpd.identity(child, previous),
        residual=residual,
        parent_scope=cpd.parent_scope,
    )
