# probability/ops.py - Products, marginals, conditioning and distances over tables

from typing import Iterable, List, Sequence, Union

import numpy as np

from .errors import AbsoluteContinuityError, ScopeError, ZeroNormalizerError
from .tables import (
    Categorical,
    Cpd,
    Scope,
    SignedTable,
    VariableRef,
    align,
    make_scope,
    ref_name,
    scope_names,
    scope_shape,
    select,
)

Table = Union[Categorical, SignedTable]


def product(a: Categorical, b: Categorical) -> Categorical:
    """
    Product of two distributions over disjoint scopes

    Returns:
        Categorical over a.scope + b.scope with entries a(x) * b(y)

    Raises:
        ScopeError: If the scopes share a variable
    """
    shared = set(a.names) & set(b.names)
    if shared:
        raise ScopeError(f"Product of overlapping scopes (shared: {', '.join(sorted(shared))})")
    return Categorical.normalized(a.scope + b.scope, np.outer(a.values, b.values))


def product_of(tables: Iterable[Categorical]) -> Categorical:
    """Product of several distributions over pairwise disjoint scopes"""
    tables = list(tables)
    if not tables:
        raise ScopeError("Product of no tables")
    result = tables[0]
    for t in tables[1:]:
        result = product(result, t)
    return result


def reorder(t: Categorical, order: Sequence[VariableRef]) -> Categorical:
    """Same distribution with its scope permuted into `order`"""
    target = select(t.scope, order)
    if len(target) != len(t.scope):
        raise ScopeError(f"Reorder needs all of ({', '.join(t.names)})")
    if target == t.scope:
        return t
    arr = np.transpose(t.as_array(), [t.names.index(v.name) for v in target])
    return Categorical(target, arr.ravel())


def marginalize(t: Categorical, keep: Sequence[VariableRef]) -> Categorical:
    """
    Sum out every variable not in `keep`

    Args:
        t: Distribution to marginalize
        keep: Variables to keep; the result scope follows this order

    Raises:
        ScopeError: If `keep` names a variable outside the scope
    """
    target = select(t.scope, keep)
    if target == t.scope:
        return t
    names = t.names
    kept = [names.index(v.name) for v in target]
    dropped = tuple(i for i in range(len(names)) if i not in kept)
    arr = t.as_array().sum(axis=dropped)
    # Remaining axes come out in scope order; permute into the requested order
    remaining = sorted(kept)
    arr = np.transpose(arr, [remaining.index(i) for i in kept])
    return Categorical.normalized(target, arr.ravel())


def apply_cpd(cpd: Cpd, pi: Categorical) -> Categorical:
    """
    Push a distribution over the parents through a CPD: sum_xy pi(xy) P(Z|xy)

    Raises:
        ScopeError: If pi's scope differs from the CPD's parent scope
    """
    if pi.scope != cpd.parent_scope:
        raise ScopeError(
            f"apply_cpd: distribution over ({', '.join(pi.names)}) does not match "
            f"parents ({', '.join(cpd.parent_names)})"
        )
    return Categorical.normalized(cpd.child_scope, pi.values @ cpd.table)


def likelihood(obs_cpd: Cpd, observed_value: int, scope: Scope) -> np.ndarray:
    """
    P(observed_value | parents) broadcast over a joint scope

    Returns:
        Array with one axis per variable of `scope`
    """
    if not 0 <= observed_value < obs_cpd.table.shape[1]:
        raise ScopeError(f"Observed value {observed_value} out of range for {', '.join(obs_cpd.child_names)}")
    return align(obs_cpd.table[:, observed_value], obs_cpd.parent_scope, scope)


def condition(joint: Categorical, obs_cpd: Cpd, observed_value: int) -> Categorical:
    """
    Bayes update of a joint on one observation

    Args:
        joint: Prior over a scope containing the observation's parents
        obs_cpd: P(observation | parents)
        observed_value: Index of the observed value

    Returns:
        Posterior joint over the same scope

    Raises:
        ZeroNormalizerError: If the observation has zero probability under the joint
    """
    weights = joint.as_array() * likelihood(obs_cpd, observed_value, joint.scope)
    total = weights.sum()
    if not total > 0.0:
        raise ZeroNormalizerError(
            f"Observation {', '.join(obs_cpd.child_names)}={observed_value} is impossible under the belief"
        )
    return Categorical(joint.scope, weights.ravel() / total)


def kl(p: Categorical, q: Categorical) -> float:
    """
    KL divergence KL(p || q) in nats; cells with p = 0 contribute 0

    Raises:
        ScopeError: If the scopes differ
        AbsoluteContinuityError: If q = 0 somewhere p > 0
    """
    q = _matching(p, q)
    return kl_values(p.values, q.values, where=", ".join(p.names))


def kl_values(p: np.ndarray, q: np.ndarray, where: str = "") -> float:
    """KL(p || q) on raw probability vectors laid out in the same order"""
    support = p > 0.0
    if np.any(q[support] <= 0.0):
        raise AbsoluteContinuityError(f"KL over ({where}): q is zero where p is positive")
    ps, qs = p[support], q[support]
    return max(0.0, float(np.sum(ps * np.log(ps / qs))))


def linf(p: Table, q: Table) -> float:
    """Max absolute cellwise difference between two tables over the same scope"""
    q = _matching(p, q)
    return float(np.max(np.abs(p.values - q.values)))


def group_marginals(joint: Categorical, grouping: Sequence[Sequence[VariableRef]]) -> List[Categorical]:
    """Marginals of a joint onto each group of a partition of its scope"""
    check_partition(joint.scope, grouping)
    return [marginalize(joint, group) for group in grouping]


def product_in_scope(marginals: Sequence[Categorical], scope: Scope) -> np.ndarray:
    """Product of marginals over disjoint scopes, laid out flat in `scope` order"""
    arr = np.ones(scope_shape(scope))
    for m in marginals:
        arr = arr * align(m.values, m.scope, scope)
    return arr.ravel()


def dependence(joint: Categorical, grouping: Sequence[Sequence[VariableRef]]) -> SignedTable:
    """
    Joint minus the product of its group marginals

    Raises:
        ScopeError: If `grouping` does not partition the scope
    """
    marginals = group_marginals(joint, grouping)
    return SignedTable(joint.scope, joint.values - product_in_scope(marginals, joint.scope))


def check_partition(scope: Scope, grouping: Sequence[Sequence[VariableRef]]) -> None:
    """
    Raises:
        ScopeError: If `grouping` is not a partition of `scope` into nonempty groups
    """
    seen: List[str] = []
    for group in grouping:
        names = [ref_name(r) for r in group]
        if not names:
            raise ScopeError("Empty group in partition")
        select(scope, names)
        seen.extend(names)
    make_scope(select(scope, seen))
    missing = [n for n in scope_names(scope) if n not in seen]
    if missing:
        raise ScopeError(f"Partition misses {', '.join(missing)}")


def _matching(p: Table, q: Table) -> Table:
    if set(p.names) != set(q.names) or len(p.names) != len(q.names):
        raise ScopeError(f"Scope mismatch: ({', '.join(p.names)}) vs ({', '.join(q.names)})")
    if p.scope == q.scope:
        return q
    if isinstance(q, Categorical):
        return reorder(q, p.names)
    arr = np.transpose(q.as_array(), [q.names.index(n) for n in p.names])
    return SignedTable(select(q.scope, p.names), arr.ravel())
