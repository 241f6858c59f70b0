# model/dbn.py - Two-slice DBN model, factorizations and factor-level CPDs

from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from probability.errors import ModelValidationError, ScopeError
from probability.ops import marginalize, product_of
from probability.tables import (
    PREVIOUS_SUFFIX,
    Categorical,
    Cpd,
    Scope,
    VariableSpec,
    align,
    make_scope,
    scope_names,
    scope_size,
    select,
)

Prior = Union[Categorical, Tuple[Categorical, ...]]


class Factorization:
    """Ordered partition of the state variables into factors"""

    def __init__(self, factors: Iterable[Iterable[str]]):
        self.factors: Tuple[Tuple[str, ...], ...] = tuple(tuple(f) for f in factors)
        if not self.factors or any(not f for f in self.factors):
            raise ModelValidationError("Factorization needs at least one nonempty factor")
        names = [n for f in self.factors for n in f]
        if len(set(names)) != len(names):
            duplicates = sorted({n for n in names if names.count(n) > 1})
            raise ModelValidationError(f"Factors overlap on {', '.join(duplicates)}")

    @classmethod
    def parse(cls, text: str) -> 'Factorization':
        """
        Parse the command-line syntax "U,V|W,X|Y,Z"

        Raises:
            ModelValidationError: If a group is empty
        """
        groups = []
        for part in text.split("|"):
            names = [n.strip() for n in part.split(",") if n.strip()]
            if not names:
                raise ModelValidationError(f"Empty factor in {text!r}")
            groups.append(names)
        return cls(groups)

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(n for f in self.factors for n in f)

    @property
    def label(self) -> str:
        """Compact label such as {UV,WX,YZ} (names joined with '.' when longer than one character)"""
        parts = []
        for f in self.factors:
            joiner = "" if all(len(n) == 1 for n in f) else "."
            parts.append(joiner.join(f))
        return "{" + ",".join(parts) + "}"

    def factor_of(self, name: str) -> int:
        """Index of the factor holding a (current or previous slice) variable"""
        base = name[:-1] if name.endswith(PREVIOUS_SUFFIX) else name
        for i, f in enumerate(self.factors):
            if base in f:
                return i
        raise ScopeError(f"Variable {name} is not in factorization {self.label}")

    def validate(self, state_names: Sequence[str]) -> None:
        """
        Raises:
            ModelValidationError: If the factors do not partition `state_names`
        """
        unknown = [n for n in self.variables if n not in state_names]
        if unknown:
            raise ModelValidationError(f"Factorization names unknown variables: {', '.join(unknown)}")
        missing = [n for n in state_names if n not in self.variables]
        if missing:
            raise ModelValidationError(f"Factorization misses {', '.join(missing)}")

    def __len__(self) -> int:
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Factorization):
            return NotImplemented
        return self.factors == other.factors

    def __hash__(self) -> int:
        return hash(self.factors)

    def __repr__(self) -> str:
        return f"Factorization({'|'.join(','.join(f) for f in self.factors)})"


class DbnModel:
    """
    Two-slice dynamic Bayesian network.

    Transition CPDs have previous-slice parents (names suffixed '-'),
    observation CPDs have current-slice parents. The prior is either a joint
    over the state variables or one Categorical per factor.
    """

    def __init__(self, state_vars: Iterable[VariableSpec], transition: Iterable[Cpd],
                 observations: Iterable[Tuple[VariableSpec, Cpd]], prior: Prior,
                 factorization: Factorization, name: str = "model",
                 candidates: Optional[Dict[str, Factorization]] = None):
        try:
            self.state_vars: Scope = make_scope(state_vars)
        except ScopeError as e:
            raise ModelValidationError(str(e))
        self.name = name
        self.factorization = factorization
        self.candidates: Dict[str, Factorization] = dict(candidates or {})

        names = self.state_names
        by_child: Dict[str, Cpd] = {}
        for cpd in transition:
            if len(cpd.child_scope) != 1:
                raise ModelValidationError(f"Transition CPD for ({', '.join(cpd.child_names)}) must have one child")
            child = cpd.child_names[0]
            if child not in names:
                raise ModelValidationError(f"Transition CPD for unknown variable {child}")
            if child in by_child:
                raise ModelValidationError(f"Two transition CPDs for {child}")
            self._check_scope(cpd.child_scope, f"transition CPD for {child}")
            self._check_scope(cpd.parent_scope, f"transition CPD for {child}", previous=True)
            by_child[child] = cpd
        missing = [n for n in names if n not in by_child]
        if missing:
            raise ModelValidationError(f"No transition CPD for {', '.join(missing)}")
        self.transition: Tuple[Cpd, ...] = tuple(by_child[n] for n in names)

        obs_list = []
        for var, cpd in observations:
            if var.name in names or var.is_previous:
                raise ModelValidationError(f"Observation variable {var.name} clashes with the state variables")
            if cpd.child_scope != (var,):
                raise ModelValidationError(f"Observation CPD for {var.name} has child ({', '.join(cpd.child_names)})")
            self._check_scope(cpd.parent_scope, f"observation CPD for {var.name}")
            obs_list.append((var, cpd))
        obs_names = [v.name for v, _ in obs_list]
        if len(set(obs_names)) != len(obs_names):
            raise ModelValidationError("Duplicate observation variable names")
        self.observations: Tuple[Tuple[VariableSpec, Cpd], ...] = tuple(obs_list)

        factorization.validate(names)
        self.prior = self._check_prior(prior)

    def _check_scope(self, scope: Scope, where: str, previous: bool = False) -> None:
        declared = {v.name: v for v in self.state_vars}
        for v in scope:
            if v.is_previous != previous:
                slice_name = "previous" if previous else "current"
                raise ModelValidationError(f"{where}: {v.name} is not a {slice_name}-slice variable")
            expected = declared.get(v.base_name)
            if expected is None:
                raise ModelValidationError(f"{where}: unknown variable {v.base_name}")
            if expected.cardinality != v.cardinality:
                raise ModelValidationError(
                    f"{where}: {v.name} has cardinality {v.cardinality}, declared {expected.cardinality}"
                )

    def _check_prior(self, prior: Prior) -> Prior:
        if isinstance(prior, Categorical):
            if set(prior.names) != set(self.state_names) or len(prior.names) != len(self.state_names):
                raise ModelValidationError(f"Joint prior over ({', '.join(prior.names)}) must cover the state variables")
            return prior
        prior = tuple(prior)
        if len(prior) != len(self.factorization):
            raise ModelValidationError(
                f"Product prior has {len(prior)} tables for {len(self.factorization)} factors"
            )
        for i, (table, factor) in enumerate(zip(prior, self.factorization)):
            if table.names != factor:
                raise ModelValidationError(
                    f"Prior table {i} is over ({', '.join(table.names)}), factor is ({', '.join(factor)})"
                )
        return prior

    @property
    def state_names(self) -> Tuple[str, ...]:
        return scope_names(self.state_vars)

    @property
    def previous_vars(self) -> Scope:
        return tuple(v.previous() for v in self.state_vars)

    @property
    def n_states(self) -> int:
        return scope_size(self.state_vars)

    def variable(self, name: str) -> VariableSpec:
        return select(self.state_vars, [name])[0]

    def transition_cpd(self, name: str) -> Cpd:
        return self.transition[self.state_names.index(name)]

    def factor_scope(self, i: int) -> Scope:
        return select(self.state_vars, self.factorization.factors[i])

    @cached_property
    def transition_matrix(self) -> np.ndarray:
        """N x N matrix with entry [previous joint index, next joint index]"""
        target = self.previous_vars + self.state_vars
        arr = np.ones((1,) * len(target))
        for cpd in self.transition:
            arr = arr * align(cpd.as_array().ravel(), cpd.parent_scope + cpd.child_scope, target)
        n = self.n_states
        return np.ascontiguousarray(np.broadcast_to(arr, tuple(v.cardinality for v in target)).reshape(n, n))

    @cached_property
    def observation_likelihoods(self) -> Tuple[np.ndarray, ...]:
        """Per observation variable, a (cardinality x N) array of P(o | state)"""
        tables = []
        for var, cpd in self.observations:
            rows = [
                np.broadcast_to(align(cpd.table[:, o], cpd.parent_scope, self.state_vars),
                                tuple(v.cardinality for v in self.state_vars)).ravel()
                for o in range(var.cardinality)
            ]
            tables.append(np.array(rows))
        return tuple(tables)

    def evidence_likelihood(self, observed: Sequence[int]) -> np.ndarray:
        """Product over observation variables of P(o_k | state), flat over the state scope"""
        if len(observed) != len(self.observations):
            raise ScopeError(f"Expected {len(self.observations)} observed values, got {len(observed)}")
        lik = np.ones(self.n_states)
        for table, value in zip(self.observation_likelihoods, observed):
            lik = lik * table[int(value)]
        return lik

    def prior_joint(self) -> Categorical:
        """Prior as a joint over the state variables in declaration order"""
        if isinstance(self.prior, Categorical):
            joint = self.prior
        else:
            joint = product_of(self.prior)
        arr = np.transpose(joint.as_array(), [joint.names.index(n) for n in self.state_names])
        return Categorical(self.state_vars, arr.ravel())

    def with_factorization(self, factorization: Factorization) -> 'DbnModel':
        """
        Same dynamics under another factorization.

        A product prior is turned into the product of its marginals on the new factors.
        """
        prior = self.prior
        if not isinstance(prior, Categorical):
            joint = self.prior_joint()
            prior = tuple(marginalize(joint, f) for f in factorization.factors)
        return DbnModel(self.state_vars, self.transition, self.observations, prior,
                        factorization, name=self.name, candidates=self.candidates)

    def __repr__(self) -> str:
        return f"DbnModel({self.name}: {', '.join(self.state_names)}; {self.factorization.label})"


def widen_cpd(cpd: Cpd, parent_scope: Scope) -> Cpd:
    """The same CPD with extra parents it does not depend on"""
    if parent_scope == cpd.parent_scope:
        return cpd
    target = parent_scope + cpd.child_scope
    arr = align(cpd.as_array().ravel(), cpd.parent_scope + cpd.child_scope, target)
    arr = np.broadcast_to(arr, tuple(v.cardinality for v in target))
    return Cpd.from_array(cpd.child_scope, parent_scope, arr)


def referenced_factors(model: DbnModel, factorization: Factorization, names: Sequence[str]) -> List[int]:
    """Indices of the previous-slice factors the CPDs of `names` read from, in factor order"""
    used = set()
    for name in names:
        for parent in model.transition_cpd(name).parent_names:
            used.add(factorization.factor_of(parent))
    return sorted(used)


def factor_parent_groups(model: DbnModel, factorization: Factorization, i: int) -> List[Tuple[str, ...]]:
    """Previous-slice parent groups (one per referenced factor) of factor i's transition CPD"""
    if not 0 <= i < len(factorization):
        raise ScopeError(f"Factor index {i} out of range for {factorization.label}")
    return [
        tuple(n + PREVIOUS_SUFFIX for n in factorization.factors[j])
        for j in referenced_factors(model, factorization, factorization.factors[i])
    ]


def factor_transition_cpd(model: DbnModel, factorization: Factorization, i: int) -> Cpd:
    """
    Transition CPD of factor i as one table

    Args:
        model: Model supplying the member-variable CPDs
        factorization: Partition of the state variables
        i: Factor index

    Returns:
        Cpd with child scope = factor i's variables and parent scope = the
        previous-slice factors its members read from (whole factors, in
        factor order); each row is the product of the member rows

    Raises:
        ScopeError: If i is out of range
    """
    groups = factor_parent_groups(model, factorization, i)
    parent_scope = select(model.previous_vars, [n for g in groups for n in g])
    child_scope = select(model.state_vars, factorization.factors[i])
    target = parent_scope + child_scope
    arr = np.ones((1,) * len(target))
    for name in factorization.factors[i]:
        cpd = model.transition_cpd(name)
        arr = arr * align(cpd.as_array().ravel(), cpd.parent_scope + cpd.child_scope, target)
    arr = np.broadcast_to(arr, tuple(v.cardinality for v in target))
    return Cpd.from_array(child_scope, parent_scope, arr)
