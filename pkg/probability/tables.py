# probability/tables.py - Variables, categorical tables, signed tables and CPDs

import re
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from config import Tolerances
from .errors import NormalizationError, ScopeError

PREVIOUS_SUFFIX = "-"

_NAME_PATTERN = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*-?$")

# Sums this close to 1 are float rounding; leaving them keeps file round-trips bit-exact
_ROUNDING = 4 * np.finfo(float).eps


@dataclass(frozen=True)
class VariableSpec:
    """A discrete variable: a name and the number of values it takes"""

    name: str
    cardinality: int

    def __post_init__(self):
        if not isinstance(self.name, str) or not _NAME_PATTERN.match(self.name):
            raise ScopeError(f"Invalid variable name {self.name!r}")
        if int(self.cardinality) != self.cardinality or self.cardinality < 2:
            raise ScopeError(f"Variable {self.name} needs cardinality >= 2, got {self.cardinality}")

    @property
    def is_previous(self) -> bool:
        """True for a previous-slice copy (name ends in '-')"""
        return self.name.endswith(PREVIOUS_SUFFIX)

    @property
    def base_name(self) -> str:
        """Name with any previous-slice suffix removed"""
        return self.name[:-1] if self.is_previous else self.name

    def previous(self) -> 'VariableSpec':
        """Previous-slice copy of this variable"""
        if self.is_previous:
            raise ScopeError(f"{self.name} is already a previous-slice variable")
        return VariableSpec(self.name + PREVIOUS_SUFFIX, self.cardinality)

    def current(self) -> 'VariableSpec':
        """Current-slice copy of this variable"""
        return VariableSpec(self.base_name, self.cardinality)


Scope = Tuple[VariableSpec, ...]
VariableRef = Union[str, VariableSpec]


def make_scope(variables: Iterable[VariableSpec]) -> Scope:
    """Validate that variable names are unique and return the scope as a tuple"""
    scope = tuple(variables)
    names = [v.name for v in scope]
    if len(set(names)) != len(names):
        duplicates = sorted({n for n in names if names.count(n) > 1})
        raise ScopeError(f"Duplicate variables in scope: {', '.join(duplicates)}")
    return scope


def scope_names(scope: Scope) -> Tuple[str, ...]:
    return tuple(v.name for v in scope)


def scope_shape(scope: Scope) -> Tuple[int, ...]:
    return tuple(v.cardinality for v in scope)


def scope_size(scope: Scope) -> int:
    return int(np.prod(scope_shape(scope), dtype=np.int64))


def ref_name(ref: VariableRef) -> str:
    return ref.name if isinstance(ref, VariableSpec) else ref


def select(scope: Scope, refs: Iterable[VariableRef]) -> Scope:
    """
    Look up variables of a scope by name, preserving the requested order

    Raises:
        ScopeError: If a name is not in the scope
    """
    by_name = {v.name: v for v in scope}
    selected = []
    for ref in refs:
        name = ref_name(ref)
        if name not in by_name:
            raise ScopeError(f"Variable {name} is not in scope ({', '.join(by_name)})")
        selected.append(by_name[name])
    return make_scope(selected)


def index_of(scope: Scope, assignment: Sequence[int]) -> int:
    """Flat index of an assignment (last variable fastest)"""
    if len(assignment) != len(scope):
        raise ScopeError(f"Assignment {tuple(assignment)} does not match scope of {len(scope)} variables")
    if not scope:
        return 0
    return int(np.ravel_multi_index(tuple(int(a) for a in assignment), scope_shape(scope)))


def assignment_of(scope: Scope, index: int) -> Tuple[int, ...]:
    """Assignment vector for a flat index (inverse of index_of)"""
    if not scope:
        return ()
    return tuple(int(i) for i in np.unravel_index(int(index), scope_shape(scope)))


def align(values: np.ndarray, scope: Scope, target: Scope) -> np.ndarray:
    """
    Reshape a flat table over `scope` so it broadcasts against a table over `target`

    Args:
        values: Flat array indexed by `scope`
        scope: Scope of `values`, must be a subset of `target`
        target: Scope to align with

    Returns:
        Array with one axis per target variable (size 1 where `scope` lacks it)
    """
    target_names = scope_names(target)
    positions = []
    for v in scope:
        if v.name not in target_names:
            raise ScopeError(f"Variable {v.name} is not in target scope ({', '.join(target_names)})")
        positions.append(target_names.index(v.name))

    arr = np.asarray(values).reshape(scope_shape(scope)) if scope else np.asarray(values).reshape(())
    # Sort own axes into target order, then insert singleton axes for the rest
    order = np.argsort(positions)
    arr = np.transpose(arr, order)
    shape = [1] * len(target)
    for axis in order:
        shape[positions[axis]] = scope[axis].cardinality
    return arr.reshape(shape)


class Categorical:
    """
    Normalized probability table over an ordered scope.

    Values are flat, indexed lexicographically with the last scope variable
    varying fastest. Instances are immutable.
    """

    __slots__ = ("scope", "values")

    def __init__(self, scope: Iterable[VariableSpec], values, tol: float = Tolerances.NORMALIZATION):
        scope = make_scope(scope)
        arr = np.array(values, dtype=float).ravel()
        if arr.size != scope_size(scope):
            raise NormalizationError(
                f"Table over ({', '.join(scope_names(scope))}) needs {scope_size(scope)} values, got {arr.size}"
            )
        if not np.all(np.isfinite(arr)):
            raise NormalizationError("Table contains non-finite values")
        if arr.min() < -tol:
            raise NormalizationError(f"Negative probability {arr.min():.3g}")
        arr = np.clip(arr, 0.0, None)
        total = arr.sum()
        if abs(total - 1.0) > tol:
            raise NormalizationError(f"Probabilities sum to {total!r}, not 1")
        if abs(total - 1.0) > _ROUNDING * arr.size:
            arr = arr / total
        arr.setflags(write=False)
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Categorical is immutable")

    @classmethod
    def normalized(cls, scope: Iterable[VariableSpec], weights) -> 'Categorical':
        """
        Build a Categorical from nonnegative weights by dividing by their sum

        Raises:
            NormalizationError: If the weights sum to zero or contain negatives
        """
        arr = np.array(weights, dtype=float).ravel()
        total = arr.sum()
        if not total > 0.0:
            raise NormalizationError("Cannot normalize weights that sum to zero")
        return cls(scope, arr / total)

    @classmethod
    def uniform(cls, scope: Iterable[VariableSpec]) -> 'Categorical':
        scope = make_scope(scope)
        n = scope_size(scope)
        return cls(scope, np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, scope: Iterable[VariableSpec], assignment: Sequence[int]) -> 'Categorical':
        scope = make_scope(scope)
        arr = np.zeros(scope_size(scope))
        arr[index_of(scope, assignment)] = 1.0
        return cls(scope, arr)

    @property
    def names(self) -> Tuple[str, ...]:
        return scope_names(self.scope)

    @property
    def shape(self) -> Tuple[int, ...]:
        return scope_shape(self.scope)

    def as_array(self) -> np.ndarray:
        """Values reshaped to one axis per scope variable"""
        return self.values.reshape(self.shape)

    def probability(self, assignment: Sequence[int]) -> float:
        return float(self.values[index_of(self.scope, assignment)])

    def allclose(self, other: 'Categorical', atol: float = 1e-12) -> bool:
        return self.scope == other.scope and bool(np.allclose(self.values, other.values, rtol=0.0, atol=atol))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Categorical):
            return NotImplemented
        return self.scope == other.scope and np.array_equal(self.values, other.values)

    __hash__ = None

    def __repr__(self) -> str:
        return f"Categorical({', '.join(self.names)}: {np.array2string(self.values, precision=6)})"


class SignedTable:
    """
    Real-valued table over a scope whose entries sum to zero.

    Holds differences between a joint and a product of its marginals.
    """

    __slots__ = ("scope", "values")

    def __init__(self, scope: Iterable[VariableSpec], values, tol: float = Tolerances.NORMALIZATION):
        scope = make_scope(scope)
        arr = np.array(values, dtype=float).ravel()
        if arr.size != scope_size(scope):
            raise NormalizationError(f"Signed table needs {scope_size(scope)} values, got {arr.size}")
        if abs(arr.sum()) > tol:
            raise NormalizationError(f"Signed table entries sum to {arr.sum()!r}, not 0")
        arr.setflags(write=False)
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("SignedTable is immutable")

    @property
    def names(self) -> Tuple[str, ...]:
        return scope_names(self.scope)

    def as_array(self) -> np.ndarray:
        return self.values.reshape(scope_shape(self.scope))

    def __repr__(self) -> str:
        return f"SignedTable({', '.join(self.names)}: {np.array2string(self.values, precision=6)})"


class Cpd:
    """
    Conditional probability table P(child_scope | parent_scope).

    `table` has one row per parent assignment (lexicographic, last parent
    fastest) and one column per child assignment. Rows are normalized on
    construction.
    """

    __slots__ = ("child_scope", "parent_scope", "table")

    def __init__(self, child_scope: Iterable[VariableSpec], parent_scope: Iterable[VariableSpec],
                 table, tol: float = Tolerances.NORMALIZATION):
        child_scope = make_scope(child_scope)
        parent_scope = make_scope(parent_scope)
        if not child_scope:
            raise ScopeError("CPD needs at least one child variable")
        make_scope(child_scope + parent_scope)

        n_rows, n_cols = scope_size(parent_scope), scope_size(child_scope)
        arr = np.array(table, dtype=float)
        if arr.size != n_rows * n_cols:
            raise NormalizationError(
                f"CPD of {', '.join(scope_names(child_scope))} needs {n_rows}x{n_cols} entries, got {arr.size}"
            )
        arr = arr.reshape(n_rows, n_cols)
        if not np.all(np.isfinite(arr)):
            raise NormalizationError("CPD contains non-finite values")
        if arr.min() < -tol:
            row = int(np.argmin(arr.min(axis=1)))
            raise NormalizationError(f"Negative probability in row {row} of {', '.join(scope_names(child_scope))}")
        arr = np.clip(arr, 0.0, None)
        sums = arr.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
        if bad.size:
            raise NormalizationError(
                f"Row {int(bad[0])} of CPD for {', '.join(scope_names(child_scope))} sums to {sums[bad[0]]!r}"
            )
        drift = np.abs(sums - 1.0) > _ROUNDING * n_cols
        if drift.any():
            arr[drift] = arr[drift] / sums[drift, None]
        arr.setflags(write=False)
        object.__setattr__(self, "child_scope", child_scope)
        object.__setattr__(self, "parent_scope", parent_scope)
        object.__setattr__(self, "table", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Cpd is immutable")

    @classmethod
    def from_array(cls, child_scope: Iterable[VariableSpec], parent_scope: Iterable[VariableSpec],
                   arr: np.ndarray) -> 'Cpd':
        """Build a CPD from an array shaped parent axes followed by child axes"""
        return cls(child_scope, parent_scope, np.asarray(arr).reshape(-1))

    @classmethod
    def uniform(cls, child_scope: Iterable[VariableSpec], parent_scope: Iterable[VariableSpec]) -> 'Cpd':
        child_scope, parent_scope = make_scope(child_scope), make_scope(parent_scope)
        n_cols = scope_size(child_scope)
        return cls(child_scope, parent_scope, np.full((scope_size(parent_scope), n_cols), 1.0 / n_cols))

    @classmethod
    def identity(cls, child: VariableSpec, parent: VariableSpec) -> 'Cpd':
        """I(child | parent): the child copies the parent's value"""
        if child.cardinality != parent.cardinality:
            raise ScopeError(f"Identity CPD needs equal cardinalities ({child.name}, {parent.name})")
        return cls((child,), (parent,), np.eye(child.cardinality))

    @property
    def child_names(self) -> Tuple[str, ...]:
        return scope_names(self.child_scope)

    @property
    def parent_names(self) -> Tuple[str, ...]:
        return scope_names(self.parent_scope)

    @property
    def rows(self) -> List[Categorical]:
        return [Categorical(self.child_scope, r) for r in self.table]

    def row(self, parent_assignment: Sequence[int]) -> Categorical:
        return Categorical(self.child_scope, self.table[index_of(self.parent_scope, parent_assignment)])

    def as_array(self) -> np.ndarray:
        """Table reshaped to parent axes followed by child axes"""
        return self.table.reshape(scope_shape(self.parent_scope) + scope_shape(self.child_scope))

    def allclose(self, other: 'Cpd', atol: float = 1e-12) -> bool:
        return (self.child_scope == other.child_scope and self.parent_scope == other.parent_scope
                and bool(np.allclose(self.table, other.table, rtol=0.0, atol=atol)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Cpd):
            return NotImplemented
        return (self.child_scope == other.child_scope and self.parent_scope == other.parent_scope
                and np.array_equal(self.table, other.table))

    __hash__ = None

    def __repr__(self) -> str:
        return f"Cpd({', '.join(self.child_names)} | {', '.join(self.parent_names)})"
