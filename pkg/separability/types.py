# separability/types.py - Groupings and decomposition results

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

import numpy as np

from config import Separability, Tolerances
from model.dbn import widen_cpd
from probability.errors import ScopeError, UnsupportedArityError
from probability.tables import Cpd, Scope, select


@dataclass(frozen=True, init=False)
class Grouping:
    """Ordered partition of a CPD's parent scope into disjoint groups"""
    groups: Tuple[Tuple[str, ...], ...]

    def __init__(self, groups: Iterable[Iterable[str]]):
        object.__setattr__(self, "groups", tuple(tuple(g) for g in groups))
        if any(not g for g in self.groups):
            raise ScopeError("Empty group in grouping")

    @classmethod
    def parse(cls, text: str) -> 'Grouping':
        """Parse "X-,W-|Y-,Z-": groups split by '|', variables by ','"""
        groups = []
        for part in text.split("|"):
            names = [n.strip() for n in part.split(",") if n.strip()]
            if not names:
                raise ScopeError(f"Empty group in {text!r}")
            groups.append(names)
        return cls(groups)

    def __len__(self) -> int:
        return len(self.groups)

    @property
    def label(self) -> str:
        return "|".join(",".join(g) for g in self.groups)

    def scopes(self, cpd: Cpd) -> List[Scope]:
        """
        Parent variables of each group, checked against the CPD

        Raises:
            ScopeError: If the groups do not partition the parent scope
            UnsupportedArityError: If there are more than Separability.MAX_GROUPS groups
        """
        if len(self.groups) > Separability.MAX_GROUPS:
            raise UnsupportedArityError(
                f"{len(self.groups)} parent groups; at most {Separability.MAX_GROUPS} are supported"
            )
        scopes = [select(cpd.parent_scope, g) for g in self.groups]
        named = [v.name for s in scopes for v in s]
        if len(set(named)) != len(named):
            raise ScopeError(f"Groups overlap in {self.label}")
        missing = [n for n in cpd.parent_names if n not in named]
        if missing:
            raise ScopeError(f"Grouping {self.label} misses parents {', '.join(missing)}")
        return scopes

    @classmethod
    def halves(cls, cpd: Cpd) -> 'Grouping':
        """Default two-group split: first parent against the rest"""
        if len(cpd.parent_scope) < 2:
            raise ScopeError(f"CPD of {', '.join(cpd.child_names)} needs two parents to be grouped")
        names = cpd.parent_names
        return cls([names[:1], names[1:]])


@dataclass(frozen=True)
class ClosedFormTrace:
    """Intermediate quantities of a closed-form degree computation"""
    case: str
    deviations: np.ndarray
    partial_sums: Optional[np.ndarray] = None
    C_star: Optional[float] = None
    C_substar: Optional[float] = None
    G: Optional[float] = None
    B_values: Optional[np.ndarray] = None


@dataclass(frozen=True)
class SeparableDecomposition:
    """
    P = sum_g w_g P_g(child | group g) + (1 - alpha) P_residual(child | all parents)

    `group_weights` sum to alpha and may be negative individually.
    `residual` is None when the residual weight is zero.
    """
    alpha: float
    group_weights: Tuple[float, ...]
    components: Tuple[Cpd, ...]
    residual_weight: float
    residual: Optional[Cpd]
    grouping: Grouping
    parent_scope: Scope
    method: str = "lp"
    nonnegative_weights: bool = True
    trace: Optional[ClosedFormTrace] = field(default=None, compare=False)

    @property
    def gamma(self) -> Optional[float]:
        """Weight share of the first group (two-group decompositions with alpha > 0)"""
        if len(self.group_weights) != 2 or self.alpha <= 0.0:
            return None
        return self.group_weights[0] / self.alpha

    def recombined_table(self) -> np.ndarray:
        """Rows of sum_g w_g P_g + (1 - alpha) P_residual over the original parent scope"""
        table = sum(w * widen_cpd(c, self.parent_scope).table
                    for w, c in zip(self.group_weights, self.components))
        if self.residual is not None:
            table = table + self.residual_weight * self.residual.table
        return np.asarray(table)

    def recombine(self) -> Cpd:
        """Rebuild the decomposed CPD"""
        child_scope = self.components[0].child_scope
        table = np.clip(self.recombined_table(), 0.0, None)
        return Cpd(child_scope, self.parent_scope, table, tol=Tolerances.LP)

    def reconstruction_error(self, cpd: Cpd) -> float:
        """Max cellwise difference between the recombination and `cpd`"""
        return float(np.max(np.abs(self.recombined_table() - cpd.table)))


@dataclass(frozen=True)
class PersistenceResult:
    """P = kappa I(X | X-) + (1 - kappa) P_residual"""
    kappa: float
    identity_component: Cpd
    residual: Optional[Cpd]
    parent_scope: Scope

    def recombine(self) -> Cpd:
        table = self.kappa * widen_cpd(self.identity_component, self.parent_scope).table
        if self.residual is not None:
            table = table + (1.0 - self.kappa) * self.residual.table
        return Cpd(self.identity_component.child_scope, self.parent_scope, table, tol=Tolerances.CLOSED_FORM)
