# separability/factorization.py - Self-sufficiency checks and factorization search

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from config import Separability, Tolerances
from model.dbn import (
    DbnModel,
    Factorization,
    factor_parent_groups,
    factor_transition_cpd,
    referenced_factors,
    widen_cpd,
)
from probability.errors import EnumerationGuardError, ScopeError, UnsupportedArityError
from probability.tables import PREVIOUS_SUFFIX, select
from .lp import degree_lp
from .types import Grouping

logger = logging.getLogger(__name__)

LEVELS = ("variable", "factor")


@dataclass(frozen=True)
class SelfSufficiency:
    """Per-factor degrees of separability of a factorization"""
    factorization: Factorization
    degrees: Tuple[float, ...]
    sufficient: bool
    level: str

    @property
    def min_degree(self) -> float:
        return min(self.degrees)

    @property
    def mean_degree(self) -> float:
        return float(np.mean(self.degrees))


@dataclass(frozen=True)
class RankedFactorization:
    factorization: Factorization
    min_degree: float
    mean_degree: float
    degrees: Tuple[float, ...]


class _DegreeCache:
    """Degrees keyed by (child names, parent groups); shared across candidate factorizations"""

    def __init__(self):
        self._values: Dict[Tuple, float] = {}
        self.hits = 0

    def get(self, key: Tuple, compute: Callable[[], float]) -> float:
        if key in self._values:
            self.hits += 1
        else:
            self._values[key] = compute()
        return self._values[key]


def _variable_degree(model: DbnModel, factorization: Factorization, name: str) -> Tuple[Tuple, Callable[[], float]]:
    groups = [
        tuple(n + PREVIOUS_SUFFIX for n in factorization.factors[j])
        for j in referenced_factors(model, factorization, [name])
    ]

    def compute() -> float:
        if len(groups) < 2:
            return 1.0
        cpd = model.transition_cpd(name)
        widened = widen_cpd(cpd, select(model.previous_vars, [n for g in groups for n in g]))
        return degree_lp(widened, Grouping(groups)).alpha

    return (("variable", name), tuple(groups)), compute


def _factor_degree(model: DbnModel, factorization: Factorization, i: int) -> Tuple[Tuple, Callable[[], float]]:
    groups = factor_parent_groups(model, factorization, i)

    def compute() -> float:
        if len(groups) < 2:
            return 1.0
        return degree_lp(factor_transition_cpd(model, factorization, i), Grouping(groups)).alpha

    return (("factor",) + factorization.factors[i], tuple(groups)), compute


def _degrees(model: DbnModel, factorization: Factorization, level: str,
             cache: Optional[_DegreeCache] = None) -> Tuple[float, ...]:
    if level not in LEVELS:
        raise ScopeError(f"Unknown self-sufficiency level {level!r}; expected one of {', '.join(LEVELS)}")
    factorization.validate(model.state_names)
    cache = cache or _DegreeCache()
    degrees = []
    for i, members in enumerate(factorization.factors):
        if level == "factor":
            key, compute = _factor_degree(model, factorization, i)
            degrees.append(cache.get(key, compute))
        else:
            values = []
            for name in members:
                key, compute = _variable_degree(model, factorization, name)
                values.append(cache.get(key, compute))
            degrees.append(min(values))
    return tuple(degrees)


def is_self_sufficient(model: DbnModel, factorization: Optional[Factorization] = None,
                       tol: float = Tolerances.LP, level: str = "variable") -> SelfSufficiency:
    """
    Degree of separability of every factor's transition with respect to the factors it reads from

    At the "variable" level each member CPD P(X | parents) is widened to
    the whole previous-slice factors it reads from and grouped by factor;
    the factor's degree is the smallest member degree. At the "factor"
    level the product of the member CPDs is decomposed as one table, which
    is stricter: cross terms between two different parent factors of two
    members count against it. A factor that reads from a single factor has
    degree 1.

    Args:
        model: Model to check
        factorization: Partition to check (defaults to the model's own)
        tol: Degrees at or above 1 - tol count as 1
        level: "variable" or "factor"

    Returns:
        SelfSufficiency with one degree per factor

    Raises:
        ModelValidationError: If the factorization does not partition the state
        UnsupportedArityError: If a factor reads from more than four factors
    """
    factorization = factorization or model.factorization
    degrees = _degrees(model, factorization, level)
    sufficient = all(d >= 1.0 - tol for d in degrees)
    logger.debug(f"self-sufficiency of {factorization.label} ({level}): {degrees}")
    return SelfSufficiency(factorization, degrees, sufficient, level)


def set_partitions(names: Sequence[str], max_size: Optional[int] = None) -> Iterator[List[List[str]]]:
    """All partitions of `names` into blocks ordered by their first element"""
    names = list(names)
    if not names:
        yield []
        return
    first, rest = names[0], names[1:]
    for partition in set_partitions(rest, max_size):
        # first element opens a block of its own or joins an existing one
        yield [[first]] + partition
        for i, block in enumerate(partition):
            if max_size is None or len(block) < max_size:
                yield partition[:i] + [[first] + block] + partition[i + 1:]


def _canonical(partition: List[List[str]], order: Sequence[str]) -> Factorization:
    position = {n: i for i, n in enumerate(order)}
    blocks = [sorted(b, key=position.__getitem__) for b in partition]
    blocks.sort(key=lambda b: position[b[0]])
    return Factorization(blocks)


def search_factorization(model: DbnModel, max_factor_size: int,
                         level: str = "variable") -> List[RankedFactorization]:
    """
    Rank the partitions of the state variables by degree of separability

    The single factor holding every variable is left out when the model has
    more than one state variable: it is exact filtering, not an
    approximation. Partitions with a factor that reads from more than four
    factors are skipped.

    Args:
        model: Model whose state variables are partitioned
        max_factor_size: Largest factor allowed
        level: Self-sufficiency level, see is_self_sufficient

    Returns:
        Candidates sorted by minimum degree, then mean degree (both
        descending), then fewer factors, then label

    Raises:
        EnumerationGuardError: For more than Separability.ENUMERATION_GUARD state variables
    """
    names = model.state_names
    if len(names) > Separability.ENUMERATION_GUARD:
        raise EnumerationGuardError(
            f"{len(names)} state variables; factorization search enumerates at most "
            f"{Separability.ENUMERATION_GUARD}. Check candidate factorizations with is_self_sufficient instead"
        )
    if max_factor_size < 1:
        raise ScopeError(f"max_factor_size must be at least 1, got {max_factor_size}")

    cache = _DegreeCache()
    ranked, skipped = [], 0
    for partition in set_partitions(names, max_factor_size):
        if len(partition) == 1 and len(names) > 1:
            continue
        factorization = _canonical(partition, names)
        try:
            degrees = _degrees(model, factorization, level, cache)
        except UnsupportedArityError as e:
            skipped += 1
            logger.debug(f"search_factorization: skipping {factorization.label}: {e}")
            continue
        ranked.append(RankedFactorization(factorization, min(degrees), float(np.mean(degrees)), degrees))

    if skipped:
        logger.info(f"search_factorization: skipped {skipped} partitions with too many parent factors")
    logger.info(f"search_factorization: {len(ranked)} candidates, {cache.hits} cached degrees reused")
    ranked.sort(key=lambda r: (-round(r.min_degree, 9), -round(r.mean_degree, 9),
                               len(r.factorization), r.factorization.label))
    return ranked
