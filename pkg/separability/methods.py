# separability/methods.py - Method selection and cross-checking for degree computations

import logging
from dataclasses import dataclass
from typing import Optional

from config import Tolerances
from probability.errors import ScopeError
from probability.tables import Cpd, scope_size
from .closed_form import degree_case1, degree_case2, degree_case3
from .lp import degree_lp
from .persistence import persistence
from .types import Grouping, PersistenceResult, SeparableDecomposition

logger = logging.getLogger(__name__)

METHODS = ("auto", "lp", "case1", "case2", "case3", "persistence")

_CLOSED_FORMS = {
    "case1": degree_case1,
    "case2": degree_case2,
    "case3": degree_case3,
}


@dataclass(frozen=True)
class Verification:
    """LP and closed-form (or persistence) results side by side"""
    method: str
    alpha: float
    lp_alpha: float
    gap: float
    recombination_error: float
    lp_recombination_error: float


@dataclass(frozen=True)
class DegreeAnalysis:
    method: str
    alpha: float
    decomposition: Optional[SeparableDecomposition] = None
    persistence: Optional[PersistenceResult] = None
    verification: Optional[Verification] = None


def choose_method(cpd: Cpd, grouping: Grouping) -> str:
    """Most specific closed form whose shape fits, else "lp" """
    scopes = grouping.scopes(cpd)
    if len(scopes) != 2:
        return "lp"
    first, second = (scope_size(s) for s in scopes)
    n_child = cpd.table.shape[1]
    if first == 2 and second == 2:
        return "case1" if n_child == 2 else "case2"
    if first == 2 and n_child == 2:
        return "case3"
    return "lp"


def degree(cpd: Cpd, grouping: Grouping, method: str = "auto") -> SeparableDecomposition:
    """
    Degree of separability by the named method

    Raises:
        ScopeError: For an unknown method or a shape the closed form does not cover
    """
    if method == "auto":
        method = choose_method(cpd, grouping)
    if method == "lp":
        return degree_lp(cpd, grouping)
    if method in _CLOSED_FORMS:
        decomposition, _ = _CLOSED_FORMS[method](cpd, grouping)
        return decomposition
    raise ScopeError(f"Unknown degree method {method!r}; expected one of {', '.join(METHODS[:-1])}")


def analyze_cpd(cpd: Cpd, grouping: Optional[Grouping], method: str = "auto",
                verify: bool = False) -> DegreeAnalysis:
    """
    Run one method and optionally cross-check it against the LP

    Args:
        cpd: Table to analyze
        grouping: Parent grouping (ignored by "persistence"; required otherwise)
        method: One of METHODS
        verify: Also run the LP and report the gap and recombination errors

    Returns:
        DegreeAnalysis

    Raises:
        ScopeError: For an unknown method, a missing grouping or a shape mismatch
    """
    if method not in METHODS:
        raise ScopeError(f"Unknown degree method {method!r}; expected one of {', '.join(METHODS)}")

    if method == "persistence":
        result = persistence(cpd)
        verification = None
        if verify:
            lp = degree_lp(cpd, grouping or Grouping.halves(cpd))
            recombined = result.recombine()
            error = float(abs(recombined.table - cpd.table).max())
            verification = Verification("persistence", result.kappa, lp.alpha, lp.alpha - result.kappa,
                                        error, lp.reconstruction_error(cpd))
            if lp.alpha < result.kappa - Tolerances.LP:
                logger.warning(f"analyze: LP degree {lp.alpha:.6f} below persistence {result.kappa:.6f}")
        return DegreeAnalysis("persistence", result.kappa, persistence=result, verification=verification)

    if grouping is None:
        raise ScopeError(f"Method {method} needs a parent grouping")
    chosen = choose_method(cpd, grouping) if method == "auto" else method
    decomposition = degree(cpd, grouping, chosen)
    verification = None
    if verify:
        lp = decomposition if chosen == "lp" else degree_lp(cpd, grouping)
        gap = abs(decomposition.alpha - lp.alpha)
        verification = Verification(chosen, decomposition.alpha, lp.alpha, gap,
                                    decomposition.reconstruction_error(cpd), lp.reconstruction_error(cpd))
        if gap > Tolerances.LP:
            logger.warning(f"analyze: {chosen} gives {decomposition.alpha:.9f}, LP gives {lp.alpha:.9f}")
    return DegreeAnalysis(chosen, decomposition.alpha, decomposition=decomposition, verification=verification)
