# separability/sufficiency.py - Witnesses that a CPD is not sufficient for its group marginals

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from config import Separability, Tolerances
from probability.ops import apply_cpd
from probability.tables import Categorical, Cpd
from .closed_form import parent_grid
from .types import Grouping


@dataclass(frozen=True)
class SufficiencyWitness:
    """Two parent joints with equal group marginals but different outputs"""
    pi1: Categorical
    pi2: Categorical
    phi1: Categorical
    phi2: Categorical
    max_difference: float


def _largest_rectangle(grid: np.ndarray) -> Tuple[float, Optional[Tuple[int, int, int, int]]]:
    """Rectangle (j, j', k, k') with the largest |p(i|j,k) - p(i|j,k') - p(i|j',k) + p(i|j',k')|"""
    best: Tuple[float, Optional[Tuple[int, int, int, int]]] = (0.0, None)
    J, K = grid.shape[:2]
    for j in range(J):
        for j2 in range(j + 1, J):
            for k in range(K):
                for k2 in range(k + 1, K):
                    d = grid[j, k] - grid[j, k2] - grid[j2, k] + grid[j2, k2]
                    size = float(np.max(np.abs(d)))
                    if size > best[0]:
                        best = (size, (j, j2, k, k2))
    return best


def max_mixed_difference(cpd: Cpd, grouping: Grouping) -> float:
    """Zero exactly when the CPD is additive in its two parent groups"""
    grid, _, _ = parent_grid(cpd, grouping, "mixed difference")
    return _largest_rectangle(grid)[0]


def sufficiency_witness(cpd: Cpd, grouping: Grouping) -> Optional[SufficiencyWitness]:
    """
    Look for two parent joints with the same group marginals but different outputs

    The witness perturbs an independent base joint along the correlation
    direction of the rectangle (j, j', k, k') with the largest mixed
    difference: +t on (j, k) and (j', k'), -t on (j, k') and (j', k). The
    base marginals are searched on a grid and t is taken as large as the
    base joint allows.

    Args:
        cpd: Table to test
        grouping: Exactly two parent groups

    Returns:
        SufficiencyWitness, or None when every mixed difference is below
        Tolerances.SEPARABLE (the CPD is separable, hence sufficient)

    Raises:
        ScopeError: If the grouping does not have two groups
    """
    grid, _, indices = parent_grid(cpd, grouping, "sufficiency witness")
    J, K, _ = grid.shape

    size, rectangle = _largest_rectangle(grid)
    if rectangle is None or size <= Tolerances.SEPARABLE:
        return None
    j, j2, k, k2 = rectangle

    levels = np.linspace(0.0, 1.0, Separability.WITNESS_GRID + 2)[1:-1]
    chosen = None
    for a in levels:
        for b in levels:
            up = min(a * b, (1 - a) * (1 - b))
            down = min(a * (1 - b), (1 - a) * b)
            t = up if up >= down else -down
            if chosen is None or abs(t) > abs(chosen[2]) + 1e-15:
                chosen = (a, b, t)
    a, b, t = chosen

    base = np.zeros((J, K))
    base[j, k], base[j, k2], base[j2, k], base[j2, k2] = a * b, a * (1 - b), (1 - a) * b, (1 - a) * (1 - b)
    shifted = base.copy()
    shifted[j, k] += t
    shifted[j2, k2] += t
    shifted[j, k2] -= t
    shifted[j2, k] -= t

    pi1 = Categorical(cpd.parent_scope, base[indices[0], indices[1]])
    pi2 = Categorical(cpd.parent_scope, np.clip(shifted[indices[0], indices[1]], 0.0, None))
    phi1, phi2 = apply_cpd(cpd, pi1), apply_cpd(cpd, pi2)
    return SufficiencyWitness(pi1, pi2, phi1, phi2, float(np.max(np.abs(phi1.values - phi2.values))))
