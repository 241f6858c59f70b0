# separability/closed_form.py - Closed-form degree of separability for small shapes

import logging
from typing import List, Tuple

import numpy as np

from config import Tolerances
from probability.errors import ScopeError
from probability.tables import Cpd, Scope, scope_size
from .lp import group_indices
from .types import ClosedFormTrace, Grouping, SeparableDecomposition

logger = logging.getLogger(__name__)


def parent_grid(cpd: Cpd, grouping: Grouping, case: str) -> Tuple[np.ndarray, List[Scope], List[np.ndarray]]:
    """Table as p[j, k, i] = P(z_i | x_j, y_k) for a two-group split"""
    scopes = grouping.scopes(cpd)
    if len(scopes) != 2:
        raise ScopeError(f"{case} needs exactly two parent groups, got {len(scopes)}")
    indices = group_indices(cpd, scopes)
    grid = np.zeros((scope_size(scopes[0]), scope_size(scopes[1]), cpd.table.shape[1]))
    grid[indices[0], indices[1]] = cpd.table
    return grid, scopes, indices


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ScopeError(message)


def _split_separable(S: np.ndarray, alpha: float) -> Tuple[float, float, np.ndarray, np.ndarray]:
    """
    Write an additive table S[j, k, i] = f[j, i] + g[k, i] as w1 P_X + w2 P_Y

    Returns:
        (w1, w2, P_X rows, P_Y rows); w2 is negative only when S has negative cells
    """
    n = S.shape[2]
    f = S.mean(axis=1)
    g = S.mean(axis=0) - S.mean(axis=(0, 1))
    off = float(np.max(np.abs(S - (f[:, None, :] + g[None, :, :]))))
    if off > Tolerances.CLOSED_FORM:
        logger.warning(f"closed form: separable part is not additive (off by {off:.3g})")

    if S.min() >= -Tolerances.CLOSED_FORM:
        shift = -f.min(axis=0)
    else:
        shift = np.maximum(-f.min(axis=0), g.max(axis=0))
    x_part = f + shift
    y_part = g - shift
    w2 = float(y_part.sum(axis=1).mean())
    w1 = alpha - w2

    def rows(part: np.ndarray, weight: float) -> np.ndarray:
        if abs(weight) <= 1e-12:
            return np.full(part.shape, 1.0 / n)
        r = np.clip(part / weight, 0.0, None)
        return r / r.sum(axis=1, keepdims=True)

    return w1, w2, rows(x_part, w1), rows(y_part, w2)


def _decomposition(cpd: Cpd, grouping: Grouping, scopes: List[Scope], indices: List[np.ndarray],
                   grid: np.ndarray, alpha: float, residual_grid, trace: ClosedFormTrace) -> SeparableDecomposition:
    residual_weight = 1.0 - alpha
    if residual_grid is None:
        S = grid
        residual = None
    else:
        S = grid - residual_weight * residual_grid
        residual = Cpd(cpd.child_scope, cpd.parent_scope, residual_grid[indices[0], indices[1]])
    w1, w2, px, py = _split_separable(S, alpha)
    decomposition = SeparableDecomposition(
        alpha=alpha,
        group_weights=(w1, w2),
        components=(Cpd(cpd.child_scope, scopes[0], px), Cpd(cpd.child_scope, scopes[1], py)),
        residual_weight=residual_weight,
        residual=residual,
        grouping=grouping,
        parent_scope=cpd.parent_scope,
        method=trace.case,
        nonnegative_weights=w1 >= -1e-12 and w2 >= -1e-12,
        trace=trace,
    )
    error = decomposition.reconstruction_error(cpd)
    if error > Tolerances.CLOSED_FORM:
        logger.warning(f"{trace.case}: recombination of {', '.join(cpd.child_names)} is off by {error:.3g}")
    return decomposition


def _mixed_differences(grid: np.ndarray) -> np.ndarray:
    """A_i = p(i|x2y2) - p(i|x2y1) - p(i|x1y2) + p(i|x1y1)"""
    return grid[1, 1] - grid[1, 0] - grid[0, 1] + grid[0, 0]


def _diagonal_residual(A: np.ndarray, G: float) -> np.ndarray:
    residual = np.zeros((2, 2, A.size))
    positive = A > 0.0
    residual[1, 1, positive] = residual[0, 0, positive] = A[positive] / G
    residual[1, 0, ~positive] = residual[0, 1, ~positive] = -A[~positive] / G
    return residual


def degree_case2(cpd: Cpd, grouping: Grouping) -> Tuple[SeparableDecomposition, ClosedFormTrace]:
    """
    Binary parent groups, child with any number of values

    alpha = 1 - G/2 where G sums the positive deviations A_i. The residual
    puts A_i / G on the diagonal cells for positive A_i and -A_i / G on the
    anti-diagonal cells for negative A_i.

    Raises:
        ScopeError: If either group does not take exactly two values
    """
    grid, scopes, indices = parent_grid(cpd, grouping, "case2")
    _require(grid.shape[:2] == (2, 2), f"case2 needs two binary parent groups, got {grid.shape[:2]}")
    return _case2(cpd, grouping, scopes, indices, grid, "case2")


def _case2(cpd, grouping, scopes, indices, grid, case):
    A = _mixed_differences(grid)
    G = float(A[A > 0.0].sum())
    alpha = 1.0 - G / 2.0
    residual = _diagonal_residual(A, G) if G > 0.0 else None
    trace = ClosedFormTrace(case=case, deviations=A, G=G)
    return _decomposition(cpd, grouping, scopes, indices, grid, alpha, residual, trace), trace


def degree_case1(cpd: Cpd, grouping: Grouping) -> Tuple[SeparableDecomposition, ClosedFormTrace]:
    """
    Binary child and binary parent groups

    alpha = 1 - |A| / 2 with A the mixed difference of P(z1 | x, y). The
    residual is the equality table when A > 0 and the XOR table when A < 0.

    Raises:
        ScopeError: If the shapes are not all binary
    """
    grid, scopes, indices = parent_grid(cpd, grouping, "case1")
    _require(grid.shape == (2, 2, 2), f"case1 needs a binary child and binary groups, got {grid.shape}")
    decomposition, trace = _case2(cpd, grouping, scopes, indices, grid, "case1")
    trace = ClosedFormTrace(case="case1", deviations=trace.deviations[:1], G=trace.G)
    return decomposition, trace


def degree_case3(cpd: Cpd, grouping: Grouping) -> Tuple[SeparableDecomposition, ClosedFormTrace]:
    """
    Binary child, binary first group, second group with n values

    With d_k = P(z1 | x1 y_k) - P(z1 | x2 y_k), A_k = d_(k+1) - d_k and C_k
    the partial sums of A, alpha = 1 - (C* + C_*) / 2. B_1 = (C* - C_*) / (C* + C_*)
    and B_(k+1) = B_k - A_k / (1 - alpha); the residual puts max(B_k, 0) on
    P(z1 | x2 y_k) and max(-B_k, 0) on P(z1 | x1 y_k).

    Raises:
        ScopeError: If the child or the first group is not binary
    """
    grid, scopes, indices = parent_grid(cpd, grouping, "case3")
    _require(grid.shape[0] == 2 and grid.shape[2] == 2,
             f"case3 needs a binary child and a binary first group, got {grid.shape}")
    n = grid.shape[1]
    d = grid[0, :, 0] - grid[1, :, 0]
    A = np.diff(d)
    C = np.cumsum(A)
    C_star = max(0.0, float(C.max())) if C.size else 0.0
    C_substar = -min(0.0, float(C.min())) if C.size else 0.0
    spread = C_star + C_substar
    alpha = 1.0 - spread / 2.0

    if spread <= 0.0:
        B = np.zeros(n)
        residual = None
    else:
        B = np.empty(n)
        B[0] = (C_star - C_substar) / spread
        for k in range(n - 1):
            B[k + 1] = B[k] - A[k] / (1.0 - alpha)
        B = np.clip(B, -1.0, 1.0)
        residual = np.zeros((2, n, 2))
        residual[1, :, 0] = np.maximum(B, 0.0)
        residual[0, :, 0] = np.maximum(-B, 0.0)
        residual[:, :, 1] = 1.0 - residual[:, :, 0]

    trace = ClosedFormTrace(case="case3", deviations=A, partial_sums=C, C_star=C_star,
                            C_substar=C_substar, B_values=B)
    return _decomposition(cpd, grouping, scopes, indices, grid, alpha, residual, trace), trace
