# separability/lp.py - Degree of separability by linear programming

import itertools
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from config import Tolerances
from probability.errors import SolverError
from probability.tables import Cpd, Scope, scope_names, scope_shape, scope_size
from .types import Grouping, SeparableDecomposition

logger = logging.getLogger(__name__)

# Bound on |w_g| so opposing weights cannot run off along a direction that leaves alpha unchanged
WEIGHT_BOUND = 1e3

# Residual and component weights below this are treated as zero
_ZERO_WEIGHT = 1e-12


def group_indices(cpd: Cpd, scopes: Sequence[Scope]) -> List[np.ndarray]:
    """For each group, the group-assignment index of every parent row"""
    names = cpd.parent_names
    rows = np.arange(scope_size(cpd.parent_scope))
    assignment = np.unravel_index(rows, scope_shape(cpd.parent_scope)) if names else ()
    indices = []
    for scope in scopes:
        cols = tuple(assignment[names.index(n)] for n in scope_names(scope))
        indices.append(np.ravel_multi_index(cols, scope_shape(scope)) if cols else np.zeros_like(rows))
    return indices


class _Layout:
    """Column offsets of the LP variables: w_g, then u_g[a, i], then residual r[c, i]"""

    def __init__(self, n_rows: int, n_child: int, group_cards: Sequence[int]):
        self.m = len(group_cards)
        self.n_rows = n_rows
        self.n_child = n_child
        self.group_cards = list(group_cards)
        self.u_offsets = []
        offset = self.m
        for card in group_cards:
            self.u_offsets.append(offset)
            offset += card * n_child
        self.r_offset = offset
        self.size = offset + n_rows * n_child

    def u(self, g: int, a, i):
        return self.u_offsets[g] + np.asarray(a) * self.n_child + np.asarray(i)

    def r(self, c, i):
        return self.r_offset + np.asarray(c) * self.n_child + np.asarray(i)


def _constraints(table: np.ndarray, indices: List[np.ndarray], layout: _Layout):
    rows, cols, vals = [], [], []
    n_rows, n_child = table.shape
    eq = 0

    # sum_g u_g[c_g, i] + r[c, i] = P(i | c)
    c_idx, i_idx = np.meshgrid(np.arange(n_rows), np.arange(n_child), indexing="ij")
    c_idx, i_idx = c_idx.ravel(), i_idx.ravel()
    eq_ids = np.arange(n_rows * n_child)
    for g, idx in enumerate(indices):
        rows.append(eq_ids)
        cols.append(layout.u(g, idx[c_idx], i_idx))
        vals.append(np.ones(eq_ids.size))
    rows.append(eq_ids)
    cols.append(layout.r(c_idx, i_idx))
    vals.append(np.ones(eq_ids.size))
    b = [table.ravel()]
    eq += eq_ids.size

    # sum_i u_g[a, i] - w_g = 0
    for g, card in enumerate(layout.group_cards):
        for a in range(card):
            rows.append(np.full(n_child + 1, eq))
            cols.append(np.concatenate([layout.u(g, a, np.arange(n_child)), [g]]))
            vals.append(np.concatenate([np.ones(n_child), [-1.0]]))
            eq += 1
    b.append(np.zeros(sum(layout.group_cards)))

    A = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(eq, layout.size),
    )
    return A, np.concatenate(b)


def _bounds(layout: _Layout, signs: Tuple[int, ...]) -> List[Tuple[Optional[float], Optional[float]]]:
    bounds: List[Tuple[Optional[float], Optional[float]]] = []
    for s in signs:
        bounds.append((0.0, WEIGHT_BOUND) if s > 0 else (-WEIGHT_BOUND, 0.0))
    for g, card in enumerate(layout.group_cards):
        bound = (0.0, None) if signs[g] > 0 else (None, 0.0)
        bounds.extend([bound] * (card * layout.n_child))
    bounds.extend([(0.0, None)] * (layout.n_rows * layout.n_child))
    return bounds


def sign_patterns(m: int) -> List[Tuple[int, ...]]:
    """All sign patterns of m weights, fewest negative signs first"""
    patterns = list(itertools.product((1, -1), repeat=m))
    return sorted(patterns, key=lambda p: (sum(s < 0 for s in p), [-s for s in p]))


def _normalized_rows(values: np.ndarray, weight: float) -> np.ndarray:
    rows = np.clip(values / weight, 0.0, None)
    sums = rows.sum(axis=1, keepdims=True)
    n = rows.shape[1]
    return np.where(sums > 0.0, rows / np.where(sums > 0.0, sums, 1.0), 1.0 / n)


def degree_lp(cpd: Cpd, grouping: Grouping) -> SeparableDecomposition:
    """
    Maximal degree of separability of a CPD with respect to a grouping of its parents

    The bilinear program max sum_g a_g subject to
    sum_g a_g P_g(i | c_g) + a_r P_r(i | c) = P(i | c) is linearized with
    u_g = a_g P_g and r = a_r P_r. Weights may be negative, which flips the
    bounds on u_g, so one LP is solved per sign pattern of the group weights
    and the best optimum is kept (ties keep the earlier pattern, all-positive
    first).

    Args:
        cpd: Table to decompose (child scope may hold several variables)
        grouping: Partition of the parent scope into at most four groups

    Returns:
        SeparableDecomposition with method "lp"

    Raises:
        ScopeError: If the grouping does not partition the parents
        UnsupportedArityError: For more than four groups
        SolverError: If no sign pattern yields a solution, or the solution does not
            recombine to the table
    """
    scopes = grouping.scopes(cpd)
    table = cpd.table
    n_rows, n_child = table.shape
    indices = group_indices(cpd, scopes)
    layout = _Layout(n_rows, n_child, [scope_size(s) for s in scopes])
    A, b = _constraints(table, indices, layout)
    c = np.zeros(layout.size)
    c[:layout.m] = -1.0

    best = None
    best_alpha = -np.inf
    nonnegative_alpha = None
    for signs in sign_patterns(layout.m):
        result = linprog(c, A_eq=A, b_eq=b, bounds=_bounds(layout, signs), method="highs")
        if result.status != 0:
            logger.debug(f"degree_lp: sign pattern {signs} status {result.status} ({result.message})")
            continue
        alpha = float(-result.fun)
        if all(s > 0 for s in signs):
            nonnegative_alpha = alpha
        if alpha > best_alpha + Tolerances.LP_TIE:
            best, best_alpha = (signs, result.x), alpha

    if best is None:
        raise SolverError(f"No sign pattern of the separability LP solved for {', '.join(cpd.child_names)}")

    _, x = best
    weights = x[:layout.m]
    components = []
    for g, scope in enumerate(scopes):
        start = layout.u_offsets[g]
        u = x[start:start + layout.group_cards[g] * n_child].reshape(layout.group_cards[g], n_child)
        if abs(weights[g]) > _ZERO_WEIGHT:
            rows = _normalized_rows(u, weights[g])
        else:
            rows = np.full((layout.group_cards[g], n_child), 1.0 / n_child)
        components.append(Cpd(cpd.child_scope, scope, rows))

    alpha = min(1.0, max(0.0, float(weights.sum())))
    residual_weight = 1.0 - float(weights.sum())
    residual = None
    if residual_weight >= _ZERO_WEIGHT:
        r = x[layout.r_offset:].reshape(n_rows, n_child)
        residual = Cpd(cpd.child_scope, cpd.parent_scope, _normalized_rows(r, residual_weight))
    residual_weight = max(0.0, residual_weight)

    nonnegative = nonnegative_alpha is not None and nonnegative_alpha >= best_alpha - Tolerances.LP_TIE
    decomposition = SeparableDecomposition(
        alpha=alpha,
        group_weights=tuple(float(w) for w in weights),
        components=tuple(components),
        residual_weight=residual_weight,
        residual=residual,
        grouping=grouping,
        parent_scope=cpd.parent_scope,
        method="lp",
        nonnegative_weights=nonnegative,
    )
    error = decomposition.reconstruction_error(cpd)
    if error > Tolerances.LP:
        raise SolverError(f"Separability LP for {', '.join(cpd.child_names)} recombines with error {error:.3g}")
    return decomposition
