# filtering/exact.py - Exact joint filter over the enumerated two-slice model

from typing import List, Optional, Sequence

import numpy as np

from model.dbn import DbnModel, Factorization
from probability.errors import ScopeError, ZeroNormalizerError
from probability.ops import reorder
from probability.tables import Categorical, align, scope_shape


def _state_order(model: DbnModel, belief: Categorical) -> Categorical:
    if belief.scope == model.state_vars:
        return belief
    if set(belief.names) != set(model.state_names) or len(belief.names) != len(model.state_names):
        raise ScopeError(f"Belief over ({', '.join(belief.names)}) is not over the state variables")
    return reorder(belief, model.state_names)


def predict_values(model: DbnModel, values: np.ndarray) -> np.ndarray:
    """One step of the dynamics on a flat joint over the state variables"""
    return values @ model.transition_matrix


def condition_values(model: DbnModel, values: np.ndarray, observed: Sequence[int]) -> np.ndarray:
    """
    Bayes update of a flat joint on all observation variables

    Raises:
        ZeroNormalizerError: If the observations are impossible under `values`
    """
    weights = values * model.evidence_likelihood(observed)
    total = weights.sum()
    if not total > 0.0:
        shown = ", ".join(f"{var.name}={o}" for (var, _), o in zip(model.observations, observed))
        raise ZeroNormalizerError(f"Observation {shown} is impossible under the belief")
    return weights / total


def project_values(model: DbnModel, values: np.ndarray, factorization: Factorization) -> List[np.ndarray]:
    """Marginals of a flat joint onto each factor, each laid out in factor order"""
    arr = values.reshape(scope_shape(model.state_vars))
    names = model.state_names
    marginals = []
    for factor in factorization:
        keep = [names.index(n) for n in factor]
        dropped = tuple(i for i in range(len(names)) if i not in keep)
        m = arr.sum(axis=dropped)
        remaining = sorted(keep)
        m = np.transpose(m, [remaining.index(i) for i in keep])
        marginals.append(m.ravel())
    return marginals


def product_values(model: DbnModel, marginals: Sequence[np.ndarray], factorization: Factorization) -> np.ndarray:
    """Flat joint over the state variables equal to the product of factor marginals"""
    arr = np.ones(scope_shape(model.state_vars))
    for m, factor in zip(marginals, factorization):
        arr = arr * align(m, tuple(model.variable(n) for n in factor), model.state_vars)
    return arr.ravel()


def exact_predict_step(model: DbnModel, belief: Categorical) -> Categorical:
    """
    Propagate a joint belief through the transition model

    Args:
        model: DBN supplying the transition CPDs
        belief: Joint over the state variables (any variable order)

    Returns:
        Joint over model.state_vars: sum over x- of P(x | x-) belief(x-)
    """
    belief = _state_order(model, belief)
    return Categorical.normalized(model.state_vars, predict_values(model, belief.values))


def exact_filter_step(model: DbnModel, belief: Categorical, observed: Optional[Sequence[int]] = None) -> Categorical:
    """
    Predict, then condition on the observation values (one per observation variable)

    Raises:
        ZeroNormalizerError: If the observation is impossible
    """
    predicted = predict_values(model, _state_order(model, belief).values)
    if observed is None or not model.observations:
        return Categorical.normalized(model.state_vars, predicted)
    return Categorical(model.state_vars, condition_values(model, predicted, observed))
