# filtering/bk.py - Factored (Boyen-Koller) belief propagation

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from model.dbn import DbnModel, Factorization
from probability.errors import ScopeError
from probability.ops import marginalize
from probability.tables import Categorical
from .exact import condition_values, predict_values, product_values, project_values


@dataclass(frozen=True)
class FactoredBelief:
    """One marginal per factor of a factorization"""
    factorization: Factorization
    marginals: Tuple[Categorical, ...]

    def __post_init__(self):
        if len(self.marginals) != len(self.factorization):
            raise ScopeError(f"{len(self.marginals)} marginals for {len(self.factorization)} factors")
        for m, factor in zip(self.marginals, self.factorization):
            if m.names != factor:
                raise ScopeError(f"Marginal over ({', '.join(m.names)}) does not match factor ({', '.join(factor)})")

    @classmethod
    def from_joint(cls, joint: Categorical, factorization: Factorization) -> 'FactoredBelief':
        """Project a joint onto the factors"""
        return cls(factorization, tuple(marginalize(joint, f) for f in factorization))

    @classmethod
    def from_values(cls, model: DbnModel, factorization: Factorization,
                    values: Sequence[np.ndarray]) -> 'FactoredBelief':
        return cls(factorization, tuple(
            Categorical.normalized([model.variable(n) for n in factor], v)
            for factor, v in zip(factorization, values)
        ))

    def joint(self, model: DbnModel) -> Categorical:
        """Product of the marginals over model.state_vars"""
        return Categorical.normalized(model.state_vars, self.joint_values(model))

    def joint_values(self, model: DbnModel) -> np.ndarray:
        return product_values(model, [m.values for m in self.marginals], self.factorization)

    def marginal(self, name: str) -> Categorical:
        """Marginal of one state variable"""
        for m in self.marginals:
            if name in m.names:
                return marginalize(m, [name])
        raise ScopeError(f"Variable {name} is not in any factor")


def initial_belief(model: DbnModel, factorization: Optional[Factorization] = None) -> FactoredBelief:
    """The model prior projected onto the factors"""
    return FactoredBelief.from_joint(model.prior_joint(), factorization or model.factorization)


def bk_predict_step(model: DbnModel, fb: FactoredBelief) -> FactoredBelief:
    """
    Propagate the product of factor marginals exactly, then project back

    Args:
        model: DBN supplying the transition CPDs
        fb: Factor marginals at the previous step

    Returns:
        Factor marginals of sum over x- of P(X | x-) prod_i mu_i(x_i-)
    """
    predicted = predict_values(model, fb.joint_values(model))
    return FactoredBelief.from_values(model, fb.factorization, project_values(model, predicted, fb.factorization))


def bk_step(model: DbnModel, fb: FactoredBelief, observed: Optional[Sequence[int]] = None) -> FactoredBelief:
    """
    One monitoring step: propagate the product belief, condition on the
    observations, project onto the factors.

    Raises:
        ZeroNormalizerError: If the observations are impossible under the belief
    """
    if observed is None or not model.observations:
        return bk_predict_step(model, fb)
    posterior = condition_values(model, predict_values(model, fb.joint_values(model)), observed)
    return FactoredBelief.from_values(model, fb.factorization, project_values(model, posterior, fb.factorization))
