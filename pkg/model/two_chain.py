# model/two_chain.py - Separable two-chain systems (hidden X, Y; Z observes Y)

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from probability.tables import Categorical, Cpd
from .dbn import DbnModel, Factorization
from .generators import GeneratorConfig, binary, binary_cpd, mixture_cpd

_PARENTS = (binary("X").previous(), binary("Y").previous())


@dataclass(frozen=True)
class TwoChainSystem:
    """
    X and Y each mix a CPD on X- with a CPD on Y-; Z observes Y.

    P(X | X-, Y-) = gamma_X * P_X_X(X | X-) + (1 - gamma_X) * P_X_Y(X | Y-)
    P(Y | X-, Y-) = gamma_Y * P_Y_X(Y | X-) + (1 - gamma_Y) * P_Y_Y(Y | Y-)
    """
    gamma_X: float
    gamma_Y: float
    P_X_X: Cpd
    P_X_Y: Cpd
    P_Y_X: Cpd
    P_Y_Y: Cpd
    P_Z: Cpd

    def transition_x(self) -> Cpd:
        return mixture_cpd((self.gamma_X, 1.0 - self.gamma_X), (self.P_X_X, self.P_X_Y), _PARENTS)

    def transition_y(self) -> Cpd:
        return mixture_cpd((self.gamma_Y, 1.0 - self.gamma_Y), (self.P_Y_X, self.P_Y_Y), _PARENTS)

    def to_model(self, name: str = "two-chain") -> DbnModel:
        """Induced DBN with factorization {X}, {Y} and a uniform product prior"""
        x, y = binary("X"), binary("Y")
        z = self.P_Z.child_scope[0]
        prior = (Categorical.uniform([x]), Categorical.uniform([y]))
        return DbnModel((x, y), [self.transition_x(), self.transition_y()], [(z, self.P_Z)],
                        prior, Factorization([["X"], ["Y"]]), name=name)


def two_chain_system(gamma_X: float, gamma_Y: float, p_x_x, p_x_y, p_y_x, p_y_y,
                     p_z) -> TwoChainSystem:
    """
    Build a system from P(child = T) per parent value (parent F first)

    Args:
        gamma_X, gamma_Y: Mixing weights
        p_x_x: P_X_X(X = T | X- = F), P_X_X(X = T | X- = T)
        p_x_y, p_y_x, p_y_y: Same for the other three components
        p_z: P_Z(Z = T | Y = F), P_Z(Z = T | Y = T)
    """
    x, y, z = binary("X"), binary("Y"), binary("Z")
    return TwoChainSystem(
        gamma_X=float(gamma_X),
        gamma_Y=float(gamma_Y),
        P_X_X=binary_cpd(x, (x.previous(),), p_x_x),
        P_X_Y=binary_cpd(x, (y.previous(),), p_x_y),
        P_Y_X=binary_cpd(y, (x.previous(),), p_y_x),
        P_Y_Y=binary_cpd(y, (y.previous(),), p_y_y),
        P_Z=binary_cpd(z, (y,), p_z),
    )


def generate_two_chain_system(seed: int, config: Optional[GeneratorConfig] = None
                              ) -> Tuple[TwoChainSystem, DbnModel]:
    """
    Sample a two-chain system and its induced model

    gamma_X and gamma_Y are uniform on config.gamma_range; every component
    row P(T | parent) and both rows of P_Z are uniform on [0, 1]. Draw order
    is fixed so a seed always gives the same system.
    """
    config = config or GeneratorConfig()
    rng = np.random.default_rng(seed)
    gamma_X, gamma_Y = rng.uniform(*config.gamma_range, size=2)
    rows = rng.uniform(size=(5, 2))
    system = two_chain_system(gamma_X, gamma_Y, *rows)
    return system, system.to_model(name=f"two-chain(seed={seed})")
