# model/generators.py - Benchmark models: the alpha-mixture family, the six-variable chain and the 2x2 persistence table

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from config import Generation
from probability.errors import ModelValidationError
from probability.tables import Categorical, Cpd, Scope, VariableSpec
from .dbn import DbnModel, Factorization, widen_cpd

# Binary value order is (F, T) = (0, 1) everywhere


@dataclass(frozen=True)
class GeneratorConfig:
    """Sampling ranges for generated models"""
    obs_accuracy_range: Tuple[float, float] = Generation.OBS_ACCURACY_RANGE
    gamma_range: Tuple[float, float] = (0.0, 1.0)
    example41_obs_accuracy: float = Generation.EXAMPLE41_OBS_ACCURACY

    def __post_init__(self):
        lo, hi = self.obs_accuracy_range
        if not 0.0 <= lo <= hi <= 1.0:
            raise ModelValidationError(f"Observation accuracy range {self.obs_accuracy_range} must lie in [0, 1]")
        if self.gamma_range[0] > self.gamma_range[1]:
            raise ModelValidationError(f"Empty gamma range {self.gamma_range}")
        if not 0.0 <= self.example41_obs_accuracy <= 1.0:
            raise ModelValidationError("six-variable example observation accuracy must lie in [0, 1]")


def binary(name: str) -> VariableSpec:
    return VariableSpec(name, 2)


def binary_cpd(child: VariableSpec, parents: Tuple[VariableSpec, ...], p_true) -> Cpd:
    """CPD of a binary child from P(child = T) per parent row"""
    p_true = np.asarray(p_true, dtype=float).ravel()
    return Cpd((child,), parents, np.column_stack([1.0 - p_true, p_true]))


def noisy_observation(obs: VariableSpec, state: VariableSpec, accuracy: float) -> Cpd:
    """Binary sensor reporting the state's value with probability `accuracy`"""
    return binary_cpd(obs, (state,), [1.0 - accuracy, accuracy])


def xor_pattern() -> np.ndarray:
    """P(T) = 1 when the two binary parents differ, over rows (F,F), (F,T), (T,F), (T,T)"""
    return np.array([0.0, 1.0, 1.0, 0.0])


def generate_figure1_model(alpha: float, seed: int, config: Optional[GeneratorConfig] = None) -> DbnModel:
    """
    Two-factor model {X}, {Y} whose transition CPDs are exactly alpha-separable

    Each of X and Y gets P(T | x-, y-) = alpha * (g * a[x-] + (1 - g) * b[y-])
    + (1 - alpha) * XOR(x-, y-), with g and the rows a, b uniform on [0, 1].
    Z is a noisy observation of Y.

    Args:
        alpha: Degree of separability in [0, 1]
        seed: Seed for numpy's default_rng
        config: Sampling ranges (defaults to GeneratorConfig())

    Raises:
        ModelValidationError: If alpha is outside [0, 1]
    """
    if not 0.0 <= alpha <= 1.0:
        raise ModelValidationError(f"alpha must lie in [0, 1], got {alpha}")
    config = config or GeneratorConfig()
    rng = np.random.default_rng(seed)

    x, y, z = binary("X"), binary("Y"), binary("Z")
    parents = (x.previous(), y.previous())
    xor = xor_pattern()

    transition = []
    for child in (x, y):
        gamma = rng.uniform()
        a = rng.uniform(size=2)
        b = rng.uniform(size=2)
        separable = gamma * a[:, None] + (1.0 - gamma) * b[None, :]
        p_true = alpha * separable.ravel() + (1.0 - alpha) * xor
        transition.append(binary_cpd(child, parents, p_true))

    accuracy = rng.uniform(*config.obs_accuracy_range)
    observations = [(z, noisy_observation(z, y, accuracy))]

    factorization = Factorization([["X"], ["Y"]])
    prior = (Categorical.uniform([x]), Categorical.uniform([y]))
    return DbnModel((x, y), transition, observations, prior, factorization,
                    name=f"figure1(alpha={alpha!r}, seed={seed})")


# P(X = T) rows of the reference CPD, parents (X-, Y-, Z-, W-), last fastest
EXAMPLE41_X_TABLE = np.array([
    0.1, 0.5, 0.3, 0.7,
    0.3, 0.7, 0.5, 0.9,
    0.5, 0.1, 0.7, 0.3,
    0.7, 0.3, 0.9, 0.5,
])

EXAMPLE41_FACTORIZATIONS = {
    "{UVW,XYZ}": Factorization([["U", "V", "W"], ["X", "Y", "Z"]]),
    "{UV,WX,YZ}": Factorization([["U", "V"], ["W", "X"], ["Y", "Z"]]),
}


def _pair_table(offset: float, slope: float) -> np.ndarray:
    """
    P(T) over (a-, b-, c-) = 0.4 [a- != b-] + offset + slope * c-

    Separable in {a-, b-} | {c-}, but not in any split of a- from b-.
    """
    a, b, c = np.meshgrid([0, 1], [0, 1], [0, 1], indexing="ij")
    return (0.4 * (a != b) + offset + slope * c).ravel()


def generate_example41_model(factorization: str = "{UVW,XYZ}",
                             config: Optional[GeneratorConfig] = None) -> DbnModel:
    """
    Six-node DBN over U, V, W, X, Y, Z with Z observed

    X has the reference table. W mirrors it with (U-, V-) in place of
    (Y-, Z-). U, V read (U-, V-, W-) and Y, Z read (X-, Y-, Z-), each with
    an XOR-like dependence on its own pair plus an additive term in the third
    parent, so every CPD is separable along {UV, WX, YZ}.

    Args:
        factorization: Key of EXAMPLE41_FACTORIZATIONS used as the model's factorization
        config: Supplies the accuracy of the observation of Z

    Raises:
        ModelValidationError: For an unknown factorization key
    """
    if factorization not in EXAMPLE41_FACTORIZATIONS:
        raise ModelValidationError(
            f"Unknown six-variable example factorization {factorization!r} "
            f"(choose from {', '.join(EXAMPLE41_FACTORIZATIONS)})"
        )
    config = config or GeneratorConfig()
    u, v, w, x, y, z = (binary(n) for n in "UVWXYZ")

    transition = [
        binary_cpd(u, (u.previous(), v.previous(), w.previous()), _pair_table(0.1, 0.4)),
        binary_cpd(v, (u.previous(), v.previous(), w.previous()), _pair_table(0.5, -0.4)),
        binary_cpd(w, (w.previous(), u.previous(), v.previous(), x.previous()), EXAMPLE41_X_TABLE),
        binary_cpd(x, (x.previous(), y.previous(), z.previous(), w.previous()), EXAMPLE41_X_TABLE),
        binary_cpd(y, (y.previous(), z.previous(), x.previous()), _pair_table(0.1, 0.4)),
        binary_cpd(z, (y.previous(), z.previous(), x.previous()), _pair_table(0.5, -0.4)),
    ]
    z_obs = binary("Zobs")
    observations = [(z_obs, noisy_observation(z_obs, z, config.example41_obs_accuracy))]

    chosen = EXAMPLE41_FACTORIZATIONS[factorization]
    prior = tuple(Categorical.uniform([binary(n) for n in f]) for f in chosen)
    return DbnModel((u, v, w, x, y, z), transition, observations, prior, chosen,
                    name="example41", candidates=EXAMPLE41_FACTORIZATIONS)


def example33_cpd() -> Cpd:
    """The approximately separable P(X | X-, Y-) with degree 0.91"""
    x, y = binary("X"), binary("Y")
    return binary_cpd(x, (x.previous(), y.previous()), [0.1, 0.01, 0.9, 0.99])


def mixture_cpd(weights: Sequence[float], components: Sequence[Cpd], parent_scope: Scope) -> Cpd:
    """
    Sum_i w_i * P_i with every component widened to `parent_scope`

    The components must share the child scope; the weights must sum to 1.
    """
    table = sum(w * widen_cpd(c, parent_scope).table for w, c in zip(weights, components))
    return Cpd(components[0].child_scope, parent_scope, table)
