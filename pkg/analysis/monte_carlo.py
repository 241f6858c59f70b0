# analysis/monte_carlo.py - Expected filtering errors over observation sequences

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from filtering.comparison import factor_label
from filtering.exact import project_values
from model.dbn import DbnModel, Factorization
from probability.errors import EnumerationGuardError, ZeroNormalizerError
from probability.tables import scope_shape

logger = logging.getLogger(__name__)

# 2^8 sequences of one binary observation; longer horizons use sampling
MAX_EXACT_STEPS = 8


@dataclass
class ExpectedErrors:
    """
    Per-step expectations of the joint error delta (true joint against the
    product of its own marginals) and of each factor's marginal error
    (max-norm distance between true and factored-filter marginals).
    """
    method: str
    factor_labels: List[str]
    delta: np.ndarray            # (T,)
    delta_factor: np.ndarray     # (T, m)
    stderr_delta: np.ndarray     # (T,), zero for exact enumeration
    stderr_factor: np.ndarray    # (T, m)
    sequences: int

    def time_average(self) -> Dict[str, float]:
        averages = {"delta": float(np.mean(self.delta))}
        for i, label in enumerate(self.factor_labels):
            averages[f"delta[{label}]"] = float(np.mean(self.delta_factor[:, i]))
        return averages

    def peak(self) -> Dict[str, float]:
        """Largest per-step expectation of each metric"""
        peaks = {"delta": float(np.max(self.delta))}
        for i, label in enumerate(self.factor_labels):
            peaks[f"delta[{label}]"] = float(np.max(self.delta_factor[:, i]))
        return peaks


class _BatchKernels:
    """Filter kernels acting on (S, N) stacks of flat joints"""

    def __init__(self, model: DbnModel, factorization: Factorization):
        self.model = model
        self.factorization = factorization
        self.shape = scope_shape(model.state_vars)
        names = model.state_names
        self.positions = [[names.index(n) for n in factor] for factor in factorization]
        self.transition = model.transition_matrix

    def predict(self, values: np.ndarray) -> np.ndarray:
        return values @ self.transition

    def project(self, values: np.ndarray) -> List[np.ndarray]:
        S = values.shape[0]
        arr = values.reshape((S,) + self.shape)
        marginals = []
        for keep in self.positions:
            dropped = tuple(1 + i for i in range(len(self.shape)) if i not in keep)
            m = arr.sum(axis=dropped)
            remaining = sorted(keep)
            m = np.transpose(m, [0] + [1 + remaining.index(i) for i in keep])
            marginals.append(m.reshape(S, -1))
        return marginals

    def product(self, marginals: Sequence[np.ndarray]) -> np.ndarray:
        S = marginals[0].shape[0]
        arr = np.ones((S,) + self.shape)
        for m, keep in zip(marginals, self.positions):
            block = m.reshape((S,) + tuple(self.shape[i] for i in keep))
            order = np.argsort(keep)
            block = np.transpose(block, [0] + [1 + int(o) for o in order])
            expanded = [S] + [self.shape[i] if i in keep else 1 for i in range(len(self.shape))]
            arr = arr * block.reshape(expanded)
        return arr.reshape(S, -1)

    def errors(self, exact: np.ndarray, approx: Sequence[np.ndarray]):
        true_marginals = self.project(exact)
        delta = np.max(np.abs(exact - self.product(true_marginals)), axis=1)
        factor = np.stack([np.max(np.abs(t - a), axis=1) for t, a in zip(true_marginals, approx)], axis=1)
        return delta, factor


def _normalize(weights: np.ndarray, where: str) -> np.ndarray:
    totals = weights.sum(axis=1, keepdims=True)
    if np.any(totals <= 0.0):
        raise ZeroNormalizerError(f"{where}: observation impossible under the belief")
    return weights / totals


def _draw(cumulative: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Row-wise inverse-CDF draws from (S, K) cumulative rows"""
    return np.minimum((cumulative <= u[:, None]).sum(axis=1), cumulative.shape[1] - 1)


def monte_carlo_errors(model: DbnModel, steps: int, sequences: int, seed: int,
                       factorization: Optional[Factorization] = None) -> ExpectedErrors:
    """
    Estimate expected errors by filtering many sampled sequences at once

    Each sequence draws its hidden states from the model and its
    observations from those states; the exact and factored filters then
    run on the observations. The expectation at step t is the mean over
    sequences, reported with its standard error.

    Args:
        model: DBN with a product prior over its factors
        steps: T >= 1
        sequences: Number of sampled sequences (>= 1)
        seed: Seed for numpy's default_rng
        factorization: Factors (defaults to the model's)

    Raises:
        ValueError: If steps or sequences is below 1
        ZeroNormalizerError: Tagged with the step where evidence became impossible
    """
    if steps < 1 or sequences < 1:
        raise ValueError(f"steps and sequences must be >= 1, got {steps} and {sequences}")
    factorization = factorization or model.factorization
    kernels = _BatchKernels(model, factorization)
    rng = np.random.default_rng(seed)
    S = sequences

    prior = model.prior_joint().values
    states = _draw(np.tile(np.cumsum(prior), (S, 1)), rng.random(S))
    transition_cdf = np.cumsum(model.transition_matrix, axis=1)
    likelihoods = model.observation_likelihoods
    obs_cdfs = [np.cumsum(table, axis=0).T for table in likelihoods]

    exact = np.tile(prior, (S, 1))
    approx = [np.tile(m, (S, 1)) for m in project_values(model, prior, factorization)]

    delta = np.zeros((steps, S))
    delta_factor = np.zeros((steps, S, len(factorization)))
    for t in range(steps):
        states = _draw(transition_cdf[states], rng.random(S))
        evidence = np.ones((S, model.n_states))
        for table, cdf in zip(likelihoods, obs_cdfs):
            observed = _draw(cdf[states], rng.random(S))
            evidence = evidence * table[observed]
        try:
            exact = _normalize(kernels.predict(exact) * evidence, "exact filter")
            approx_joint = _normalize(kernels.predict(kernels.product(approx)) * evidence, "factored filter")
        except ZeroNormalizerError as e:
            raise e.at_step(t + 1)
        approx = kernels.project(approx_joint)
        delta[t], delta_factor[t] = kernels.errors(exact, approx)

    scale = np.sqrt(S) if S > 1 else np.inf
    ddof = 1 if S > 1 else 0
    return ExpectedErrors(
        method="monte-carlo",
        factor_labels=[factor_label(f) for f in factorization],
        delta=delta.mean(axis=1),
        delta_factor=delta_factor.mean(axis=1),
        stderr_delta=delta.std(axis=1, ddof=ddof) / scale,
        stderr_factor=delta_factor.std(axis=1, ddof=ddof) / scale,
        sequences=S,
    )


def exact_expected_errors(model: DbnModel, steps: int,
                          factorization: Optional[Factorization] = None) -> ExpectedErrors:
    """
    Expected errors by enumerating every observation sequence up to T

    Each prefix carries its probability under the model, the exact
    posterior and the factored marginals; prefixes of probability zero are
    dropped.

    Raises:
        EnumerationGuardError: If steps exceeds MAX_EXACT_STEPS
    """
    if steps > MAX_EXACT_STEPS:
        raise EnumerationGuardError(
            f"Exact expectation enumerates every observation sequence; use at most {MAX_EXACT_STEPS} steps"
        )
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    factorization = factorization or model.factorization
    kernels = _BatchKernels(model, factorization)

    likelihoods = model.observation_likelihoods
    configs = list(itertools.product(*(range(table.shape[0]) for table in likelihoods)))
    evidence = np.ones((len(configs), model.n_states))
    for c, config in enumerate(configs):
        for table, value in zip(likelihoods, config):
            evidence[c] = evidence[c] * table[value]
    C, N = evidence.shape

    prior = model.prior_joint().values
    weights = np.ones(1)
    exact = prior[None, :]
    approx = [m[None, :] for m in project_values(model, prior, factorization)]

    delta = np.zeros(steps)
    delta_factor = np.zeros((steps, len(factorization)))
    for t in range(steps):
        joint = (kernels.predict(exact)[:, None, :] * evidence[None, :, :]).reshape(-1, N)
        approx_joint = (kernels.predict(kernels.product(approx))[:, None, :] * evidence[None, :, :]).reshape(-1, N)
        p_obs = joint.sum(axis=1)
        branch = np.repeat(weights, C) * p_obs
        keep = branch > 0.0
        try:
            exact = _normalize(joint[keep], "exact filter")
            approx = kernels.project(_normalize(approx_joint[keep], "factored filter"))
        except ZeroNormalizerError as e:
            raise e.at_step(t + 1)
        weights = branch[keep]
        d, f = kernels.errors(exact, approx)
        delta[t] = float(weights @ d)
        delta_factor[t] = weights @ f
        logger.debug(f"exact expectation: step {t + 1}, {len(weights)} sequences with positive probability")

    return ExpectedErrors(
        method="exact",
        factor_labels=[factor_label(f) for f in factorization],
        delta=delta,
        delta_factor=delta_factor,
        stderr_delta=np.zeros(steps),
        stderr_factor=np.zeros((steps, len(factorization))),
        sequences=len(weights),
    )
