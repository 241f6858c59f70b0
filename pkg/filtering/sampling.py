# filtering/sampling.py - Ancestral sampling of state and observation trajectories

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from model.dbn import DbnModel
from probability.errors import ScopeError
from probability.tables import scope_shape


@dataclass(frozen=True)
class Trajectory:
    """
    Sampled ground truth for steps t = 1..T.

    states[t-1] and observations[t-1] hold step t; initial_state is t = 0.
    States are stored as flat joint indices over model.state_vars; a
    trajectory read from an observation file has seed -1 and no states.
    """
    initial_state: int
    state_indices: np.ndarray
    observations: np.ndarray
    seed: int

    @classmethod
    def from_observations(cls, observations) -> 'Trajectory':
        """Observed values only, one row per step"""
        observations = np.asarray(observations, dtype=np.int64)
        if observations.ndim == 1:
            observations = observations[:, None]
        return cls(-1, np.empty(0, dtype=np.int64), observations, -1)

    @property
    def has_states(self) -> bool:
        return self.initial_state >= 0

    def __len__(self) -> int:
        return len(self.observations)

    def states(self, model: DbnModel) -> np.ndarray:
        """(T, n_state_vars) array of per-variable values"""
        return np.stack(np.unravel_index(self.state_indices, scope_shape(model.state_vars)), axis=1)

    def validate(self, model: DbnModel) -> None:
        """
        Raises:
            ScopeError: If the trajectory does not fit the model
        """
        if self.has_states and len(self.observations) != len(self.state_indices):
            raise ScopeError("Trajectory has different numbers of states and observations")
        if self.observations.ndim != 2 or self.observations.shape[1] != len(model.observations):
            raise ScopeError(f"Trajectory observations do not match the model's {len(model.observations)} "
                             "observation variables")
        if self.has_states and (np.any(self.state_indices < 0) or np.any(self.state_indices >= model.n_states)):
            raise ScopeError("Trajectory state out of range")
        for k, (var, _) in enumerate(model.observations):
            column = self.observations[:, k]
            if np.any(column < 0) or np.any(column >= var.cardinality):
                raise ScopeError(f"Observed value of {var.name} out of range")


def _draw(cumulative: np.ndarray, u: float) -> int:
    return min(int(np.searchsorted(cumulative, u, side="right")), len(cumulative) - 1)


def sample_trajectory(model: DbnModel, steps: int, seed: int) -> Trajectory:
    """
    Sample states and observations for steps 1..T

    Args:
        model: DBN to sample from
        steps: T >= 1
        seed: Seed for numpy's default_rng; equal seeds give equal trajectories

    Raises:
        ValueError: If steps < 1
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    rng = np.random.default_rng(seed)
    prior_cdf = np.cumsum(model.prior_joint().values)
    transition_cdf = np.cumsum(model.transition_matrix, axis=1)
    obs_cdfs = [np.cumsum(table, axis=0) for table in model.observation_likelihoods]

    state = _draw(prior_cdf, rng.random())
    initial = state
    states = np.empty(steps, dtype=np.int64)
    observations = np.empty((steps, len(obs_cdfs)), dtype=np.int64)
    for t in range(steps):
        state = _draw(transition_cdf[state], rng.random())
        states[t] = state
        for k, cdf in enumerate(obs_cdfs):
            observations[t, k] = _draw(cdf[:, state], rng.random())
    return Trajectory(initial, states, observations, seed)
