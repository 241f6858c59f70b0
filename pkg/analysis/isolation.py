# analysis/isolation.py - Processes that isolate the two sources of factored-filter error

import logging
from dataclasses import dataclass, replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from filtering.bk import FactoredBelief
from filtering.comparison import factor_label
from filtering.exact import condition_values, predict_values, product_values, project_values
from filtering.sampling import Trajectory
from model.dbn import DbnModel, Factorization
from probability.errors import AbsoluteContinuityError, ZeroNormalizerError
from probability.ops import kl_values
from probability.tables import Categorical

logger = logging.getLogger(__name__)

# q floor used when a clamped process marginal loses support the exact marginal still has
_KL_FLOOR = 1e-12


@dataclass(frozen=True)
class IsolationState:
    """
    Exact posterior, plain factored-filter marginals and the isolated
    process's marginals at one time step, plus the running clamp log.
    """
    factorization: Factorization
    exact: np.ndarray
    bk: Tuple[np.ndarray, ...]
    process: Tuple[np.ndarray, ...]
    incidents: int = 0
    max_clamped: float = 0.0

    def exact_posterior(self, model: DbnModel) -> Categorical:
        return Categorical(model.state_vars, self.exact)

    def bk_marginals(self, model: DbnModel) -> FactoredBelief:
        return FactoredBelief.from_values(model, self.factorization, self.bk)

    def process_marginals(self, model: DbnModel) -> FactoredBelief:
        return FactoredBelief.from_values(model, self.factorization, self.process)


@dataclass(frozen=True)
class IsolationRecord:
    """KL on the first factor's marginal for one step of one process"""
    process_kl: float
    bk_kl: float
    clamped: int
    max_clamped: float


@dataclass
class ErrorDecomposition:
    """Per-step KL of the plain factored filter and of both isolated processes"""
    factor: str
    total: np.ndarray
    type_a: np.ndarray
    type_b: np.ndarray
    incidents_a: int
    incidents_b: int
    max_clamped: float

    def columns(self) -> Dict[str, np.ndarray]:
        return {"total": self.total, "type_a": self.type_a, "type_b": self.type_b}

    def time_average(self) -> Dict[str, float]:
        return {name: float(np.mean(col)) for name, col in self.columns().items()}

    def final(self) -> Dict[str, float]:
        return {name: float(col[-1]) for name, col in self.columns().items()}


def initial_isolation_state(model: DbnModel, factorization: Optional[Factorization] = None) -> IsolationState:
    """Every side starts from the model prior; the factored sides from its projection"""
    factorization = factorization or model.factorization
    exact = model.prior_joint().values
    marginals = tuple(project_values(model, exact, factorization))
    return IsolationState(factorization, exact, marginals, marginals)


def _repair(values: np.ndarray, where: str) -> Tuple[np.ndarray, int, float]:
    """Clamp negative cells to zero and renormalize"""
    negative = values < 0.0
    count = int(np.count_nonzero(negative))
    if not count:
        return values, 0, 0.0
    magnitude = float(-values[negative].min())
    logger.debug(f"{where}: clamped {count} negative cells (largest {magnitude:.3g})")
    clipped = np.clip(values, 0.0, None)
    return clipped / clipped.sum(), count, magnitude


def _condition(model: DbnModel, values: np.ndarray, observed: Optional[Sequence[int]]) -> np.ndarray:
    if observed is None or not model.observations:
        return values
    return condition_values(model, values, observed)


def _kl(p: np.ndarray, q: np.ndarray, where: str) -> float:
    try:
        return kl_values(p, q, where=where)
    except AbsoluteContinuityError:
        logger.warning(f"{where}: isolated process lost support; flooring at {_KL_FLOOR:g}")
        floored = np.maximum(q, _KL_FLOOR)
        return kl_values(p, floored / floored.sum(), where=where)


def _lockstep(model: DbnModel, state: IsolationState, observed: Optional[Sequence[int]]):
    """Exact and plain factored filters advanced one step, shared by both processes"""
    f = state.factorization
    phi = predict_values(model, state.exact)
    mu = _condition(model, phi, observed)
    bk_joint = _condition(model, predict_values(model, product_values(model, state.bk, f)), observed)
    return phi, mu, tuple(project_values(model, bk_joint, f))


def _finish(model: DbnModel, state: IsolationState, mu: np.ndarray, bk, process,
            clamped: int, magnitude: float) -> Tuple[IsolationState, IsolationRecord]:
    f = state.factorization
    label = factor_label(f.factors[0])
    true_first = project_values(model, mu, f)[0]
    record = IsolationRecord(
        process_kl=_kl(true_first, process[0], where=label),
        bk_kl=_kl(true_first, bk[0], where=label),
        clamped=clamped,
        max_clamped=magnitude,
    )
    new_state = replace(
        state, exact=mu, bk=bk, process=process,
        incidents=state.incidents + clamped,
        max_clamped=max(state.max_clamped, magnitude),
    )
    return new_state, record


def type_a_step(model: DbnModel, state: IsolationState,
                observed: Optional[Sequence[int]] = None) -> Tuple[IsolationState, IsolationRecord]:
    """
    One step of the process whose only error is propagating independent factors

    The exact prior phi gives the true dependence d = phi - prod_i phi_i.
    The process propagates the product of its own marginals to phi~, puts
    the true dependence back on the product of phi~'s marginals
    (phi* = prod_i phi~_i + d), conditions phi* on the observation and
    projects.

    Raises:
        ZeroNormalizerError: If the observation is impossible under either side
    """
    f = state.factorization
    phi, mu, bk = _lockstep(model, state, observed)
    d = phi - product_values(model, project_values(model, phi, f), f)
    phi_tilde = predict_values(model, product_values(model, state.process, f))
    phi_star, clamped, magnitude = _repair(
        product_values(model, project_values(model, phi_tilde, f), f) + d, "type A prior"
    )
    mu_hat = _condition(model, phi_star, observed)
    return _finish(model, state, mu, bk, tuple(project_values(model, mu_hat, f)), clamped, magnitude)


def type_b_step(model: DbnModel, state: IsolationState,
                observed: Optional[Sequence[int]] = None) -> Tuple[IsolationState, IsolationRecord]:
    """
    One step of the process whose only error is conditioning without old dependencies

    The previous true dependence d- = mu- - prod_i mu-_i is added to the
    process's marginals (mu*- = prod_i mu^-_i + d-) and propagated to phi'.
    Only the dependence created by this step, d~ = phi~ - prod_i phi~_i with
    phi~ propagated from the product of the process's marginals, is kept for
    conditioning: phi^ = prod_i phi'_i + d~.

    Raises:
        ZeroNormalizerError: If the observation is impossible under either side
    """
    f = state.factorization
    d_minus = state.exact - product_values(model, project_values(model, state.exact, f), f)
    independent = product_values(model, state.process, f)
    phi_tilde = predict_values(model, independent)
    d_tilde = phi_tilde - product_values(model, project_values(model, phi_tilde, f), f)

    mu_star, clamped_prev, magnitude_prev = _repair(independent + d_minus, "type B previous posterior")
    phi_prime = predict_values(model, mu_star)
    phi_hat, clamped, magnitude = _repair(
        product_values(model, project_values(model, phi_prime, f), f) + d_tilde, "type B prior"
    )
    _, mu, bk = _lockstep(model, state, observed)
    mu_hat = _condition(model, phi_hat, observed)
    return _finish(model, state, mu, bk, tuple(project_values(model, mu_hat, f)),
                   clamped_prev + clamped, max(magnitude_prev, magnitude))


def run_error_decomposition(model: DbnModel, trajectory: Trajectory, mode: str = "monitoring",
                            factorization: Optional[Factorization] = None) -> ErrorDecomposition:
    """
    Run the exact filter, the factored filter and both isolated processes on one trajectory

    Args:
        model: DBN to filter
        trajectory: Observations to condition on (ignored in prediction mode)
        mode: "prediction" or "monitoring"
        factorization: Factors (defaults to the model's)

    Returns:
        ErrorDecomposition; every column is KL on the first factor's marginal

    Raises:
        ZeroNormalizerError: Tagged with the step at which evidence became impossible
    """
    if mode not in ("prediction", "monitoring"):
        raise ValueError(f"Unknown mode {mode!r}")
    trajectory.validate(model)
    monitoring = mode == "monitoring"
    state_a = state_b = initial_isolation_state(model, factorization)

    T = len(trajectory)
    total, type_a, type_b = np.zeros(T), np.zeros(T), np.zeros(T)
    for t in range(T):
        observed = trajectory.observations[t] if monitoring else None
        try:
            state_a, record_a = type_a_step(model, state_a, observed)
            state_b, record_b = type_b_step(model, state_b, observed)
        except ZeroNormalizerError as e:
            raise e.at_step(t + 1)
        total[t] = record_a.bk_kl
        type_a[t] = record_a.process_kl
        type_b[t] = record_b.process_kl

    if state_a.incidents or state_b.incidents:
        logger.info(f"error decomposition: clamped {state_a.incidents} (type A) and "
                    f"{state_b.incidents} (type B) negative cells, largest {max(state_a.max_clamped, state_b.max_clamped):.3g}")
    return ErrorDecomposition(
        factor=factor_label(state_a.factorization.factors[0]),
        total=total,
        type_a=type_a,
        type_b=type_b,
        incidents_a=state_a.incidents,
        incidents_b=state_b.incidents,
        max_clamped=max(state_a.max_clamped, state_b.max_clamped),
    )
