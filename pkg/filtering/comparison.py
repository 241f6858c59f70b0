# filtering/comparison.py - Exact vs factored filter run in lockstep, per-step errors

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from model.dbn import DbnModel, Factorization
from probability.errors import ZeroNormalizerError
from probability.ops import kl_values
from probability.tables import scope_shape
from .exact import condition_values, predict_values, product_values, project_values
from .sampling import Trajectory

MODES = ("prediction", "monitoring")

Designated = Tuple[str, int]


@dataclass
class ErrorSeries:
    """
    Per-step errors of the factored filter against the exact filter.

    Row t-1 holds step t. `delta_true` compares the true joint with the
    product of its own marginals; `delta_bk` compares it with the product
    of the factored filter's marginals.
    """
    mode: str
    factor_labels: List[str]
    designated: List[Designated]
    kl: np.ndarray              # (T, m)
    abs_error: np.ndarray       # (T, len(designated))
    delta_factor: np.ndarray    # (T, m) max-norm error per factor marginal
    delta_true: np.ndarray      # (T,)
    delta_bk: np.ndarray        # (T,)
    dependence_kl: np.ndarray   # (T,) KL(true joint || product of true marginals)
    exact_marginals: List[List[np.ndarray]] = field(default_factory=list, repr=False)
    bk_marginals: List[List[np.ndarray]] = field(default_factory=list, repr=False)

    def __len__(self) -> int:
        return len(self.delta_true)

    def columns(self) -> Dict[str, np.ndarray]:
        """Every metric as a named per-step column"""
        cols: Dict[str, np.ndarray] = {}
        for i, label in enumerate(self.factor_labels):
            cols[f"kl[{label}]"] = self.kl[:, i]
        for k, (name, value) in enumerate(self.designated):
            cols[f"abs[P({name}={value})]"] = self.abs_error[:, k]
        for i, label in enumerate(self.factor_labels):
            cols[f"delta[{label}]"] = self.delta_factor[:, i]
        cols["delta_true"] = self.delta_true
        cols["delta_bk"] = self.delta_bk
        cols["dependence_kl"] = self.dependence_kl
        return cols

    def time_average(self) -> Dict[str, float]:
        """Mean of each metric over t = 1..T"""
        return {name: float(np.mean(col)) for name, col in self.columns().items()}

    def final(self) -> Dict[str, float]:
        """Each metric at t = T"""
        return {name: float(col[-1]) for name, col in self.columns().items()}


def default_designated(model: DbnModel) -> List[Designated]:
    """P(var = last value) for every state variable (P(var = T) for binary variables)"""
    return [(v.name, v.cardinality - 1) for v in model.state_vars]


def factor_label(factor: Sequence[str]) -> str:
    return "".join(factor) if all(len(n) == 1 for n in factor) else ".".join(factor)


def run_comparison(model: DbnModel, trajectory: Trajectory, mode: str = "monitoring",
                   factorization: Optional[Factorization] = None,
                   designated: Optional[Sequence[Designated]] = None,
                   keep_marginals: bool = False) -> ErrorSeries:
    """
    Run the exact and factored filters side by side along a trajectory

    Args:
        model: DBN to filter
        trajectory: Observations to condition on (ignored in prediction mode)
        mode: "prediction" or "monitoring"
        factorization: Factors for the factored filter (defaults to the model's)
        designated: (variable, value) pairs whose probabilities are compared
        keep_marginals: Store both filters' factor marginals per step

    Returns:
        ErrorSeries with one row per step t = 1..T

    Raises:
        ValueError: For an unknown mode
        ZeroNormalizerError: Tagged with the step at which evidence became impossible
    """
    if mode not in MODES:
        raise ValueError(f"Unknown mode {mode!r} (expected one of {', '.join(MODES)})")
    trajectory.validate(model)
    factorization = factorization or model.factorization
    designated = list(designated) if designated is not None else default_designated(model)
    names = model.state_names
    shape = scope_shape(model.state_vars)
    monitoring = mode == "monitoring" and len(model.observations) > 0

    T, m = len(trajectory), len(factorization)
    kl = np.zeros((T, m))
    abs_error = np.zeros((T, len(designated)))
    delta_factor = np.zeros((T, m))
    delta_true = np.zeros(T)
    delta_bk = np.zeros(T)
    dependence_kl = np.zeros(T)
    exact_log: List[List[np.ndarray]] = []
    bk_log: List[List[np.ndarray]] = []

    exact = model.prior_joint().values
    approx = project_values(model, exact, factorization)

    for t in range(T):
        try:
            exact = predict_values(model, exact)
            approx_joint = predict_values(model, product_values(model, approx, factorization))
            if monitoring:
                observed = trajectory.observations[t]
                exact = condition_values(model, exact, observed)
                approx_joint = condition_values(model, approx_joint, observed)
        except ZeroNormalizerError as e:
            raise e.at_step(t + 1)
        approx = project_values(model, approx_joint, factorization)
        true_marginals = project_values(model, exact, factorization)

        for i in range(m):
            kl[t, i] = kl_values(true_marginals[i], approx[i], where=factor_label(factorization.factors[i]))
            delta_factor[t, i] = float(np.max(np.abs(true_marginals[i] - approx[i])))

        exact_arr = exact.reshape(shape)
        bk_arr = product_values(model, approx, factorization).reshape(shape)
        for k, (name, value) in enumerate(designated):
            axis = tuple(j for j in range(len(names)) if names[j] != name)
            abs_error[t, k] = abs(float(exact_arr.sum(axis=axis)[value] - bk_arr.sum(axis=axis)[value]))

        independent = product_values(model, true_marginals, factorization)
        delta_true[t] = float(np.max(np.abs(exact - independent)))
        delta_bk[t] = float(np.max(np.abs(exact - bk_arr.ravel())))
        dependence_kl[t] = kl_values(exact, independent, where="joint")

        if keep_marginals:
            exact_log.append(true_marginals)
            bk_log.append(approx)

    return ErrorSeries(
        mode=mode,
        factor_labels=[factor_label(f) for f in factorization],
        designated=designated,
        kl=kl,
        abs_error=abs_error,
        delta_factor=delta_factor,
        delta_true=delta_true,
        delta_bk=delta_bk,
        dependence_kl=dependence_kl,
        exact_marginals=exact_log,
        bk_marginals=bk_log,
    )
