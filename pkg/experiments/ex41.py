# experiments/ex41.py - Monitoring the six-variable chain under two factorizations

from typing import Dict, List, Optional, Sequence

import numpy as np

from filtering.comparison import ErrorSeries, run_comparison
from filtering.sampling import sample_trajectory
from model.dbn import DbnModel, Factorization
from model.generators import EXAMPLE41_FACTORIZATIONS, generate_example41_model
from probability.ops import kl_values
from separability.factorization import is_self_sufficient
from .config import ExperimentConfig
from .results import NO_ALPHA, ResultRow, aggregate_table, run_rows
from .runner import ExperimentRunner, RunTask, grid_tasks

EXPERIMENT = "ex41"

TRACKED = "U"


def factorization_tag(factorization: Factorization) -> str:
    """UVW|XYZ style tag used in metric names"""
    return "|".join("".join(f) for f in factorization)


def _variable_marginal(model: DbnModel, factor: Sequence, values: np.ndarray, name: str) -> np.ndarray:
    shape = tuple(model.variable(n).cardinality for n in factor)
    axis = tuple(i for i, n in enumerate(factor) if n != name)
    return values.reshape(shape).sum(axis=axis)


def _tracked_kl(model: DbnModel, factorization: Factorization, series: ErrorSeries) -> np.ndarray:
    i = factorization.factor_of(TRACKED)
    factor = factorization.factors[i]
    return np.array([
        kl_values(_variable_marginal(model, factor, exact[i], TRACKED),
                  _variable_marginal(model, factor, approx[i], TRACKED), where=TRACKED)
        for exact, approx in zip(series.exact_marginals, series.bk_marginals)
    ])


def build_model(config: ExperimentConfig) -> DbnModel:
    return generate_example41_model(config=config.generator_config())


def run_one(task: RunTask, config: ExperimentConfig) -> List[ResultRow]:
    """One sampled trajectory filtered under every candidate factorization"""
    model = build_model(config)
    trajectory = sample_trajectory(model, config.steps, task.seed(0))
    metrics: Dict[str, float] = {}
    for factorization in EXAMPLE41_FACTORIZATIONS.values():
        series = run_comparison(model, trajectory, mode="monitoring", factorization=factorization,
                                designated=[(TRACKED, 1)], keep_marginals=True)
        tag = factorization_tag(factorization)
        abs_error = series.abs_error[:, 0]
        kl = _tracked_kl(model, factorization, series)
        metrics[f"abs_error[{tag}]"] = float(abs_error.mean())
        metrics[f"kl[{tag}]"] = float(kl.mean())
        metrics[f"abs_error_final[{tag}]"] = float(abs_error[-1])
        metrics[f"kl_final[{tag}]"] = float(kl[-1])
    return run_rows(EXPERIMENT, NO_ALPHA, task.run, metrics)


def run(config: ExperimentConfig) -> List[ResultRow]:
    tasks = grid_tasks(EXPERIMENT, [NO_ALPHA], config.runs, config.master_seed)
    return ExperimentRunner(config.jobs).run(tasks, lambda task: run_one(task, config))


def summarize(rows: List[ResultRow], config: Optional[ExperimentConfig] = None) -> List[str]:
    config = config or ExperimentConfig()
    model = build_model(config)
    lines = [f"{EXPERIMENT}: monitoring with Z observed, errors on P({TRACKED} = T) ({config.describe()})"]
    errors = {}
    for label, factorization in EXAMPLE41_FACTORIZATIONS.items():
        tag = factorization_tag(factorization)
        abs_error = aggregate_table(rows, f"abs_error[{tag}]").get(NO_ALPHA)
        kl = aggregate_table(rows, f"kl[{tag}]").get(NO_ALPHA)
        check = is_self_sufficient(model, factorization)
        degrees = ", ".join(f"{d:.3f}" for d in check.degrees)
        if abs_error is None or kl is None:
            continue
        errors[label] = (abs_error, kl)
        lines.append(f"  {label:>11}: mean |dP| = {abs_error:.4f}, mean KL = {kl:.5f}, "
                     f"factor degrees ({degrees}){' self-sufficient' if check.sufficient else ''}")
    if len(errors) == 2:
        (a_label, a), (b_label, b) = sorted(errors.items(), key=lambda item: item[1][0])
        better = "both metrics" if a[1] <= b[1] else "|dP| only"
        lines.append(f"  {a_label} has the smaller error ({better})")
    return lines
