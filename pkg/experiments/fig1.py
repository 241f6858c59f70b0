# experiments/fig1.py - Factored-filter error against degree of separability

import logging
from typing import List, Optional

from filtering.comparison import run_comparison
from filtering.sampling import sample_trajectory
from model.generators import generate_figure1_model
from .config import ExperimentConfig
from .results import ResultRow, aggregate_table, run_rows, step_rows, trend
from .runner import ExperimentRunner, RunTask, grid_tasks

logger = logging.getLogger(__name__)

EXPERIMENT = "fig1"

METRICS = ("prediction_kl", "monitoring_kl", "dependence_kl")


def run_one(task: RunTask, config: ExperimentConfig) -> List[ResultRow]:
    """
    One random model at the task's alpha

    prediction_kl and monitoring_kl are KL(true || factored) on X's marginal
    without and with conditioning on Z; dependence_kl is KL from the true
    posterior to the product of its own marginals.
    """
    model = generate_figure1_model(task.alpha, task.seed(0), config.generator_config())
    trajectory = sample_trajectory(model, config.steps, task.seed(1))
    prediction = run_comparison(model, trajectory, mode="prediction")
    monitoring = run_comparison(model, trajectory, mode="monitoring")

    x_column = f"kl[{prediction.factor_labels[0]}]"
    columns = {
        "prediction_kl": prediction.columns()[x_column],
        "monitoring_kl": monitoring.columns()[x_column],
        "dependence_kl": monitoring.dependence_kl,
    }
    metrics = {name: float(column.mean()) for name, column in columns.items()}
    metrics.update({f"{name}_final": float(column[-1]) for name, column in columns.items()})

    rows = run_rows(EXPERIMENT, task.alpha, task.run, metrics)
    if config.emit_steps:
        rows.extend(step_rows(EXPERIMENT, task.alpha, task.run, columns))
    return rows


def run(config: ExperimentConfig) -> List[ResultRow]:
    tasks = grid_tasks(EXPERIMENT, config.alpha_grid, config.runs, config.master_seed)
    return ExperimentRunner(config.jobs).run(tasks, lambda task: run_one(task, config))


def summarize(rows: List[ResultRow], config: Optional[ExperimentConfig] = None) -> List[str]:
    lines = [f"{EXPERIMENT}: mean time-averaged KL on X's marginal by alpha"]
    if config is not None:
        lines[0] += f" ({config.describe()})"
    tables = {name: aggregate_table(rows, name) for name in METRICS}
    lines.append("  alpha  " + "  ".join(f"{name:>14}" for name in METRICS))
    for alpha in sorted(tables["prediction_kl"]):
        lines.append(f"  {alpha:5.2f}  " + "  ".join(f"{tables[name][alpha]:14.6g}" for name in METRICS))

    for name in ("prediction_kl", "monitoring_kl"):
        rho = trend(tables[name])
        shown = "n/a" if rho is None else f"{rho:.3f}"
        lines.append(f"  {name}: Spearman rho against (1 - alpha) = {shown}")

    prediction = tables["prediction_kl"]
    if 1.0 in prediction:
        lines.append(f"  prediction_kl at alpha = 1: {prediction[1.0]:.3g}")
    monitoring = tables["monitoring_kl"]
    if 0.0 in monitoring and 1.0 in monitoring and monitoring[0.0] > 0.0:
        lines.append(f"  monitoring_kl ratio alpha 1 / alpha 0: {monitoring[1.0] / monitoring[0.0]:.3f}")
    dependence = tables["dependence_kl"]
    if dependence:
        alphas = sorted(dependence)
        argmin = min(alphas, key=dependence.__getitem__)
        interior = alphas[0] < argmin < alphas[-1]
        lines.append(f"  dependence_kl minimum at alpha = {argmin:.2f} ({'interior' if interior else 'endpoint'})")
    return lines
