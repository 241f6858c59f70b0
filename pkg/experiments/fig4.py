# experiments/fig4.py - Total, Type A and Type B error against degree of separability

from typing import List, Optional

from analysis.isolation import run_error_decomposition
from filtering.sampling import sample_trajectory
from model.generators import generate_figure1_model
from .config import ExperimentConfig
from .results import ResultRow, aggregate_table, run_rows, step_rows
from .runner import ExperimentRunner, RunTask, grid_tasks

EXPERIMENT = "fig4"

METRICS = ("total", "type_a", "type_b")


def run_one(task: RunTask, config: ExperimentConfig) -> List[ResultRow]:
    """KL on X's marginal of the factored filter and of both isolated processes, monitoring Z"""
    model = generate_figure1_model(task.alpha, task.seed(0), config.generator_config())
    trajectory = sample_trajectory(model, config.steps, task.seed(1))
    decomposition = run_error_decomposition(model, trajectory, mode="monitoring")

    metrics = decomposition.time_average()
    metrics.update({f"{name}_final": value for name, value in decomposition.final().items()})
    incidents = {
        "type_a": decomposition.incidents_a,
        "type_a_final": decomposition.incidents_a,
        "type_b": decomposition.incidents_b,
        "type_b_final": decomposition.incidents_b,
    }
    rows = run_rows(EXPERIMENT, task.alpha, task.run, metrics, incidents)
    if config.emit_steps:
        rows.extend(step_rows(EXPERIMENT, task.alpha, task.run, decomposition.columns()))
    return rows


def run(config: ExperimentConfig) -> List[ResultRow]:
    tasks = grid_tasks(EXPERIMENT, config.alpha_grid, config.runs, config.master_seed)
    return ExperimentRunner(config.jobs).run(tasks, lambda task: run_one(task, config))


def summarize(rows: List[ResultRow], config: Optional[ExperimentConfig] = None) -> List[str]:
    tables = {name: aggregate_table(rows, name) for name in METRICS}
    lines = [f"{EXPERIMENT}: mean time-averaged KL on X's marginal by alpha"]
    if config is not None:
        lines[0] += f" ({config.describe()})"
    lines.append("  alpha           total          type_a          type_b   B/total")
    ratios = []
    for alpha in sorted(tables["total"]):
        total = tables["total"][alpha]
        share_b = tables["type_b"][alpha] / total if total > 0.0 else 0.0
        if total > 0.0:
            ratios.append(tables["type_a"][alpha] / total)
        lines.append(f"  {alpha:5.2f}  {total:14.6g}  {tables['type_a'][alpha]:14.6g}  "
                     f"{tables['type_b'][alpha]:14.6g}  {share_b:8.3f}")
    if ratios:
        lines.append(f"  type_a / total averaged over alpha bins: {sum(ratios) / len(ratios):.3f}")
    low = [a for a in tables["total"] if a <= 0.5 and tables["total"][a] > 0.0]
    if low:
        worst = max(tables["type_b"][a] / tables["total"][a] for a in low)
        lines.append(f"  largest type_b / total for alpha <= 0.5: {worst:.3f}")
    clamped = sum(r.incidents for r in rows if r.is_aggregate and r.metric in ("type_a", "type_b"))
    lines.append(f"  negative cells clamped in the isolated processes: {clamped}")
    return lines
