# experiments/thm61.py - Closed-form error bounds against Monte-Carlo errors on two-chain systems

import logging
from typing import Dict, List, Optional

import numpy as np

from analysis.bounds import TYPO_READINGS, theorem61_bound
from analysis.monte_carlo import ExpectedErrors, exact_expected_errors, monte_carlo_errors
from model.two_chain import generate_two_chain_system
from .config import ExperimentConfig
from .results import NO_ALPHA, ResultRow, aggregate_table, run_rows
from .runner import ExperimentRunner, RunTask, grid_tasks

logger = logging.getLogger(__name__)

EXPERIMENT = "thm61"

X_ERROR = "delta[X]"

# differences below this are treated as agreement when the standard error is zero
_AGREEMENT = 1e-12


def agreement_z(exact: ExpectedErrors, sampled: ExpectedErrors) -> float:
    """Largest per-step |exact - sampled| in standard errors of the sampled E[delta_X]"""
    diff = np.abs(exact.delta_factor[:, 0] - sampled.delta_factor[:, 0])
    stderr = sampled.stderr_factor[:, 0]
    z = np.where(diff <= _AGREEMENT, 0.0, diff / np.maximum(stderr, _AGREEMENT))
    return float(z.max())


def run_one(task: RunTask, config: ExperimentConfig) -> List[ResultRow]:
    """
    One sampled system: bounds under both readings of the Y-side term and
    the Monte-Carlo expected errors they should dominate

    Bound rows are only emitted for readings under which the bound applies;
    the `applicable[...]` indicator is always emitted.
    """
    system, model = generate_two_chain_system(task.seed(0), config.generator_config())
    sampled = monte_carlo_errors(model, config.steps, config.sequences, task.seed(1))
    averages = sampled.time_average()
    peaks = sampled.peak()
    actual = averages[X_ERROR]

    metrics: Dict[str, float] = {
        "actual_delta": averages["delta"],
        "actual_delta_x": actual,
        "actual_delta_y": averages["delta[Y]"],
        "peak_delta_x": peaks[X_ERROR],
    }
    for reading in TYPO_READINGS:
        bound = theorem61_bound(system, reading)
        metrics[f"applicable[{reading}]"] = 1.0 if bound.applicable else 0.0
        if not bound.applicable:
            continue
        metrics[f"bound_h[{reading}]"] = bound.H
        metrics[f"bound_j[{reading}]"] = bound.J
        metrics[f"bound_k[{reading}]"] = bound.K
        metrics[f"actual_delta_x[{reading}]"] = actual
        metrics[f"dominated[{reading}]"] = 1.0 if bound.J >= actual else 0.0
        metrics[f"dominated_peak[{reading}]"] = 1.0 if bound.J >= peaks[X_ERROR] else 0.0

    if task.run < config.exact_check_systems:
        exact = exact_expected_errors(model, config.exact_check_steps)
        check = monte_carlo_errors(model, config.exact_check_steps, config.sequences, task.seed(2))
        metrics["exact_check_z"] = agreement_z(exact, check)
        logger.debug(f"{EXPERIMENT}: system {task.run} exact check z = {metrics['exact_check_z']:.2f}")
    return run_rows(EXPERIMENT, NO_ALPHA, task.run, metrics)


def run(config: ExperimentConfig) -> List[ResultRow]:
    tasks = grid_tasks(EXPERIMENT, [NO_ALPHA], config.runs, config.master_seed)
    return ExperimentRunner(config.jobs).run(tasks, lambda task: run_one(task, config))


def summarize(rows: List[ResultRow], config: Optional[ExperimentConfig] = None) -> List[str]:
    def mean(metric: str):
        return aggregate_table(rows, metric).get(NO_ALPHA)

    lines = [f"{EXPERIMENT}: bound J on E[delta_X] against its Monte-Carlo estimate"]
    if config is not None:
        lines[0] += f" ({config.describe()}, {config.sequences} sequences)"
    actual = mean("actual_delta_x")
    if actual is not None:
        lines.append(f"  average actual E[delta_X] over all systems: {actual:.6g}")
    for reading in TYPO_READINGS:
        applicable = mean(f"applicable[{reading}]")
        if applicable is None:
            continue
        lines.append(f"  reading {reading}: bound applies to {100.0 * applicable:.1f}% of systems")
        bound = mean(f"bound_j[{reading}]")
        if bound is None:
            continue
        covered = mean(f"actual_delta_x[{reading}]")
        lines.append(f"    average bound J = {bound:.6g}, average actual on those systems = {covered:.6g}")
        lines.append(f"    dominance rate (time-averaged) = {100.0 * mean(f'dominated[{reading}]'):.1f}%, "
                     f"(peak) = {100.0 * mean(f'dominated_peak[{reading}]'):.1f}%")
    checks = [r.value for r in rows if r.is_run_summary and r.metric == "exact_check_z"]
    if checks:
        within = sum(1 for z in checks if z <= 3.0)
        lines.append(f"  exact enumeration agrees with Monte-Carlo within 3 standard errors "
                     f"for {within} of {len(checks)} systems (largest z = {max(checks):.2f})")
    return lines
