# experiments/__init__.py - Experiment registry and file output
import logging
import os
from typing import Callable, Dict, List, NamedTuple, Sequence

from probability.errors import ConfigurationError
from . import ex41, fig1, fig4, thm61
from .config import ExperimentConfig
from .results import CSV_HEADER, ResultRow, read_csv, write_csv, write_summary

logger = logging.getLogger(__name__)


class Experiment(NamedTuple):
    run: Callable[[ExperimentConfig], List[ResultRow]]
    summarize: Callable[[List[ResultRow], ExperimentConfig], List[str]]


EXPERIMENTS: Dict[str, Experiment] = {
    fig1.EXPERIMENT: Experiment(fig1.run, fig1.summarize),
    fig4.EXPERIMENT: Experiment(fig4.run, fig4.summarize),
    ex41.EXPERIMENT: Experiment(ex41.run, ex41.summarize),
    thm61.EXPERIMENT: Experiment(thm61.run, thm61.summarize),
}

COMBINED_FILE = "combined.csv"
SUMMARY_FILE = "summary.txt"


def resolve_names(names: Sequence[str]) -> List[str]:
    """
    Expand "all" and check experiment names

    Raises:
        ConfigurationError: For an unknown experiment
    """
    resolved: List[str] = []
    for name in names:
        if name == "all":
            chosen = list(EXPERIMENTS)
        elif name in EXPERIMENTS:
            chosen = [name]
        else:
            raise ConfigurationError(f"Unknown experiment {name!r} (choose from {', '.join(EXPERIMENTS)}, all)")
        resolved.extend(n for n in chosen if n not in resolved)
    return resolved


def run_experiments(names: Sequence[str], config: ExperimentConfig, out_dir: str) -> List[str]:
    """
    Run experiments and write <name>.csv for each, combined.csv and summary.txt

    Args:
        names: Experiment names or "all"
        config: Shared settings
        out_dir: Output directory (created if missing)

    Returns:
        Summary lines, also written to summary.txt
    """
    rows: List[ResultRow] = []
    summary: List[str] = []
    for name in resolve_names(names):
        experiment = EXPERIMENTS[name]
        logger.info(f"{name}: {config.describe()}, {config.jobs} job(s)")
        result = experiment.run(config)
        write_csv(result, os.path.join(out_dir, f"{name}.csv"))
        rows.extend(result)
        if summary:
            summary.append("")
        summary.extend(experiment.summarize(result, config))
    write_csv(rows, os.path.join(out_dir, COMBINED_FILE))
    write_summary(summary, os.path.join(out_dir, SUMMARY_FILE))
    return summary


__all__ = [
    "CSV_HEADER",
    "EXPERIMENTS",
    "Experiment",
    "ExperimentConfig",
    "ResultRow",
    "read_csv",
    "resolve_names",
    "run_experiments",
]
