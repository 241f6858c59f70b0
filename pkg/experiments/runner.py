# experiments/runner.py - Seeded, optionally threaded execution of experiment runs

import logging
import threading
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence

import numpy as np

from .results import ResultRow, finalize

logger = logging.getLogger(__name__)


def derive_seed(master_seed: int, experiment: str, alpha_index: int, run: int, stream: int = 0) -> int:
    """
    Seed of one random stream of one run

    A pure function of its arguments, so results do not depend on the
    order or thread in which runs execute.
    """
    sequence = np.random.SeedSequence([master_seed, zlib.crc32(experiment.encode()), alpha_index, run, stream])
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


@dataclass(frozen=True)
class RunTask:
    experiment: str
    alpha_index: int
    alpha: float
    run: int
    master_seed: int

    def seed(self, stream: int = 0) -> int:
        return derive_seed(self.master_seed, self.experiment, self.alpha_index, self.run, stream)


RunFunction = Callable[[RunTask], List[ResultRow]]


class ExperimentRunner:
    """Runs independent tasks on a thread pool and collects their rows in a fixed order"""

    def __init__(self, jobs: int = 1):
        self.jobs = max(1, jobs)
        self._progress_lock = threading.Lock()
        self._remaining: Dict[int, int] = {}
        self._totals: Dict[int, int] = {}

    def _task_done(self, task: RunTask) -> None:
        with self._progress_lock:
            self._remaining[task.alpha_index] -= 1
            if self._remaining[task.alpha_index] == 0:
                where = f"alpha {task.alpha:.2f} " if task.alpha >= 0.0 else ""
                logger.info(f"{task.experiment}: {where}done ({self._totals[task.alpha_index]} runs)")

    def _execute(self, fn: RunFunction, task: RunTask) -> List[ResultRow]:
        rows = fn(task)
        self._task_done(task)
        return rows

    def run(self, tasks: Sequence[RunTask], fn: RunFunction) -> List[ResultRow]:
        """
        Execute every task and return per-run rows plus aggregates

        Args:
            tasks: Runs to execute
            fn: Computes the rows of one run

        Returns:
            Rows sorted by (experiment, alpha, run, step, metric)
        """
        self._remaining = {}
        for task in tasks:
            self._remaining[task.alpha_index] = self._remaining.get(task.alpha_index, 0) + 1
        self._totals = dict(self._remaining)

        if self.jobs == 1:
            batches = [self._execute(fn, task) for task in tasks]
        else:
            with ThreadPoolExecutor(max_workers=self.jobs) as pool:
                batches = list(pool.map(lambda task: self._execute(fn, task), tasks))
        return finalize(row for batch in batches for row in batch)


def grid_tasks(experiment: str, alphas: Sequence[float], runs: int, master_seed: int) -> List[RunTask]:
    """One task per (alpha, run), alpha-major"""
    return [RunTask(experiment, a, float(alpha), r, master_seed)
            for a, alpha in enumerate(alphas) for r in range(runs)]
