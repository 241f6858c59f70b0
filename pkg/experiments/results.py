# experiments/results.py - Result rows, aggregation and CSV / summary output

import csv
import logging
import math
import os
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

logger = logging.getLogger(__name__)

CSV_HEADER = ("experiment", "alpha", "run", "step", "metric", "value", "incidents")

# alpha, run and step use -1 for "not applicable" / "aggregate"
NO_ALPHA = -1.0
AGGREGATE = -1


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    alpha: float
    run: int
    step: int
    metric: str
    value: float
    incidents: int = 0

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"{self.experiment}/{self.metric}: non-finite value {self.value!r}")

    @property
    def is_aggregate(self) -> bool:
        return self.run == AGGREGATE and self.step == AGGREGATE

    @property
    def is_run_summary(self) -> bool:
        return self.run >= 0 and self.step == AGGREGATE

    def sort_key(self) -> Tuple:
        return (self.experiment, self.alpha, self.run, self.step, self.metric)

    def csv_fields(self) -> List[str]:
        return [self.experiment, repr(float(self.alpha)), str(self.run), str(self.step),
                self.metric, repr(float(self.value)), str(self.incidents)]


def run_rows(experiment: str, alpha: float, run: int, metrics: Dict[str, float],
             incidents: Optional[Dict[str, int]] = None) -> List[ResultRow]:
    """One per-run row (step -1) for each metric"""
    incidents = incidents or {}
    return [ResultRow(experiment, float(alpha), run, AGGREGATE, name, float(value), incidents.get(name, 0))
            for name, value in metrics.items()]


def step_rows(experiment: str, alpha: float, run: int, columns: Dict[str, np.ndarray]) -> List[ResultRow]:
    """Per-step rows, steps numbered from 1"""
    rows = []
    for name, column in columns.items():
        for t, value in enumerate(column, start=1):
            rows.append(ResultRow(experiment, float(alpha), run, t, name, float(value)))
    return rows


def aggregate(rows: Iterable[ResultRow]) -> List[ResultRow]:
    """
    Mean of the per-run rows for each (experiment, alpha, metric)

    Incidents are summed. Per-step and existing aggregate rows are ignored.
    """
    groups: Dict[Tuple[str, float, str], List[ResultRow]] = defaultdict(list)
    for row in rows:
        if row.is_run_summary:
            groups[(row.experiment, row.alpha, row.metric)].append(row)
    means = []
    for (experiment, alpha, metric), members in groups.items():
        members.sort(key=lambda r: r.run)
        value = math.fsum(r.value for r in members) / len(members)
        means.append(ResultRow(experiment, alpha, AGGREGATE, AGGREGATE, metric, value,
                               sum(r.incidents for r in members)))
    return means


def finalize(rows: Iterable[ResultRow]) -> List[ResultRow]:
    """Per-run rows plus their aggregates, in deterministic order"""
    rows = [r for r in rows if not r.is_aggregate]
    return sorted(rows + aggregate(rows), key=ResultRow.sort_key)


def write_csv(rows: Sequence[ResultRow], path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(row.csv_fields())
    logger.info(f"wrote {len(rows)} rows to {path}")


def read_csv(path: str) -> List[ResultRow]:
    """
    Raises:
        ValueError: If the header does not match CSV_HEADER
    """
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = tuple(next(reader, ()))
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {','.join(header)}")
        return [ResultRow(e, float(a), int(r), int(s), m, float(v), int(i)) for e, a, r, s, m, v, i in reader]


def aggregate_table(rows: Iterable[ResultRow], metric: str) -> Dict[float, float]:
    """alpha -> aggregate value of one metric"""
    return {r.alpha: r.value for r in rows if r.is_aggregate and r.metric == metric}


def trend(table: Dict[float, float]) -> Optional[float]:
    """Spearman correlation between (1 - alpha) and the value; None below three points or for constant values"""
    if len(table) < 3:
        return None
    alphas = sorted(table)
    values = [table[a] for a in alphas]
    if np.ptp(values) == 0.0:
        return None
    rho, _ = stats.spearmanr([-a for a in alphas], values)
    return float(rho)


def write_summary(lines: Sequence[str], path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
