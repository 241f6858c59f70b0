# cli/formatting.py - Text reports and CSV tables printed by the command-line tool

import csv
import io
from typing import Dict, List, Optional, Sequence

import numpy as np

from probability.tables import Cpd, assignment_of
from separability.factorization import RankedFactorization, SelfSufficiency
from separability.methods import DegreeAnalysis

ANALYZE_HEADER = ("child", "grouping", "method", "alpha", "group_weights", "residual_weight",
                  "nonnegative_weights", "lp_alpha", "gap", "recombination_error")

FACTORIZE_HEADER = ("rank", "factorization", "min_degree", "mean_degree", "degrees")


def _number(value: float) -> str:
    return f"{value:.6f}"


def csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    """CSV with '\\n' line endings and floats written with repr"""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return out.getvalue()


def cpd_lines(cpd: Cpd, indent: str = "    ") -> List[str]:
    """One line per parent row: (parent values) -> child distribution"""
    lines = []
    for r, row in enumerate(cpd.table):
        parents = assignment_of(cpd.parent_scope, r) if cpd.parent_scope else ()
        shown = ", ".join(f"{n}={v}" for n, v in zip(cpd.parent_names, parents)) or "-"
        lines.append(f"{indent}{shown:<28} " + " ".join(f"{p:.6f}" for p in row))
    return lines


def analysis_report(analysis: DegreeAnalysis, child: str) -> List[str]:
    """Human-readable report of one degree computation"""
    lines = [f"{child}: method {analysis.method}", f"alpha = {_number(analysis.alpha)}"]

    if analysis.persistence is not None:
        result = analysis.persistence
        lines.append(f"  persistence kappa = {_number(result.kappa)}")
        if result.residual is not None:
            lines.append(f"  residual (weight {_number(1.0 - result.kappa)}):")
            lines.extend(cpd_lines(result.residual))
    else:
        d = analysis.decomposition
        lines.append(f"  grouping {d.grouping.label}")
        for group, weight, component in zip(d.grouping.groups, d.group_weights, d.components):
            lines.append(f"  component on {','.join(group)} (weight {_number(weight)}):")
            lines.extend(cpd_lines(component))
        if d.residual is not None:
            lines.append(f"  residual (weight {_number(d.residual_weight)}):")
            lines.extend(cpd_lines(d.residual))
        if not d.nonnegative_weights:
            lines.append("  optimum needs a negative group weight")
        if d.trace is not None:
            t = d.trace
            lines.append(f"  {t.case} trace: deviations {np.array2string(t.deviations, precision=6)}")
            if t.partial_sums is not None:
                lines.append(f"    partial sums {np.array2string(t.partial_sums, precision=6)}")
            if t.C_star is not None:
                lines.append(f"    C* = {_number(t.C_star)}, C_* = {_number(t.C_substar)}")
            if t.G is not None:
                lines.append(f"    G = {_number(t.G)}")
            if t.B_values is not None:
                lines.append(f"    B = {np.array2string(t.B_values, precision=6)}")

    v = analysis.verification
    if v is not None:
        lines.append(f"  verify: LP alpha = {_number(v.lp_alpha)}, gap = {v.gap:.3g}, "
                     f"recombination error = {v.recombination_error:.3g} (LP {v.lp_recombination_error:.3g})")
    return lines


def analysis_row(analysis: DegreeAnalysis, child: str) -> List:
    """One ANALYZE_HEADER row"""
    if analysis.persistence is not None:
        grouping, weights, residual, nonnegative = "", "", 1.0 - analysis.persistence.kappa, True
    else:
        d = analysis.decomposition
        grouping = d.grouping.label
        weights = ";".join(repr(float(w)) for w in d.group_weights)
        residual, nonnegative = d.residual_weight, d.nonnegative_weights
    v = analysis.verification
    return [child, grouping, analysis.method, float(analysis.alpha), weights, float(residual),
            str(nonnegative).lower(),
            "" if v is None else float(v.lp_alpha),
            "" if v is None else float(v.gap),
            "" if v is None else float(v.recombination_error)]


def sufficiency_line(check: SelfSufficiency) -> str:
    degrees = ", ".join(_number(d) for d in check.degrees)
    verdict = "self-sufficient" if check.sufficient else "not self-sufficient"
    return f"{check.factorization.label}: degrees ({degrees}), {verdict} at the {check.level} level"


def ranking_rows(ranking: Sequence[RankedFactorization]) -> List[List]:
    return [[rank, r.factorization.label, float(r.min_degree), float(r.mean_degree),
             ";".join(repr(float(d)) for d in r.degrees)]
            for rank, r in enumerate(ranking, start=1)]


def ranking_table(ranking: Sequence[RankedFactorization], limit: Optional[int] = None) -> List[str]:
    """Aligned text table of ranked factorizations"""
    shown = ranking if limit is None else ranking[:limit]
    width = max([len(r.factorization.label) for r in shown] + [len("factorization")])
    lines = [f"{'rank':>4}  {'factorization':<{width}}  {'min':>8}  {'mean':>8}  degrees"]
    for rank, r in enumerate(shown, start=1):
        degrees = ", ".join(f"{d:.4f}" for d in r.degrees)
        lines.append(f"{rank:>4}  {r.factorization.label:<{width}}  {r.min_degree:8.4f}  {r.mean_degree:8.4f}  {degrees}")
    if limit is not None and len(ranking) > limit:
        lines.append(f"  ... {len(ranking) - limit} more")
    return lines


def filter_table(columns: Dict[str, np.ndarray], observations: Optional[np.ndarray],
                 observation_names: Sequence[str]) -> str:
    """Per-step CSV: step, observed values, then every column"""
    header = ["step"]
    if observations is not None:
        header.extend(f"obs:{name}" for name in observation_names)
    header.extend(columns)
    steps = len(next(iter(columns.values())))
    rows = []
    for t in range(steps):
        row: List = [t + 1]
        if observations is not None:
            row.extend(int(v) for v in observations[t])
        row.extend(float(column[t]) for column in columns.values())
        rows.append(row)
    return csv_text(header, rows)
