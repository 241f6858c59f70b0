# cli/commands.py - Subcommand implementations: analyze, filter, factorize, experiment, export

import argparse
import logging
import os
from typing import Dict, List, Optional, Tuple

import numpy as np

import config
from experiments import run_experiments
from experiments.config import ExperimentConfig
from filtering.bk import bk_predict_step, bk_step, initial_belief
from filtering.comparison import run_comparison
from filtering.exact import exact_filter_step, exact_predict_step
from filtering.sampling import Trajectory, sample_trajectory
from model.dbn import DbnModel, Factorization
from model.model_io import serialize_cpd_document, serialize_model
from probability.errors import ScopeError, ZeroNormalizerError
from probability.ops import marginalize
from probability.tables import Cpd
from separability.factorization import is_self_sufficient, search_factorization
from separability.methods import analyze_cpd
from separability.types import Grouping
from . import formatting
from .sources import load_model_source, load_source, read_observations

logger = logging.getLogger(__name__)

FILTER_MODES = ("exact", "bk", "both")
FILTER_TASKS = {"predict": "prediction", "monitor": "monitoring"}


def _model_grouping(model: DbnModel, cpd: Cpd) -> Grouping:
    """Parents of a transition CPD grouped by the model's factors, in factor order"""
    groups: Dict[int, List[str]] = {}
    for parent in cpd.parent_names:
        groups.setdefault(model.factorization.factor_of(parent), []).append(parent)
    return Grouping(groups[i] for i in sorted(groups))


def _analysis_targets(args: argparse.Namespace) -> List[Tuple[str, Cpd, Optional[Grouping]]]:
    source = load_source(args.source)
    given = Grouping.parse(args.grouping) if args.grouping else None

    if isinstance(source, Cpd):
        if args.child:
            raise ScopeError("--child selects a CPD of a model; the source is a single CPD")
        grouping = given
        if grouping is None and args.method != "persistence":
            grouping = Grouping.halves(source)
        return [(source.child_names[0], source, grouping)]

    names = [args.child] if args.child else list(source.state_names)
    targets = []
    for name in names:
        source.variable(name)
        cpd = source.transition_cpd(name)
        targets.append((name, cpd, given or _model_grouping(source, cpd)))
    return targets


def cmd_analyze(args: argparse.Namespace) -> int:
    """Degree of separability of one CPD, or of every transition CPD of a model"""
    csv_rows = []
    for child, cpd, grouping in _analysis_targets(args):
        if args.method != "persistence" and len(grouping) < 2:
            # Parents all in one group: trivially separable
            if args.format == "csv":
                csv_rows.append([child, grouping.label, "single-group", 1.0, "", 0.0, "true", "", "", ""])
            else:
                print(f"{child}: parents lie in one group ({grouping.label})")
                print(f"alpha = {1.0:.6f}")
            continue
        analysis = analyze_cpd(cpd, grouping, args.method, verify=args.verify)
        if args.format == "csv":
            csv_rows.append(formatting.analysis_row(analysis, child))
        else:
            print("\n".join(formatting.analysis_report(analysis, child)))
    if args.format == "csv":
        print(formatting.csv_text(formatting.ANALYZE_HEADER, csv_rows), end="")
    return 0


def _trajectory(args: argparse.Namespace, model: DbnModel) -> Trajectory:
    if args.obs:
        trajectory = Trajectory.from_observations(read_observations(args.obs, model))
    else:
        trajectory = sample_trajectory(model, args.sample, args.seed)
    trajectory.validate(model)
    return trajectory


def _marginal_columns(model: DbnModel, beliefs, prefix: str) -> Dict[str, np.ndarray]:
    columns: Dict[str, np.ndarray] = {}
    for var in model.state_vars:
        for value in range(var.cardinality):
            columns[f"{prefix}P({var.name}={value})"] = np.array([b[var.name][value] for b in beliefs])
    return columns


def _exact_marginals(model: DbnModel, trajectory: Trajectory, monitoring: bool) -> List[Dict[str, np.ndarray]]:
    belief = model.prior_joint()
    beliefs = []
    for t in range(len(trajectory)):
        try:
            if monitoring:
                belief = exact_filter_step(model, belief, trajectory.observations[t])
            else:
                belief = exact_predict_step(model, belief)
        except ZeroNormalizerError as e:
            raise e.at_step(t + 1)
        beliefs.append({name: marginalize(belief, [name]).values for name in model.state_names})
    return beliefs


def _bk_marginals(model: DbnModel, trajectory: Trajectory, monitoring: bool,
                  factorization: Factorization) -> List[Dict[str, np.ndarray]]:
    fb = initial_belief(model, factorization)
    beliefs = []
    for t in range(len(trajectory)):
        try:
            fb = bk_step(model, fb, trajectory.observations[t]) if monitoring else bk_predict_step(model, fb)
        except ZeroNormalizerError as e:
            raise e.at_step(t + 1)
        beliefs.append({name: fb.marginal(name).values for name in model.state_names})
    return beliefs


def cmd_filter(args: argparse.Namespace) -> int:
    """Per-step marginals of the exact and/or factored filter as CSV"""
    model = load_model_source(args.source)
    factorization = Factorization.parse(args.factorization) if args.factorization else model.factorization
    factorization.validate(model.state_names)
    trajectory = _trajectory(args, model)
    mode = FILTER_TASKS[args.task]
    monitoring = mode == "monitoring"

    columns: Dict[str, np.ndarray] = {}
    if args.mode in ("exact", "both"):
        columns.update(_marginal_columns(model, _exact_marginals(model, trajectory, monitoring), "exact:"))
    if args.mode in ("bk", "both"):
        columns.update(_marginal_columns(model, _bk_marginals(model, trajectory, monitoring, factorization), "bk:"))
    if args.mode == "both":
        series = run_comparison(model, trajectory, mode=mode, factorization=factorization)
        columns.update(series.columns())

    observations = trajectory.observations if monitoring else None
    names = [var.name for var, _ in model.observations]
    print(formatting.filter_table(columns, observations, names), end="")
    return 0


def cmd_factorize(args: argparse.Namespace) -> int:
    """Rank candidate factorizations by degree of separability"""
    model = load_model_source(args.source)
    ranking = search_factorization(model, args.max_factor_size, level=args.level)
    if args.format == "csv":
        print(formatting.csv_text(formatting.FACTORIZE_HEADER, formatting.ranking_rows(ranking)), end="")
        return 0

    print(f"{model.name}: {len(model.state_names)} state variables, "
          f"{len(ranking)} factorizations with factors of at most {args.max_factor_size}")
    current = is_self_sufficient(model, level=args.level)
    print("model factorization " + formatting.sufficiency_line(current))
    for _, candidate in sorted(model.candidates.items(), key=lambda item: item[0]):
        if candidate != model.factorization:
            print("candidate " + formatting.sufficiency_line(is_self_sufficient(model, candidate, level=args.level)))
    print("\n".join(formatting.ranking_table(ranking, args.top)))
    return 0


def experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    """ExperimentConfig from defaults, the settings file and command-line flags"""
    overrides = {
        "runs": args.runs,
        "steps": args.steps,
        "master_seed": args.seed,
        "jobs": args.jobs,
        "sequences": args.sequences,
        "typo_reading": args.typo_reading,
        "alpha_grid": tuple(args.alpha_grid) if args.alpha_grid else None,
        "emit_steps": True if args.emit_steps else None,
    }
    return ExperimentConfig.build(overrides, args.settings)


def cmd_experiment(args: argparse.Namespace) -> int:
    """Run experiments, write their CSV files and print the summary"""
    experiment_settings = experiment_config(args)
    out_dir = args.out or config.output_dir()
    summary = run_experiments(args.names, experiment_settings, out_dir)
    print("\n".join(summary))
    print(f"\nresults written to {os.path.abspath(out_dir)}")
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    """Write a model or CPD as a JSON document"""
    source = load_source(args.source)
    text = serialize_cpd_document(source) if isinstance(source, Cpd) else serialize_model(source)
    if args.out:
        directory = os.path.dirname(args.out)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(args.out, 'w', encoding='utf-8') as f:
            f.write(text + "\n")
        logger.info(f"wrote {args.source} to {args.out}")
    else:
        print(text)
    return 0


def parse_alpha_grid(text: str) -> List[float]:
    """Comma-separated degrees, e.g. "0,0.5,1" """
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid alpha grid {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("alpha grid is empty")
    return values


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


__all__ = [
    "FILTER_MODES",
    "FILTER_TASKS",
    "cmd_analyze",
    "cmd_experiment",
    "cmd_export",
    "cmd_factorize",
    "cmd_filter",
    "experiment_config",
    "parse_alpha_grid",
    "positive_int",
]
