# config.py - Tolerances, generator settings and experiment defaults

import json
import os
from typing import Any, Dict, Optional

# Settings override file (optional, see settings.example.json)
SETTINGS_FILE = "settings.json"


class Tolerances:
    # Categorical / Cpd construction: renormalize within, reject beyond
    NORMALIZATION = 1e-12
    # Model file rows: renormalize within RENORMALIZE, reject beyond REJECT
    FILE_RENORMALIZE = 1e-9
    FILE_REJECT = 1e-6
    # Recombination checks
    LP = 1e-6
    CLOSED_FORM = 1e-9
    # A table counts as fully separable when its mixed differences stay below this
    SEPARABLE = 1e-9
    # Two LP sign patterns tie when their optima differ by less than this
    LP_TIE = 1e-9


class Generation:
    # Accuracy of the noisy observation of Y in the alpha-mixture model
    OBS_ACCURACY_RANGE = (0.6, 0.95)
    # Accuracy of the observation of Z in the six-variable example (1.0 = exact)
    EXAMPLE41_OBS_ACCURACY = 1.0


class Separability:
    MAX_GROUPS = 4             # 2^m sign patterns per LP solve
    ENUMERATION_GUARD = 10     # max state variables for partition search
    WITNESS_GRID = 19          # base-marginal grid points per axis


class ExperimentDefaults:
    RUNS = 1000
    STEPS = 25
    ALPHA_GRID = tuple(round(0.1 * i, 1) for i in range(11))
    MASTER_SEED = 0
    SEQUENCES = 200            # observation sequences per two-chain system
    EXACT_CHECK_STEPS = 6      # exact expectation cross-check horizon (<= 8)
    EXACT_CHECK_SYSTEMS = 5
    JOBS = 1
    TYPO_READING = "as-printed"


class Output:
    DEFAULT_DIR = "results"
    ENV_VAR = "DBNSEP_OUTPUT_DIR"


def output_dir() -> str:
    """Output directory for experiment files (environment overrides the default)"""
    return os.environ.get(Output.ENV_VAR, Output.DEFAULT_DIR)


def load_settings(path: Optional[str] = None) -> Dict[str, Any]:
    """
    Load experiment default overrides from settings.json

    Args:
        path: Explicit settings path (defaults to settings.json in the project root)

    Returns:
        Dictionary of overrides keyed like ExperimentDefaults attributes
        (lower case), empty if the file does not exist

    Raises:
        ValueError: If the file exists but is not a JSON object
    """
    if path is None:
        current_dir = os.path.dirname(os.path.abspath(__file__))
        path = os.path.join(current_dir, SETTINGS_FILE)

    if not os.path.exists(path):
        return {}

    with open(path, 'r') as f:
        try:
            settings = json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"{path} is not valid JSON: {e}")

    if not isinstance(settings, dict):
        raise ValueError(f"{path} must contain a JSON object")

    known = {name.lower() for name in vars(ExperimentDefaults) if name.isupper()}
    unknown = sorted(set(settings) - known)
    if unknown:
        raise ValueError(f"{path}: unknown settings {', '.join(unknown)}")

    return settings
