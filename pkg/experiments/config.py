# experiments/config.py - Immutable experiment settings built from defaults, settings.json and flags

from dataclasses import dataclass, fields, replace
from typing import Any, Dict, Optional, Tuple

from config import ExperimentDefaults, Generation, load_settings
from analysis.bounds import TYPO_READINGS
from model.generators import GeneratorConfig
from probability.errors import ConfigurationError


@dataclass(frozen=True)
class ExperimentConfig:
    runs: int = ExperimentDefaults.RUNS
    steps: int = ExperimentDefaults.STEPS
    alpha_grid: Tuple[float, ...] = ExperimentDefaults.ALPHA_GRID
    master_seed: int = ExperimentDefaults.MASTER_SEED
    sequences: int = ExperimentDefaults.SEQUENCES
    exact_check_steps: int = ExperimentDefaults.EXACT_CHECK_STEPS
    exact_check_systems: int = ExperimentDefaults.EXACT_CHECK_SYSTEMS
    jobs: int = ExperimentDefaults.JOBS
    typo_reading: str = ExperimentDefaults.TYPO_READING
    obs_accuracy_range: Tuple[float, float] = Generation.OBS_ACCURACY_RANGE
    emit_steps: bool = False

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigurationError(f"runs must be at least 1, got {self.runs}")
        if self.steps < 1:
            raise ConfigurationError(f"steps must be at least 1, got {self.steps}")
        if self.sequences < 1:
            raise ConfigurationError(f"sequences must be at least 1, got {self.sequences}")
        if self.jobs < 1:
            raise ConfigurationError(f"jobs must be at least 1, got {self.jobs}")
        if not self.alpha_grid:
            raise ConfigurationError("alpha grid is empty")
        bad = [a for a in self.alpha_grid if not 0.0 <= a <= 1.0]
        if bad:
            raise ConfigurationError(f"alpha grid values must lie in [0, 1], got {bad}")
        if not 1 <= self.exact_check_steps <= 8:
            raise ConfigurationError(f"exact check steps must lie in 1..8, got {self.exact_check_steps}")
        if self.typo_reading not in TYPO_READINGS:
            raise ConfigurationError(
                f"typo reading must be one of {', '.join(TYPO_READINGS)}, got {self.typo_reading!r}"
            )
        lo, hi = self.obs_accuracy_range
        if not 0.0 <= lo <= hi <= 1.0:
            raise ConfigurationError(f"observation accuracy range {self.obs_accuracy_range} must lie in [0, 1]")

    @classmethod
    def build(cls, overrides: Optional[Dict[str, Any]] = None,
              settings_path: Optional[str] = None) -> 'ExperimentConfig':
        """
        Defaults, then settings.json, then explicit overrides (None values are skipped)

        Raises:
            ConfigurationError: For unknown keys, a malformed settings file or invalid values
        """
        try:
            settings = load_settings(settings_path)
        except ValueError as e:
            raise ConfigurationError(str(e))
        values: Dict[str, Any] = {}
        names = {f.name for f in fields(cls)}
        for source in (settings, overrides or {}):
            for key, value in source.items():
                if value is None:
                    continue
                if key not in names:
                    raise ConfigurationError(f"Unknown experiment setting {key!r}")
                values[key] = value
        if "alpha_grid" in values:
            values["alpha_grid"] = tuple(float(a) for a in values["alpha_grid"])
        if "obs_accuracy_range" in values:
            values["obs_accuracy_range"] = tuple(float(a) for a in values["obs_accuracy_range"])
        return cls(**values)

    def describe(self) -> str:
        return f"{self.runs} runs, {self.steps} steps, seed {self.master_seed}"

    def with_overrides(self, **changes) -> 'ExperimentConfig':
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def generator_config(self) -> GeneratorConfig:
        return GeneratorConfig(obs_accuracy_range=self.obs_accuracy_range)
