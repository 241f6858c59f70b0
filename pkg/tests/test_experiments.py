# tests/test_experiments.py - Experiment settings, seeding, result files and small experiment runs

import json
import os

import numpy as np
import pytest

from analysis.bounds import TYPO_READINGS
from experiments import COMBINED_FILE, SUMMARY_FILE, resolve_names, run_experiments
from experiments import ex41, fig1, fig4, thm61
from experiments.config import ExperimentConfig
from experiments.results import (
    AGGREGATE,
    NO_ALPHA,
    ResultRow,
    aggregate,
    aggregate_table,
    finalize,
    read_csv,
    run_rows,
    step_rows,
    trend,
    write_csv,
)
from experiments.runner import derive_seed, grid_tasks
from probability.errors import ConfigurationError


def _small(**changes) -> ExperimentConfig:
    values = dict(runs=2, steps=5, alpha_grid=(0.0, 1.0), sequences=40,
                  exact_check_steps=3, exact_check_systems=1)
    values.update(changes)
    return ExperimentConfig(**values)


class TestExperimentConfig:

    def test_defaults(self):
        config = ExperimentConfig()
        assert config.runs == 1000
        assert config.steps == 25
        assert config.alpha_grid[0] == 0.0 and config.alpha_grid[-1] == 1.0
        assert len(config.alpha_grid) == 11

    @pytest.mark.parametrize("changes", [
        {"runs": 0},
        {"steps": 0},
        {"jobs": 0},
        {"alpha_grid": ()},
        {"alpha_grid": (0.5, 1.5)},
        {"exact_check_steps": 9},
        {"typo_reading": "transposed"},
        {"obs_accuracy_range": (0.9, 0.6)},
    ])
    def test_invalid(self, changes):
        with pytest.raises(ConfigurationError):
            ExperimentConfig(**changes)

    def test_settings_then_overrides(self, tmp_path):
        path = tmp_path / "settings.json"
        path.write_text(json.dumps({"runs": 7, "steps": 9, "alpha_grid": [0, 0.5]}))
        config = ExperimentConfig.build({"steps": 3, "runs": None}, str(path))
        assert config.runs == 7
        assert config.steps == 3
        assert config.alpha_grid == (0.0, 0.5)

    def test_missing_settings_file(self, tmp_path):
        config = ExperimentConfig.build({"runs": 4}, str(tmp_path / "absent.json"))
        assert config.runs == 4

    def test_unknown_setting(self, tmp_path):
        path = tmp_path / "settings.json"
        path.write_text(json.dumps({"runz": 7}))
        with pytest.raises(ConfigurationError):
            ExperimentConfig.build(None, str(path))

    def test_malformed_settings(self, tmp_path):
        path = tmp_path / "settings.json"
        path.write_text("{runs: 7")
        with pytest.raises(ConfigurationError):
            ExperimentConfig.build(None, str(path))

    def test_generator_config(self):
        config = _small(obs_accuracy_range=(0.7, 0.7))
        assert config.generator_config().obs_accuracy_range == (0.7, 0.7)


class TestSeeding:

    def test_seed_is_pure(self):
        assert derive_seed(0, "fig1", 2, 5) == derive_seed(0, "fig1", 2, 5)

    def test_streams_differ(self):
        seeds = {
            derive_seed(0, "fig1", 0, 0),
            derive_seed(0, "fig1", 0, 0, stream=1),
            derive_seed(0, "fig1", 0, 1),
            derive_seed(0, "fig1", 1, 0),
            derive_seed(0, "fig4", 0, 0),
            derive_seed(1, "fig1", 0, 0),
        }
        assert len(seeds) == 6

    def test_grid_is_alpha_major(self):
        tasks = grid_tasks("fig1", [0.0, 0.5], 3, master_seed=0)
        assert [(t.alpha_index, t.run) for t in tasks] == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]


class TestResults:

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            ResultRow("fig1", 0.0, 0, AGGREGATE, "kl", float("nan"))

    def test_aggregate_means(self):
        rows = run_rows("fig1", 0.5, 0, {"kl": 1.0}, {"kl": 2}) + run_rows("fig1", 0.5, 1, {"kl": 3.0}, {"kl": 1})
        (mean,) = aggregate(rows)
        assert mean.is_aggregate
        assert mean.value == 2.0
        assert mean.incidents == 3

    def test_steps_are_not_aggregated(self):
        rows = step_rows("fig1", 0.0, 0, {"kl": np.array([1.0, 2.0])})
        assert [r.step for r in rows] == [1, 2]
        assert aggregate(rows) == []

    def test_finalize_order(self):
        rows = run_rows("fig1", 1.0, 1, {"b": 1.0, "a": 2.0}) + run_rows("fig1", 0.0, 0, {"a": 0.5})
        ordered = finalize(rows)
        keys = [r.sort_key() for r in ordered]
        assert keys == sorted(keys)
        assert ordered[0].alpha == 0.0 and ordered[0].run == AGGREGATE

    def test_csv_round_trip(self, tmp_path):
        rows = finalize(run_rows("thm61", NO_ALPHA, 0, {"actual_delta_x": 0.1 + 0.2}))
        path = str(tmp_path / "out" / "thm61.csv")
        write_csv(rows, path)
        assert read_csv(path) == rows

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n")
        with pytest.raises(ValueError):
            read_csv(str(path))

    def test_trend(self):
        assert trend({0.0: 3.0, 0.5: 2.0, 1.0: 1.0}) == pytest.approx(1.0)
        assert trend({0.0: 1.0, 1.0: 2.0}) is None
        assert trend({0.0: 1.0, 0.5: 1.0, 1.0: 1.0}) is None


class TestFigure1:

    def test_separable_prediction_is_exact(self):
        rows = fig1.run(_small())
        prediction = aggregate_table(rows, "prediction_kl")
        assert set(prediction) == {0.0, 1.0}
        assert prediction[1.0] < 1e-9
        assert prediction[0.0] > 0.0

    def test_threads_do_not_change_results(self):
        assert fig1.run(_small(jobs=3)) == fig1.run(_small(jobs=1))

    def test_emit_steps(self):
        rows = fig1.run(_small(emit_steps=True))
        per_step = [r for r in rows if r.step != AGGREGATE]
        assert len(per_step) == 2 * 2 * len(fig1.METRICS) * 5

    def test_summary(self):
        lines = fig1.summarize(fig1.run(_small(alpha_grid=(0.0, 0.5, 1.0))))
        assert lines[0].startswith("fig1")
        assert any("Spearman" in line for line in lines)


class TestFigure4:

    def test_separable_dynamics_have_no_type_a_error(self):
        rows = fig4.run(_small())
        assert aggregate_table(rows, "type_a")[1.0] < 1e-9
        assert aggregate_table(rows, "total")[0.0] > 0.0
        assert any("clamped" in line for line in fig4.summarize(rows))

    @pytest.mark.slow
    def test_acceptance_scale_decomposition(self):
        rows = fig4.run(ExperimentConfig(jobs=4))
        total, type_a, type_b = (aggregate_table(rows, name) for name in fig4.METRICS)
        assert type_a[1.0] < 1e-9
        for alpha in (a for a in total if a <= 0.5):
            assert type_b[alpha] < 0.2 * total[alpha], alpha
        ratios = [type_a[a] / total[a] for a in total if total[a] > 0.0]
        assert 0.7 <= sum(ratios) / len(ratios) <= 1.1
        assert trend(total) > 0.5


class TestSixVariableChain:

    def test_metrics_per_factorization(self):
        rows = ex41.run(_small(runs=1, steps=6))
        metrics = {r.metric for r in rows if r.is_aggregate}
        for tag in ("UVW|XYZ", "UV|WX|YZ"):
            assert {f"abs_error[{tag}]", f"kl[{tag}]", f"abs_error_final[{tag}]", f"kl_final[{tag}]"} <= metrics
        assert all(r.alpha == NO_ALPHA for r in rows)
        assert all(r.value >= 0.0 for r in rows)

    def test_summary_names_both_factorizations(self):
        lines = ex41.summarize(ex41.run(_small(runs=1, steps=6)))
        text = "\n".join(lines)
        assert "{UVW,XYZ}" in text and "{UV,WX,YZ}" in text
        assert "self-sufficient" in text

    def test_summary_uses_the_run_config(self, monkeypatch):
        config = _small(runs=1, steps=6, obs_accuracy_range=(0.7, 0.7))
        built = []
        original = ex41.build_model
        monkeypatch.setattr(ex41, "build_model", lambda c: built.append(c) or original(c))
        lines = ex41.summarize(ex41.run(config), config)
        assert built and all(c is config for c in built)
        assert config.describe() in lines[0]

    @pytest.mark.slow
    def test_acceptance_scale_ordering(self):
        rows = ex41.run(ExperimentConfig(jobs=4))

        def mean(metric: str) -> float:
            return aggregate_table(rows, metric)[NO_ALPHA]

        for metric, reference in (("abs_error", {"UVW|XYZ": 0.038, "UV|WX|YZ": 0.018}),
                                  ("kl", {"UVW|XYZ": 0.007, "UV|WX|YZ": 0.002})):
            assert mean(f"{metric}[UV|WX|YZ]") < mean(f"{metric}[UVW|XYZ]"), metric
            for tag, value in reference.items():
                assert value / 3.0 <= mean(f"{metric}[{tag}]") <= value * 3.0, (metric, tag)


class TestBoundExperiment:

    def test_rows(self):
        rows = thm61.run(_small(steps=4))
        runs = [r for r in rows if r.is_run_summary]
        assert {r.metric for r in runs} >= {"actual_delta_x", "applicable[as-printed]", "applicable[symmetric]"}
        checks = [r for r in runs if r.metric == "exact_check_z"]
        assert [r.run for r in checks] == [0]
        assert checks[0].value >= 0.0

    def test_summary(self):
        lines = thm61.summarize(thm61.run(_small(steps=4)))
        assert any("reading as-printed" in line for line in lines)
        assert any("exact enumeration" in line for line in lines)

    @pytest.mark.slow
    def test_acceptance_scale_dominance(self):
        rows = thm61.run(ExperimentConfig(jobs=4))

        def mean(metric: str) -> float:
            return aggregate_table(rows, metric)[NO_ALPHA]

        assert max(mean(f"dominated[{reading}]") for reading in TYPO_READINGS) >= 0.99
        assert 2.40e-5 <= mean("actual_delta_x") <= 2.40e-3
        for reading in TYPO_READINGS:
            bound = mean(f"bound_j[{reading}]")
            assert bound >= mean(f"actual_delta_x[{reading}]"), reading
            assert 6.62e-5 <= bound <= 6.62e-3, reading
        checks = [r.value for r in rows if r.is_run_summary and r.metric == "exact_check_z"]
        assert all(z <= 3.0 for z in checks)


class TestRunExperiments:

    def test_resolve_names(self):
        assert resolve_names(["all"]) == ["fig1", "fig4", "ex41", "thm61"]
        assert resolve_names(["fig4", "fig4"]) == ["fig4"]
        with pytest.raises(ConfigurationError):
            resolve_names(["fig2"])

    def test_writes_files(self, tmp_path):
        out = str(tmp_path / "results")
        summary = run_experiments(["fig1"], _small(runs=1), out)
        for name in ("fig1.csv", COMBINED_FILE, SUMMARY_FILE):
            assert os.path.exists(os.path.join(out, name))
        assert read_csv(os.path.join(out, "fig1.csv")) == read_csv(os.path.join(out, COMBINED_FILE))
        with open(os.path.join(out, SUMMARY_FILE)) as f:
            assert f.read().splitlines() == summary
        assert "1 runs, 5 steps" in summary[0]

    @pytest.mark.slow
    def test_acceptance_scale_figure1(self):
        rows = fig1.run(ExperimentConfig(runs=200, jobs=4))
        monitoring = aggregate_table(rows, "monitoring_kl")
        assert trend(monitoring) > 0.5
        assert monitoring[1.0] < monitoring[0.0]
