# tests/test_cli.py - Command-line subcommands and exit codes

import csv
import io
import json
import os

import pytest

from main import EXIT_USAGE, main
from model.model_io import is_cpd_document, load_model, model_to_dict
from model.generators import generate_example41_model


def _rows(text: str):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def chains(models_dir):
    return os.path.join(models_dir, "independent_chains.json")


@pytest.fixture
def chains_obs(models_dir):
    return os.path.join(models_dir, "independent_chains_obs.csv")


class TestAnalyze:

    def test_builtin_table(self, capsys):
        assert main(["analyze", "builtin:example33"]) == 0
        out = capsys.readouterr().out
        assert "alpha = 0.910000" in out
        assert "method case1" in out

    def test_table_document_as_csv(self, capsys, models_dir):
        path = os.path.join(models_dir, "example33_table.json")
        assert main(["analyze", path, "--grouping", "X-|Y-", "--method", "lp", "--format", "csv"]) == 0
        (row,) = _rows(capsys.readouterr().out)
        assert row["method"] == "lp"
        assert float(row["alpha"]) == pytest.approx(0.91, abs=1e-6)

    def test_closed_form_with_verification(self, capsys, models_dir):
        path = os.path.join(models_dir, "example41_x_table.json")
        assert main(["analyze", path, "--grouping", "W-|X-,Y-,Z-", "--verify"]) == 0
        out = capsys.readouterr().out
        assert "alpha = 0.600000" in out
        assert "C* = 0.000000, C_* = 0.800000" in out
        assert "verify: LP alpha = 0.600000" in out

    def test_pairwise_grouping(self, capsys, models_dir):
        path = os.path.join(models_dir, "example41_x_table.json")
        assert main(["analyze", path, "--grouping", "X-,W-|Y-,Z-"]) == 0
        assert "alpha = 1.000000" in capsys.readouterr().out

    def test_model_child_grouped_by_factors(self, capsys):
        assert main(["analyze", "builtin:example41", "--child", "X"]) == 0
        out = capsys.readouterr().out
        assert "grouping W-|X-,Y-,Z-" in out
        assert "alpha = 0.600000" in out

    def test_child_inside_one_factor(self, capsys):
        assert main(["analyze", "builtin:example41", "--child", "U"]) == 0
        assert "alpha = 1.000000" in capsys.readouterr().out

    def test_invalid_grouping(self, capsys):
        assert main(["analyze", "builtin:example33", "--grouping", "X-|Q-"]) == EXIT_USAGE
        assert capsys.readouterr().err.startswith("error:")

    def test_child_of_a_single_table(self, capsys):
        assert main(["analyze", "builtin:example33", "--child", "X"]) == EXIT_USAGE

    def test_missing_file(self, capsys, tmp_path):
        assert main(["analyze", str(tmp_path / "absent.json")]) == EXIT_USAGE

    def test_unknown_builtin(self, capsys):
        assert main(["analyze", "builtin:figure2"]) == EXIT_USAGE


class TestFilter:

    def test_observation_file(self, capsys, chains, chains_obs):
        assert main(["filter", chains, "--obs", chains_obs]) == 0
        rows = _rows(capsys.readouterr().out)
        assert len(rows) == 5
        assert [r["obs:Oy"] for r in rows] == ["1", "1", "1", "0", "0"]
        for row in rows:
            for name in ("X", "Y"):
                assert float(row[f"exact:P({name}=1)"]) == pytest.approx(float(row[f"bk:P({name}=1)"]), abs=1e-12)
            assert float(row["kl[X]"]) < 1e-12

    def test_sampling_is_reproducible(self, capsys):
        args = ["filter", "builtin:figure1:0.3:4", "--sample", "8", "--seed", "5", "--mode", "exact"]
        assert main(args) == 0
        first = capsys.readouterr().out
        assert main(args) == 0
        assert capsys.readouterr().out == first
        assert len(_rows(first)) == 8

    def test_prediction_has_no_observation_columns(self, capsys):
        assert main(["filter", "builtin:figure1:1:2", "--sample", "4", "--task", "predict", "--mode", "bk"]) == 0
        header = capsys.readouterr().out.splitlines()[0].split(",")
        assert header[0] == "step"
        assert not any(h.startswith("obs:") for h in header)
        assert all(h.startswith("bk:") for h in header[1:])

    def test_separable_prediction_has_no_error(self, capsys):
        assert main(["filter", "builtin:figure1:1:2", "--sample", "12", "--task", "predict"]) == 0
        rows = _rows(capsys.readouterr().out)
        error_columns = [c for c in rows[0] if c.startswith(("kl[", "abs[", "delta["))]
        assert "kl[X]" in error_columns
        for row in rows:
            for column in error_columns:
                assert float(row[column]) < 1e-9, column

    def test_factorization_override(self, capsys):
        args = ["filter", "builtin:example41", "--sample", "3", "--factorization", "U,V|W,X|Y,Z"]
        assert main(args) == 0
        assert "kl[UV]" in capsys.readouterr().out.splitlines()[0]

    def test_bad_factorization(self, capsys):
        assert main(["filter", "builtin:example41", "--sample", "3", "--factorization", "U,V|W,X"]) == EXIT_USAGE

    def test_table_is_not_a_model(self, capsys):
        assert main(["filter", "builtin:example33", "--sample", "3"]) == EXIT_USAGE

    def test_header_mismatch(self, capsys, chains, tmp_path):
        path = tmp_path / "obs.csv"
        path.write_text("Ox,Oz\n0,1\n")
        assert main(["filter", chains, "--obs", str(path)]) == EXIT_USAGE

    def test_missing_observation_file(self, capsys, chains, tmp_path):
        assert main(["filter", chains, "--obs", str(tmp_path / "absent.csv")]) == EXIT_USAGE


class TestFactorize:

    def test_ranking_csv(self, capsys):
        assert main(["factorize", "builtin:example41", "--format", "csv"]) == 0
        rows = _rows(capsys.readouterr().out)
        assert rows[0]["rank"] == "1"
        assert rows[0]["factorization"] == "{UV,WX,YZ}"
        assert float(rows[0]["min_degree"]) == pytest.approx(1.0, abs=1e-6)

    def test_text_report(self, capsys):
        assert main(["factorize", "builtin:example41", "--top", "3"]) == 0
        out = capsys.readouterr().out
        assert "model factorization {UVW,XYZ}" in out
        assert "not self-sufficient" in out
        assert "candidate {UV,WX,YZ}" in out
        assert "more" in out


class TestExport:

    def test_model_to_file(self, capsys, tmp_path):
        path = str(tmp_path / "exported" / "example41.json")
        assert main(["export", "builtin:example41:{UV,WX,YZ}", "--out", path]) == 0
        assert model_to_dict(load_model(path)) == model_to_dict(generate_example41_model("{UV,WX,YZ}"))

    def test_table_to_stdout(self, capsys):
        assert main(["export", "builtin:example33"]) == 0
        out = capsys.readouterr().out
        assert is_cpd_document(out)
        assert json.loads(out)["child"] == "X"


class TestExperiment:

    def test_writes_results(self, capsys, tmp_path):
        out = str(tmp_path / "results")
        args = ["experiment", "fig1", "--runs", "1", "--steps", "3", "--alpha-grid", "0,1",
                "--settings", str(tmp_path / "absent.json"), "--out", out]
        assert main(args) == 0
        assert "fig1" in capsys.readouterr().out
        assert os.path.exists(os.path.join(out, "fig1.csv"))

    def test_invalid_alpha_grid(self, capsys, tmp_path):
        args = ["experiment", "fig1", "--alpha-grid", "0,2", "--settings", str(tmp_path / "absent.json"),
                "--out", str(tmp_path)]
        assert main(args) == EXIT_USAGE

    def test_unknown_experiment(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["experiment", "fig2"])
        assert info.value.code == 2
