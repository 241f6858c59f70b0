# tests/test_model.py - Factorizations, DBN validation, model documents and generators

import json
import os

import numpy as np
import pytest

from main import EXIT_USAGE, main
from model.dbn import DbnModel, Factorization, factor_parent_groups, factor_transition_cpd
from model.generators import (
    EXAMPLE41_FACTORIZATIONS,
    GeneratorConfig,
    binary,
    binary_cpd,
    generate_example41_model,
    generate_figure1_model,
)
from model.model_io import (
    load_model,
    model_to_dict,
    parse_cpd_document,
    parse_model,
    serialize_cpd_document,
    serialize_model,
)
from model.two_chain import generate_two_chain_system, two_chain_system
from probability.errors import ModelSyntaxError, ModelValidationError, ScopeError
from probability.tables import Categorical


def _chain_doc(**changes):
    doc = {
        "variables": [{"name": "X", "card": 2}, {"name": "Y", "card": 2}],
        "factorization": [["X"], ["Y"]],
        "transition": [
            {"child": "X", "parents": ["X", "Y"], "table": [[0.9, 0.1], [0.5, 0.5], [0.4, 0.6], [0.2, 0.8]]},
            {"child": "Y", "parents": ["Y"], "table": [[0.7, 0.3], [0.1, 0.9]]},
        ],
        "observations": [{"name": "Z", "card": 2, "parents": ["Y"], "table": [[0.8, 0.2], [0.2, 0.8]]}],
    }
    doc.update(changes)
    return doc


class TestFactorization:

    def test_parse_and_label(self):
        f = Factorization.parse("U,V|W,X|Y,Z")
        assert f.factors == (("U", "V"), ("W", "X"), ("Y", "Z"))
        assert f.label == "{UV,WX,YZ}"

    def test_long_names_joined_with_dots(self):
        assert Factorization([["Alpha", "B"], ["C"]]).label == "{Alpha.B,C}"

    def test_factor_of_previous_slice(self):
        f = Factorization.parse("X|Y")
        assert f.factor_of("Y-") == 1
        with pytest.raises(ScopeError):
            f.factor_of("Q")

    def test_overlap_rejected(self):
        with pytest.raises(ModelValidationError):
            Factorization([["X", "Y"], ["Y"]])

    def test_empty_group_rejected(self):
        with pytest.raises(ModelValidationError):
            Factorization.parse("X||Y")

    def test_validate_partition(self):
        with pytest.raises(ModelValidationError):
            Factorization.parse("X").validate(("X", "Y"))
        with pytest.raises(ModelValidationError):
            Factorization.parse("X|Q").validate(("X",))


class TestModelDocument:

    def test_parse(self):
        model = parse_model(json.dumps(_chain_doc()))
        assert model.state_names == ("X", "Y")
        assert model.factorization.label == "{X,Y}"
        # no prior given: uniform per factor
        np.testing.assert_allclose(model.prior_joint().values, 0.25)

    def test_transition_matrix_rows(self):
        model = parse_model(json.dumps(_chain_doc()))
        np.testing.assert_allclose(model.transition_matrix.sum(axis=1), 1.0)
        # from (X-=F, Y-=F): P(X=F) 0.9, P(Y=F) 0.7
        np.testing.assert_allclose(model.transition_matrix[0], [0.63, 0.27, 0.07, 0.03])

    def test_syntax_error_position(self):
        with pytest.raises(ModelSyntaxError) as info:
            parse_model('{\n  "variables": [,]\n}')
        assert info.value.line == 2

    def test_unknown_variable(self):
        doc = _chain_doc()
        doc["transition"][1]["parents"] = ["Q"]
        with pytest.raises(ModelValidationError, match="Q"):
            parse_model(json.dumps(doc))

    def test_row_sum_rejected(self):
        doc = _chain_doc()
        doc["transition"][1]["table"] = [[0.7, 0.4], [0.1, 0.9]]
        with pytest.raises(ModelValidationError, match="row 0"):
            parse_model(json.dumps(doc))

    def test_small_row_drift_renormalized(self):
        doc = _chain_doc()
        doc["transition"][1]["table"] = [[0.7, 0.3 + 5e-8], [0.1, 0.9]]
        model = parse_model(json.dumps(doc))
        np.testing.assert_allclose(model.transition_cpd("Y").table.sum(axis=1), 1.0, atol=1e-15)

    def test_factorization_must_partition(self):
        with pytest.raises(ModelValidationError):
            parse_model(json.dumps(_chain_doc(factorization=[["X"]])))

    @pytest.mark.parametrize("candidates", [
        [1, 2],
        {"pairs": 3},
        {"pairs": [["X"], "Y"]},
        {"pairs": [["X"], ["Q"]]},
        {"pairs": [["X"]]},
        {"pairs": [["X", "Y"], ["Y"]]},
    ])
    def test_bad_candidates(self, candidates):
        with pytest.raises(ModelValidationError):
            parse_model(json.dumps(_chain_doc(candidates=candidates)))

    def test_candidates(self):
        model = parse_model(json.dumps(_chain_doc(candidates={"joint": [["X", "Y"]]})))
        assert model.candidates == {"joint": Factorization([["X", "Y"]])}

    def test_bad_candidates_exit_status(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text(json.dumps(_chain_doc(candidates=[1, 2])))
        assert main(["factorize", str(path)]) == EXIT_USAGE

    def test_missing_transition(self):
        doc = _chain_doc()
        doc["transition"] = doc["transition"][:1]
        with pytest.raises(ModelValidationError, match="No transition CPD for Y"):
            parse_model(json.dumps(doc))

    def test_serialize_round_trip(self):
        model = generate_example41_model("{UV,WX,YZ}")
        again = parse_model(serialize_model(model))
        assert model_to_dict(again) == model_to_dict(model)
        assert again.candidates == model.candidates
        np.testing.assert_array_equal(again.transition_matrix, model.transition_matrix)

    def test_cpd_document(self, example33):
        cpd = parse_cpd_document(serialize_cpd_document(example33))
        assert cpd.parent_names == ("X-", "Y-")
        assert cpd.allclose(example33, atol=0.0)

    def test_shipped_files(self, models_dir):
        model = load_model(os.path.join(models_dir, "independent_chains.json"))
        assert model.factorization.label == "{X,Y}"
        np.testing.assert_allclose(model.prior_joint().values, [0.15, 0.35, 0.15, 0.35])
        with open(os.path.join(models_dir, "example33_table.json")) as f:
            cpd = parse_cpd_document(f.read())
        np.testing.assert_allclose(cpd.table[:, 1], [0.1, 0.01, 0.9, 0.99])


class TestDbnModel:

    def test_observation_clash(self):
        x, y = binary("X"), binary("Y")
        transition = [binary_cpd(x, (x.previous(),), [0.1, 0.9]), binary_cpd(y, (y.previous(),), [0.1, 0.9])]
        with pytest.raises(ModelValidationError, match="clashes"):
            DbnModel((x, y), transition, [(y, binary_cpd(y, (x,), [0.2, 0.8]))],
                     (Categorical.uniform([x]), Categorical.uniform([y])), Factorization([["X"], ["Y"]]))

    def test_transition_parent_must_be_previous(self):
        x, y = binary("X"), binary("Y")
        with pytest.raises(ModelValidationError, match="previous-slice"):
            DbnModel((x, y), [binary_cpd(x, (y,), [0.1, 0.9]), binary_cpd(y, (y.previous(),), [0.1, 0.9])],
                     [], (Categorical.uniform([x]), Categorical.uniform([y])), Factorization([["X"], ["Y"]]))

    def test_with_factorization(self, example41_model):
        other = example41_model.with_factorization(EXAMPLE41_FACTORIZATIONS["{UV,WX,YZ}"])
        assert other.factorization.label == "{UV,WX,YZ}"
        np.testing.assert_allclose(other.prior_joint().values, example41_model.prior_joint().values)

    def test_factor_parent_groups(self, example41_model):
        f = EXAMPLE41_FACTORIZATIONS["{UV,WX,YZ}"]
        # W reads U-, V-, W-, X-; X reads W-, X-, Y-, Z-
        assert factor_parent_groups(example41_model, f, 1) == [("U-", "V-"), ("W-", "X-"), ("Y-", "Z-")]
        assert factor_parent_groups(example41_model, f, 0) == [("U-", "V-"), ("W-", "X-")]

    def test_factor_transition_cpd_rows(self, example41_model):
        f = EXAMPLE41_FACTORIZATIONS["{UVW,XYZ}"]
        cpd = factor_transition_cpd(example41_model, f, 0)
        assert cpd.child_names == ("U", "V", "W")
        assert cpd.parent_names == ("U-", "V-", "W-", "X-", "Y-", "Z-")
        np.testing.assert_allclose(cpd.table.sum(axis=1), 1.0)


class TestGenerators:

    def test_figure1_reproducible(self):
        a = generate_figure1_model(0.4, seed=11)
        b = generate_figure1_model(0.4, seed=11)
        np.testing.assert_array_equal(a.transition_matrix, b.transition_matrix)
        np.testing.assert_array_equal(a.observation_likelihoods[0], b.observation_likelihoods[0])

    def test_figure1_alpha_range(self):
        with pytest.raises(ModelValidationError):
            generate_figure1_model(1.5, seed=0)

    def test_figure1_observation_accuracy(self):
        config = GeneratorConfig(obs_accuracy_range=(0.75, 0.75))
        model = generate_figure1_model(0.5, seed=2, config=config)
        _, sensor = model.observations[0]
        np.testing.assert_allclose(sensor.table, [[0.75, 0.25], [0.25, 0.75]])

    def test_example41_structure(self, example41_model):
        assert example41_model.state_names == ("U", "V", "W", "X", "Y", "Z")
        assert set(example41_model.candidates) == set(EXAMPLE41_FACTORIZATIONS)
        assert [var.name for var, _ in example41_model.observations] == ["Zobs"]

    def test_example41_unknown_factorization(self):
        with pytest.raises(ModelValidationError):
            generate_example41_model("{UVWXYZ}")


class TestTwoChain:

    def test_mixture_rows(self):
        system = two_chain_system(0.25, 0.5, [0.2, 0.6], [0.4, 0.8], [0.1, 0.3], [0.5, 0.9], [0.1, 0.9])
        px = system.transition_x()
        # P(X=T | X-=T, Y-=F) = 0.25 * 0.6 + 0.75 * 0.4
        assert px.table[2, 1] == pytest.approx(0.45)
        model = system.to_model()
        assert model.factorization.label == "{X,Y}"
        assert [var.name for var, _ in model.observations] == ["Z"]

    def test_generated_system_reproducible(self):
        first, model = generate_two_chain_system(5)
        second, _ = generate_two_chain_system(5)
        assert first.gamma_X == second.gamma_X
        np.testing.assert_array_equal(first.P_Z.table, second.P_Z.table)
        lo, hi = GeneratorConfig().gamma_range
        assert lo <= first.gamma_X <= hi
        np.testing.assert_allclose(model.transition_matrix.sum(axis=1), 1.0)
