# tests/test_separability.py - Degree of separability, persistence, sufficiency, factorization search

import numpy as np
import pytest

from model.dbn import DbnModel, Factorization
from model.generators import (
    EXAMPLE41_FACTORIZATIONS,
    binary,
    binary_cpd,
    generate_figure1_model,
    mixture_cpd,
    xor_pattern,
)
from probability.errors import EnumerationGuardError, ScopeError, SolverError, UnsupportedArityError
from probability.ops import apply_cpd, marginalize
from probability.tables import Categorical, Cpd, VariableSpec, scope_shape
from separability.closed_form import degree_case1, degree_case2, degree_case3, parent_grid
from separability.factorization import is_self_sufficient, search_factorization, set_partitions
from separability.lp import degree_lp, sign_patterns
from separability.methods import analyze_cpd, choose_method, degree
from separability.persistence import persistence
from separability.sufficiency import max_mixed_difference, sufficiency_witness
from separability.types import Grouping, SeparableDecomposition

X_SPLIT = Grouping.parse("X-|Y-")


def _three_valued_cpd() -> Cpd:
    """Ternary child over binary X-, Y- with mixed differences (0.4, -0.4, 0)"""
    x, y, c = binary("X"), binary("Y"), VariableSpec("C", 3)
    return Cpd((c,), (x.previous(), y.previous()), [
        [0.5, 0.3, 0.2],
        [0.3, 0.3, 0.4],
        [0.2, 0.5, 0.3],
        [0.4, 0.1, 0.5],
    ])


def _chains(n: int) -> DbnModel:
    variables = [binary(f"S{i}") for i in range(n)]
    transition = [binary_cpd(v, (v.previous(),), [0.2, 0.7]) for v in variables]
    prior = tuple(Categorical.uniform([v]) for v in variables)
    return DbnModel(variables, transition, [], prior, Factorization([[v.name] for v in variables]))


def _random_table(shape: str, rng: np.random.Generator):
    """Random table whose shape matches the named closed form, with its two-group split"""
    x, y = binary("X"), binary("Y")
    parents = (x.previous(), y.previous())
    if shape == "case1":
        return binary_cpd(x, parents, rng.uniform(size=4)), X_SPLIT
    if shape == "case2":
        return Cpd((VariableSpec("C", 3),), parents, rng.dirichlet(np.ones(3), size=4)), X_SPLIT
    parents = tuple(binary(n).previous() for n in "WABD")
    return binary_cpd(x, parents, rng.uniform(size=16)), Grouping.parse("W-|A-,B-,D-")


def _additive_table(rng: np.random.Generator) -> Cpd:
    x, y = binary("X"), binary("Y")
    g, a, b = rng.uniform(), rng.uniform(size=2), rng.uniform(size=2)
    return binary_cpd(x, (x.previous(), y.previous()), [g * a[i] + (1 - g) * b[j] for i in range(2) for j in range(2)])


class TestGrouping:

    def test_parse(self):
        g = Grouping.parse("X-, W- | Y-,Z-")
        assert g.groups == (("X-", "W-"), ("Y-", "Z-"))
        assert g.label == "X-,W-|Y-,Z-"

    def test_empty_group(self):
        with pytest.raises(ScopeError):
            Grouping.parse("X-||Y-")

    def test_must_cover_parents(self, example33):
        with pytest.raises(ScopeError, match="misses"):
            Grouping.parse("X-").scopes(example33)

    def test_overlap(self, example33):
        with pytest.raises(ScopeError):
            Grouping.parse("X-|X-,Y-").scopes(example33)

    def test_too_many_groups(self):
        child = binary("A")
        parents = tuple(binary(n).previous() for n in "ABCDE")
        cpd = binary_cpd(child, parents, np.full(32, 0.5))
        with pytest.raises(UnsupportedArityError):
            degree_lp(cpd, Grouping([[p.name] for p in parents]))

    def test_halves(self, example41_x):
        assert Grouping.halves(example41_x).groups == (("X-",), ("Y-", "Z-", "W-"))


class TestClosedForms:

    def test_binary_table(self, example33):
        decomposition, trace = degree_case1(example33, X_SPLIT)
        assert decomposition.alpha == pytest.approx(0.91, abs=1e-12)
        assert abs(trace.deviations[0]) == pytest.approx(0.18)
        assert decomposition.reconstruction_error(example33) < 1e-9

    def test_ternary_child(self):
        cpd = _three_valued_cpd()
        decomposition, trace = degree_case2(cpd, X_SPLIT)
        np.testing.assert_allclose(trace.deviations, [0.4, -0.4, 0.0], atol=1e-12)
        assert trace.G == pytest.approx(0.4)
        assert decomposition.alpha == pytest.approx(0.8)
        assert decomposition.reconstruction_error(cpd) < 1e-9

    def test_case1_rejects_ternary_child(self):
        with pytest.raises(ScopeError):
            degree_case1(_three_valued_cpd(), X_SPLIT)

    def test_binary_group_against_eight_values(self, example41_x):
        decomposition, trace = degree_case3(example41_x, Grouping.parse("W-|X-,Y-,Z-"))
        assert decomposition.alpha == pytest.approx(0.6)
        assert trace.C_star == pytest.approx(0.0, abs=1e-12)
        assert trace.C_substar == pytest.approx(0.8)
        np.testing.assert_allclose(trace.B_values, [-1.0] * 4 + [1.0] * 4, atol=1e-9)
        assert decomposition.reconstruction_error(example41_x) < 1e-9
        # negative B puts the residual mass on the first group value
        residual = decomposition.residual
        assert residual.table[0, 0] == pytest.approx(1.0)
        assert residual.table[1, 0] == pytest.approx(0.0, abs=1e-12)

    def test_separable_table(self, separable_model):
        cpd = separable_model.transition_cpd("Y")
        decomposition, _ = degree_case1(cpd, X_SPLIT)
        assert decomposition.alpha == pytest.approx(1.0)
        assert decomposition.residual is None

    def test_parent_grid(self, example33, example41_x):
        grid, scopes, _ = parent_grid(example33, X_SPLIT, "grid")
        assert grid.shape == (2, 2, 2)
        # P(X=T | X-=T, Y-=F)
        assert grid[1, 0, 1] == pytest.approx(0.9)
        swapped, _, _ = parent_grid(example33, Grouping.parse("Y-|X-"), "grid")
        assert swapped[0, 1, 1] == pytest.approx(0.9)
        with pytest.raises(ScopeError, match="two parent groups"):
            parent_grid(example41_x, Grouping.parse("X-|W-|Y-,Z-"), "grid")

    @pytest.mark.parametrize("count", [5, pytest.param(500, marks=pytest.mark.slow)])
    @pytest.mark.parametrize("shape", ["case1", "case2", "case3"])
    def test_agrees_with_lp_on_random_tables(self, shape, count):
        rng = np.random.default_rng(17)
        for _ in range(count):
            cpd, grouping = _random_table(shape, rng)
            assert choose_method(cpd, grouping) == shape
            closed = degree(cpd, grouping, method=shape)
            assert closed.reconstruction_error(cpd) < 1e-9
            assert degree_lp(cpd, grouping).alpha == pytest.approx(closed.alpha, abs=1e-6)

    @pytest.mark.parametrize("seed", range(4))
    @pytest.mark.parametrize("shape", ["case1", "case3"])
    def test_relabel_and_swap_invariance(self, shape, seed):
        cpd, grouping = _random_table(shape, np.random.default_rng(seed))
        alpha = degree(cpd, grouping).alpha
        values = cpd.table.reshape(scope_shape(cpd.parent_scope) + (2,))
        # flip the first parent's values (first group) and the last parent's (second group)
        flipped = np.flip(np.flip(values, axis=0), axis=len(cpd.parent_scope) - 1)
        relabeled = Cpd(cpd.child_scope, cpd.parent_scope, flipped.reshape(-1, 2))
        assert degree(relabeled, grouping).alpha == pytest.approx(alpha, abs=1e-9)
        swapped = Grouping(grouping.groups[::-1])
        assert degree(cpd, swapped).alpha == pytest.approx(alpha, abs=1e-6)


class TestLinearProgram:

    def test_agrees_with_closed_form(self, example33):
        assert degree_lp(example33, X_SPLIT).alpha == pytest.approx(0.91, abs=1e-6)

    def test_grouped_pairs_are_separable(self, example41_x):
        decomposition = degree_lp(example41_x, Grouping.parse("X-,W-|Y-,Z-"))
        assert decomposition.alpha == pytest.approx(1.0, abs=1e-6)
        assert decomposition.nonnegative_weights
        assert decomposition.reconstruction_error(example41_x) < 1e-6

    def test_recombination(self):
        cpd = _three_valued_cpd()
        decomposition = degree_lp(cpd, X_SPLIT)
        assert decomposition.alpha == pytest.approx(0.8, abs=1e-6)
        assert sum(decomposition.group_weights) == pytest.approx(decomposition.alpha, abs=1e-6)
        assert decomposition.recombine().allclose(cpd, atol=1e-6)

    def test_sign_patterns_start_positive(self):
        patterns = sign_patterns(3)
        assert len(patterns) == 8
        assert patterns[0] == (1, 1, 1)
        assert patterns[-1] == (-1, -1, -1)

    @pytest.mark.parametrize("alpha", [0.0, 0.3, 0.75, 1.0])
    def test_generated_degree(self, alpha):
        cpd = generate_figure1_model(alpha, seed=5).transition_cpd("X")
        assert degree_lp(cpd, X_SPLIT).alpha == pytest.approx(alpha, abs=1e-6)
        assert degree(cpd, X_SPLIT).alpha == pytest.approx(alpha, abs=1e-9)

    def test_recombination_miss_is_an_error(self, example33, monkeypatch):
        monkeypatch.setattr(SeparableDecomposition, "reconstruction_error", lambda self, cpd: 1e-3)
        with pytest.raises(SolverError, match="recombines"):
            degree_lp(example33, X_SPLIT)


class TestMethods:

    def test_choose_method(self, example33, example41_x):
        assert choose_method(example33, X_SPLIT) == "case1"
        assert choose_method(_three_valued_cpd(), X_SPLIT) == "case2"
        assert choose_method(example41_x, Grouping.parse("W-|X-,Y-,Z-")) == "case3"
        assert choose_method(example41_x, Grouping.parse("X-,W-|Y-,Z-")) == "lp"
        assert choose_method(example41_x, Grouping.parse("X-|W-|Y-,Z-")) == "lp"

    def test_verify_reports_gap(self, example41_x):
        analysis = analyze_cpd(example41_x, Grouping.parse("W-|X-,Y-,Z-"), verify=True)
        assert analysis.method == "case3"
        assert analysis.verification.lp_alpha == pytest.approx(0.6, abs=1e-6)
        assert analysis.verification.gap < 1e-6

    def test_unknown_method(self, example33):
        with pytest.raises(ScopeError):
            analyze_cpd(example33, X_SPLIT, method="simplex")

    def test_grouping_required(self, example33):
        with pytest.raises(ScopeError):
            analyze_cpd(example33, None)

    def test_mixture_degree_is_at_least_weight(self, example33):
        x, y = binary("X"), binary("Y")
        parents = (x.previous(), y.previous())
        entangled = binary_cpd(x, parents, xor_pattern())
        for weight in (0.2, 0.5, 0.9):
            mixed = mixture_cpd([weight, 1.0 - weight], [example33, entangled], parents)
            assert degree_lp(mixed, X_SPLIT).alpha >= weight * 0.91 - 1e-6

    @pytest.mark.parametrize("seeds", [3, pytest.param(100, marks=pytest.mark.slow)])
    def test_mixing_with_xor_sets_the_degree(self, seeds):
        x, y = binary("X"), binary("Y")
        parents = (x.previous(), y.previous())
        xor = binary_cpd(x, parents, xor_pattern())
        for seed in range(seeds):
            separable = _additive_table(np.random.default_rng(seed))
            for weight in np.linspace(0.0, 1.0, 11):
                mixed = mixture_cpd([weight, 1.0 - weight], [separable, xor], parents)
                assert degree_lp(mixed, X_SPLIT).alpha == pytest.approx(weight, abs=1e-6)


class TestPersistence:

    def test_stay_probability(self, example33):
        result = persistence(example33)
        assert result.kappa == pytest.approx(0.9)
        assert result.recombine().allclose(example33, atol=1e-9)

    def test_identity_has_no_residual(self):
        x = binary("X")
        result = persistence(Cpd.identity(x, x.previous()))
        assert result.kappa == 1.0
        assert result.residual is None

    def test_residual_rows(self):
        x, y = binary("X"), binary("Y")
        cpd = Cpd((x,), (x.previous(), y.previous()), [[0.95, 0.05], [0.9, 0.1], [0.1, 0.9], [0.15, 0.85]])
        result = persistence(cpd)
        assert result.kappa == pytest.approx(0.85)
        np.testing.assert_allclose(result.residual.table,
                                   [[2 / 3, 1 / 3], [1 / 3, 2 / 3], [2 / 3, 1 / 3], [1.0, 0.0]], atol=1e-9)
        assert result.recombine().allclose(cpd, atol=1e-9)
        assert degree_lp(cpd, X_SPLIT).alpha >= 0.85 - 1e-6

    @pytest.mark.parametrize("seed", range(5))
    def test_kappa_bounds_degree(self, seed):
        rng = np.random.default_rng(seed)
        floor = rng.uniform(0.3, 0.95)
        stay = rng.uniform(floor, 1.0, size=4)
        x, y = binary("X"), binary("Y")
        # rows (F,F), (F,T) keep X false; rows (T,F), (T,T) keep it true
        cpd = binary_cpd(x, (x.previous(), y.previous()), [1 - stay[0], 1 - stay[1], stay[2], stay[3]])
        kappa = persistence(cpd).kappa
        assert kappa == pytest.approx(stay.min())
        assert degree_lp(cpd, X_SPLIT).alpha >= kappa - 1e-6

    def test_needs_own_previous_value(self):
        x, y = binary("X"), binary("Y")
        with pytest.raises(ScopeError):
            persistence(binary_cpd(x, (y.previous(),), [0.3, 0.6]))

    def test_analyze_with_verification(self, example33):
        analysis = analyze_cpd(example33, None, method="persistence", verify=True)
        assert analysis.alpha == pytest.approx(0.9)
        # the persistence split is one admissible decomposition
        assert analysis.verification.lp_alpha >= analysis.alpha - 1e-6


class TestSufficiency:

    def test_mixed_difference(self, example33):
        assert max_mixed_difference(example33, X_SPLIT) == pytest.approx(0.18)

    def test_witness_has_equal_marginals(self, example33):
        witness = sufficiency_witness(example33, X_SPLIT)
        assert witness is not None
        for name in ("X-", "Y-"):
            assert marginalize(witness.pi1, [name]).allclose(marginalize(witness.pi2, [name]), atol=1e-12)
        assert witness.max_difference > 0.0
        assert not witness.phi1.allclose(witness.phi2)

    def test_equality_table(self):
        x, y, z = binary("X"), binary("Y"), binary("Z")
        parents = (x.previous(), y.previous())
        # Z is false exactly when the parents agree
        equality = binary_cpd(z, parents, xor_pattern())
        np.testing.assert_allclose(apply_cpd(equality, Categorical.uniform(parents)).values, [0.5, 0.5])
        np.testing.assert_allclose(apply_cpd(equality, Categorical(parents, [0.5, 0.0, 0.0, 0.5])).values, [1.0, 0.0])

        witness = sufficiency_witness(equality, X_SPLIT)
        np.testing.assert_allclose(witness.pi1.values, 0.25)
        np.testing.assert_allclose(witness.phi1.values, [0.5, 0.5], atol=1e-12)
        np.testing.assert_allclose(witness.phi2.values, [1.0, 0.0], atol=1e-12)
        assert witness.max_difference == pytest.approx(0.5)

    def test_separable_has_no_witness(self, separable_model):
        assert sufficiency_witness(separable_model.transition_cpd("X"), X_SPLIT) is None


class TestFactorizationSearch:

    def test_set_partitions(self):
        assert len(list(set_partitions("ABCD"))) == 15
        assert len(list(set_partitions("ABCD", max_size=2))) == 10
        assert all(len(block) == 1 for block in next(iter(set_partitions("ABC"))))

    def test_pairs_are_self_sufficient(self, example41_model):
        result = is_self_sufficient(example41_model, EXAMPLE41_FACTORIZATIONS["{UV,WX,YZ}"])
        assert result.sufficient
        assert result.min_degree == pytest.approx(1.0, abs=1e-6)

    def test_halves_are_not_self_sufficient(self, example41_model):
        result = is_self_sufficient(example41_model, EXAMPLE41_FACTORIZATIONS["{UVW,XYZ}"])
        assert not result.sufficient
        assert result.min_degree == pytest.approx(0.6, abs=1e-6)

    def test_factor_level_is_stricter(self, example41_model):
        f = EXAMPLE41_FACTORIZATIONS["{UVW,XYZ}"]
        by_variable = is_self_sufficient(example41_model, f, level="variable")
        by_factor = is_self_sufficient(example41_model, f, level="factor")
        assert by_factor.level == "factor"
        for strict, loose in zip(by_factor.degrees, by_variable.degrees):
            assert strict <= loose + 1e-6

    def test_unknown_level(self, example41_model):
        with pytest.raises(ScopeError):
            is_self_sufficient(example41_model, level="joint")

    def test_search_finds_pairs(self, example41_model):
        ranking = search_factorization(example41_model, 3)
        assert ranking[0].factorization == EXAMPLE41_FACTORIZATIONS["{UV,WX,YZ}"]
        assert ranking[0].min_degree == pytest.approx(1.0, abs=1e-6)
        assert all(len(r.factorization) > 1 for r in ranking)
        assert all(max(len(f) for f in r.factorization) <= 3 for r in ranking)

    def test_ties_prefer_fewer_factors(self):
        ranking = search_factorization(_chains(3), 2)
        assert len(ranking) == 4
        assert all(r.min_degree == 1.0 for r in ranking)
        assert len(ranking[0].factorization) == 2
        assert ranking[-1].factorization == Factorization([["S0"], ["S1"], ["S2"]])

    def test_enumeration_guard(self):
        with pytest.raises(EnumerationGuardError):
            search_factorization(_chains(11), 2)
