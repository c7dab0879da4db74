"""Resolution/order selection, coefficient tables, and the synthesis pipelines."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from taylornet import (
    GridIndex,
    InfeasibleError,
    SubspaceSet,
    SynthesisConfig,
    choose_N_analytic,
    choose_N_sobolev,
    choose_N_union,
    choose_n_analytic,
    enumerate_grid,
    enumerate_multi_indices,
    error_bound_sobolev,
    grid_size,
    monomial_eval,
    multi_index_count,
    phi_scalar,
    polynomial_oracle,
    predicted_param_count,
    restrict_oracle,
    restriction_matrix,
    synthesize,
    synthesize_sobolev,
    taylor_coefficients,
)
from taylornet.synthesis import assemble_network


class TestChooseNSobolev:
    def test_hand_cases(self):
        assert choose_N_sobolev(0.5, 1, 1) == 4
        assert choose_N_sobolev(0.01, 2, 2) == 29

    def test_floor_is_one(self):
        assert choose_N_sobolev(0.99, 1, 5) == 1

    def test_guarantee_holds(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            d = int(rng.integers(1, 4))
            n = int(rng.integers(1, 5))
            eps = float(rng.uniform(0.005, 0.9))
            try:
                N = choose_N_sobolev(eps, d, n)
            except InfeasibleError:
                continue
            assert error_bound_sobolev(N, d, n, 1.0) <= eps
            if N > 1:
                assert error_bound_sobolev(N - 1, d, n, 1.0) > eps

    def test_rejects_over_cap(self):
        with pytest.raises(InfeasibleError):
            choose_N_sobolev(0.01, 4, 2)

    def test_epsilon_range(self):
        with pytest.raises(ValueError):
            choose_N_sobolev(0.0, 1, 1)
        with pytest.raises(ValueError):
            choose_N_sobolev(1.5, 1, 1)


class TestErrorBound:
    def test_hand_cases(self):
        assert error_bound_sobolev(4, 1, 1, 1.0) == 0.5
        assert error_bound_sobolev(29, 2, 2, 1.0) == pytest.approx(0.009512485, abs=1e-9)

    def test_halves_when_N_doubles_at_first_order(self):
        one = error_bound_sobolev(10, 2, 1, 1.0)
        two = error_bound_sobolev(20, 2, 1, 1.0)
        assert two == pytest.approx(one / 2)

    def test_scales_linearly_in_deriv_sup(self):
        assert error_bound_sobolev(7, 1, 2, 3.0) == 3.0 * error_bound_sobolev(7, 1, 2, 1.0)

    def test_negative_deriv_sup_rejected(self):
        with pytest.raises(ValueError):
            error_bound_sobolev(4, 1, 1, -1.0)


class TestChooseNAnalytic:
    def test_hand_cases(self):
        assert choose_n_analytic(2, 1e-3) == 5
        assert choose_n_analytic(2, 0.5) == 2

    def test_monotone_in_epsilon(self):
        prev = 0
        for k in range(1, 14):
            n = choose_n_analytic(2, 2.0**-k)
            assert n >= prev
            prev = n

    def test_d1_rejected(self):
        with pytest.raises(ValueError):
            choose_n_analytic(1, 0.1)


class TestChooseNAnalyticResolution:
    def test_hand_case(self):
        assert choose_N_analytic(1.0, 0.25, 1, 1) == 3
        assert 2.0 * (1.0 / 3.0) ** 2 <= 0.25

    def test_doubling_C(self):
        base = choose_N_analytic(1.0, 0.1, 2, 2)
        doubled = choose_N_analytic(2.0, 0.1, 2, 2)
        assert base * 2 - 1 <= doubled <= base * 2 + 1

    def test_inequality_holds_randomized(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            C_f = float(rng.uniform(0.2, 3.0))
            eps = float(rng.uniform(0.001, 0.9))
            d = int(rng.integers(1, 4))
            n = int(rng.integers(1, 6))
            N = choose_N_analytic(C_f, eps, d, n)
            assert 2.0**d * d**n * (C_f / N) ** (n + 1) <= eps + 1e-12


class TestChooseNUnion:
    def test_guarantee_case(self):
        # The selected N makes the summed per-subspace bound meet epsilon.
        N = choose_N_union(0.1, 3, 1, 1)
        assert N == 60
        assert math.comb(3, 1) * error_bound_sobolev(N, 1, 1, 1.0) <= 0.1

    def test_inequality_holds_randomized(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            d = int(rng.integers(2, 6))
            d_eff = int(rng.integers(1, d))
            n = int(rng.integers(1, 4))
            eps = float(rng.uniform(0.01, 0.9))
            try:
                N = choose_N_union(eps, d, d_eff, n)
            except InfeasibleError:
                continue
            combined = math.comb(d, d_eff) * error_bound_sobolev(N, d_eff, n, 1.0)
            assert combined <= eps + 1e-12


class TestTaylorCoefficients:
    def test_constant_oracle(self, catalog):
        table = taylor_coefficients(catalog["const1d"], 3, 1, 3)
        for m, a, v in table.items():
            assert v == (0.5 if a.order() == 0 else 0.0)

    def test_square_at_half(self):
        sq = polynomial_oracle("sq", 1, {(2,): 1.0})
        table = taylor_coefficients(sq, 2, 1, 3)
        m = GridIndex((1,), 2)  # the center 0.5
        assert table.get(m, (0,)) == 0.25
        assert table.get(m, (1,)) == 1.0
        assert table.get(m, (2,)) == 1.0

    def test_bilinear_mixed_term(self, catalog):
        table = taylor_coefficients(catalog["poly2d_bilinear"], 2, 2, 3)
        for m in enumerate_grid(2, 2):
            assert table.get(m, (1, 1)) == 1.0

    def test_norm_violation_diagnostic(self):
        big = polynomial_oracle("big", 1, {(1,): 3.0})
        table = taylor_coefficients(big, 2, 1, 2)
        assert table.norm_violations
        _, index, value = table.norm_violations[0]
        assert value == 3.0 and tuple(index) == (1,)

    def test_closed_form_against_direct_sum(self, catalog):
        oracle = catalog["sin1d"]
        N, d, n = 3, 1, 3
        table = taylor_coefficients(oracle, N, d, n)
        rng = np.random.default_rng(5)
        X = rng.random((200, d))
        want = np.zeros(200)
        for m in enumerate_grid(N, d):
            c = np.asarray(m.coords) / N
            bump = phi_scalar(m, X)
            for a in enumerate_multi_indices(d, n):
                want += table.get(m, a) * bump * monomial_eval(X, c, a)
        assert_allclose(table.closed_form(X), want, rtol=0, atol=1e-14)

    def test_closed_form_2d(self, catalog):
        oracle = catalog["sin2d"]
        N, d, n = 2, 2, 2
        table = taylor_coefficients(oracle, N, d, n)
        rng = np.random.default_rng(6)
        X = rng.random((100, d))
        want = np.zeros(100)
        for m in enumerate_grid(N, d):
            c = np.asarray(m.coords) / N
            bump = phi_scalar(m, X)
            for a in enumerate_multi_indices(d, n):
                want += table.get(m, a) * bump * monomial_eval(X, c, a)
        assert_allclose(table.closed_form(X), want, rtol=0, atol=1e-14)


class TestAssembly:
    def test_shared_and_unshared_agree_exactly(self, catalog):
        table = taylor_coefficients(catalog["sin2d"], 2, 2, 2)
        shared = assemble_network(table, share=True)
        plain = assemble_network(table, share=False)
        assert shared.num_nodes < plain.num_nodes
        X = np.random.default_rng(8).random((300, 2))
        assert np.array_equal(shared.eval_many(X), plain.eval_many(X))

    def test_network_reproduces_closed_form(self, catalog):
        table = taylor_coefficients(catalog["sin1d"], 4, 1, 2)
        net = assemble_network(table)
        X = np.random.default_rng(9).random((1000, 1))
        assert np.max(np.abs(net.eval_many(X) - table.closed_form(X))) <= 1e-12


class TestConfigValidation:
    def test_regime_checked(self):
        with pytest.raises(ValueError):
            SynthesisConfig(d=1, n=1, epsilon=0.1, regime="nope")

    def test_epsilon_checked(self):
        with pytest.raises(ValueError):
            SynthesisConfig(d=1, n=1, epsilon=0.0)

    def test_subset_checked(self):
        with pytest.raises(ValueError):
            SynthesisConfig(d=3, n=1, epsilon=0.1, regime="single_subspace", e=(0, 3))
        with pytest.raises(ValueError):
            SynthesisConfig(d=3, n=1, epsilon=0.1, regime="single_subspace", e=(1, 1))

    def test_d_eff_checked(self):
        with pytest.raises(ValueError):
            SynthesisConfig(d=2, n=1, epsilon=0.1, d_eff=2)


class TestSobolevPipeline:
    def test_report_fields(self, synth):
        rep = synth("sin1d", d=1, n=2, epsilon=0.05)
        assert rep.regime == "sobolev"
        assert rep.N == choose_N_sobolev(0.05, 1, 2)
        assert rep.theoretical_bound <= 0.05
        assert rep.oracle_name == "sin1d"
        doc = rep.to_json_dict()
        assert doc["N"] == rep.N and doc["complexity"]["total_parameters"] > 0

    def test_wrong_dimension_rejected(self, catalog):
        with pytest.raises(ValueError):
            synthesize_sobolev(catalog["sin2d"], SynthesisConfig(d=1, n=1, epsilon=0.1))

    def test_degenerate_epsilon_still_builds(self, catalog):
        rep = synthesize(catalog["poly1d_deg2"], SynthesisConfig(d=1, n=3, epsilon=0.9))
        assert rep.N >= 1

    def test_infeasible_config(self, catalog):
        with pytest.raises(InfeasibleError):
            synthesize(catalog["exp4d"], SynthesisConfig(d=4, n=2, epsilon=0.01))


class TestAnalyticPipeline:
    def test_chosen_n_is_global_argmin(self, catalog):
        for eps in (0.1, 0.01):
            rep = synthesize(
                catalog["exp2d"], SynthesisConfig(d=2, n=1, epsilon=eps, regime="analytic")
            )
            costs = {}
            for n in range(1, 31):
                N = choose_N_analytic(1.0, eps, 2, n)
                if grid_size(N, 2) * multi_index_count(2, n) <= 10_000_000:
                    costs[n] = predicted_param_count(2, n, N)
            best = min(costs.values())
            assert costs[rep.n] == best

    def test_growth_term_recorded(self, catalog):
        rep = synthesize(
            catalog["exp2d"], SynthesisConfig(d=2, n=1, epsilon=0.05, regime="analytic")
        )
        assert rep.predicted_growth is not None and rep.predicted_growth > 0

    def test_d1_fallback_flagged(self, catalog):
        rep = synthesize(
            catalog["exp1d"], SynthesisConfig(d=1, n=1, epsilon=0.1, regime="analytic")
        )
        assert any("direct search" in note for note in rep.notes)
        est_points = np.random.default_rng(0).random((2000, 1))
        err = np.abs(
            catalog["exp1d"].value(est_points) - rep.net.eval_many(est_points)
        ).max()
        assert err <= 0.1

    def test_requires_constant(self, catalog):
        with pytest.raises(ValueError, match="constant"):
            synthesize(catalog["sin2d"], SynthesisConfig(d=2, n=1, epsilon=0.1, regime="analytic"))


class TestRestriction:
    def test_matrix_placement(self):
        A = restriction_matrix((0, 1), 3)
        assert_allclose(A @ np.array([0.3, 0.7]), [0.3, 0.7, 0.0])
        A = restriction_matrix((0, 2), 3)
        assert_allclose(A @ np.array([0.3, 0.7]), [0.3, 0.0, 0.7])

    def test_norm_preserving(self):
        A = restriction_matrix((1, 3), 5)
        x = np.array([0.6, -0.2])
        assert np.linalg.norm(A @ x) == pytest.approx(np.linalg.norm(x))

    def test_bad_subsets(self):
        with pytest.raises(ValueError):
            restriction_matrix((0, 0), 3)
        with pytest.raises(ValueError):
            restriction_matrix((3,), 3)
        with pytest.raises(ValueError):
            restriction_matrix((0, 1, 2), 3)

    def test_restricted_values_and_derivatives(self, catalog):
        oracle = catalog["ridge3d"]
        sub = restrict_oracle(oracle, (1,))
        rng = np.random.default_rng(3)
        T = rng.random((50, 1))
        emb = np.zeros((50, 3))
        emb[:, 1] = T[:, 0]
        assert_allclose(sub.value(T), oracle.value(emb), rtol=0, atol=0)
        assert_allclose(
            sub.derivative((2,), T), oracle.derivative((0, 2, 0), emb), rtol=0, atol=0
        )

    def test_restricted_derivative_never_exceeds_ambient_sup(self, catalog):
        oracle = catalog["exp3d"]
        sub = restrict_oracle(oracle, (0, 2))
        rng = np.random.default_rng(4)
        T = rng.random((200, 2))
        for _ in range(20):
            order = int(rng.integers(1, 4))
            split = int(rng.integers(0, order + 1))
            a = (split, order - split)
            sampled = np.max(np.abs(sub.derivative(a, T)))
            assert sampled <= oracle.deriv_sup(order) + 1e-12


class TestSubspaceSet:
    def test_full_enumeration(self):
        s = SubspaceSet.full(4, 2)
        assert len(s.subsets) == 6
        assert s.subsets[0] == (0, 1)
        assert s.subsets == tuple(sorted(s.subsets))

    def test_validation(self):
        with pytest.raises(ValueError):
            SubspaceSet(3, 1, ((0,), (1,)))  # missing one subset
        with pytest.raises(ValueError):
            SubspaceSet.full(3, 3)


class TestSingleSubspace:
    def test_polynomial_exact_on_subspace(self, synth, catalog):
        rep = synth(
            "poly3d_quad", d=3, n=3, epsilon=0.1, regime="single_subspace", d_eff=1, e=(1,)
        )
        assert rep.net.input_arity == 3
        assert rep.d_eff == 1 and rep.subsets == ((1,),)
        X = np.random.default_rng(5).random((2000, 3))
        X[:, 0] = 0.0
        X[:, 2] = 0.0
        err = np.abs(rep.net.eval_many(X) - catalog["poly3d_quad"].value(X)).max()
        assert err <= 1e-9

    def test_much_cheaper_than_infeasible_full_build(self, synth, catalog):
        # The matching full-dimensional build blows the safety cap; compare
        # against its closed-form predicted cost instead.
        rep = synth(
            "exp4d", d=4, n=2, epsilon=0.01, regime="single_subspace", d_eff=2, e=(0, 3)
        )
        with pytest.raises(InfeasibleError):
            synthesize(catalog["exp4d"], SynthesisConfig(d=4, n=2, epsilon=0.01))
        full_N = math.ceil((math.factorial(2) / (2.0**4 * 4.0**2) * 0.01) ** (-1 / 2))
        predicted_full = predicted_param_count(4, 2, full_N)
        actual = rep.complexity().total_parameters
        assert actual * 50 < predicted_full


class TestUnion:
    def test_routing(self, synth):
        rep = synth("ridge3d", d=3, n=2, epsilon=0.05, regime="union_subspaces", d_eff=1)
        assert len(rep.members) == 3
        assert rep.subspaces.subsets == ((0,), (1,), (2,))
        assert rep.route(np.array([0.0, 0.4, 0.0])) == 1
        assert rep.route(np.zeros(3)) == 0  # all-zero support fits the first subset
        with pytest.raises(ValueError):
            rep.route(np.array([0.1, 0.4, 0.0]))

    def test_members_share_resolution_and_regime(self, synth):
        rep = synth("ridge3d", d=3, n=2, epsilon=0.05, regime="union_subspaces", d_eff=1)
        assert {m.N for m in rep.members} == {rep.N}
        assert all(m.regime == "single_subspace" for m in rep.members)
        assert rep.N == choose_N_union(0.05, 3, 1, 2)

    def test_bound_formula(self, synth, catalog):
        rep = synth("ridge3d", d=3, n=2, epsilon=0.05, regime="union_subspaces", d_eff=1)
        deriv = catalog["ridge3d"].deriv_sup(2)
        assert rep.theoretical_bound == pytest.approx(
            3 * error_bound_sobolev(rep.N, 1, 2, deriv)
        )
        assert rep.theoretical_bound <= 0.05

    def test_eval_many_matches_pointwise(self, synth):
        rep = synth("ridge3d", d=3, n=2, epsilon=0.05, regime="union_subspaces", d_eff=1)
        rng = np.random.default_rng(11)
        X = np.zeros((60, 3))
        which = rng.integers(0, 3, size=60)
        X[np.arange(60), which] = rng.random(60)
        batch = rep.eval_many(X)
        single = np.array([rep.evaluate(x) for x in X])
        assert np.array_equal(batch, single)

    def test_eval_many_rejects_off_union_points(self, synth):
        rep = synth("ridge3d", d=3, n=2, epsilon=0.05, regime="union_subspaces", d_eff=1)
        with pytest.raises(ValueError):
            rep.eval_many(np.full((2, 3), 0.3))

    def test_intersection_consistency(self, synth):
        rep = synth("ridge3d", d=3, n=1, epsilon=0.1, regime="union_subspaces", d_eff=2)
        # Points supported on coordinate 0 lie in both (0,1) and (0,2).
        X = np.zeros((500, 3))
        X[:, 0] = np.linspace(0, 1, 500)
        a = rep.members[0].net.eval_many(X)  # subset (0, 1)
        b = rep.members[1].net.eval_many(X)  # subset (0, 2)
        assert np.max(np.abs(a - b)) <= 1e-9

    def test_complexity_sums_members(self, synth):
        rep = synth("ridge3d", d=3, n=2, epsilon=0.05, regime="union_subspaces", d_eff=1)
        total = rep.complexity()
        assert total.num_nodes == sum(m.net.num_nodes for m in rep.members)
        assert total.depth == max(m.net.complexity().depth for m in rep.members)

    def test_union_json_dict(self, synth):
        rep = synth("ridge3d", d=3, n=2, epsilon=0.05, regime="union_subspaces", d_eff=1)
        doc = rep.to_json_dict()
        assert doc["regime"] == "union_subspaces"
        assert doc["subsets"] == [[0], [1], [2]]
        assert doc["complexity"]["total_parameters"] == rep.complexity().total_parameters


class TestDispatcher:
    def test_unknown_regime_unreachable(self):
        # SynthesisConfig itself refuses unknown regimes.
        with pytest.raises(ValueError):
            SynthesisConfig(d=1, n=1, epsilon=0.1, regime="bogus")

    def test_single_subspace_requires_subset(self, catalog):
        with pytest.raises(ValueError, match="subset"):
            synthesize(
                catalog["poly3d_quad"],
                SynthesisConfig(d=3, n=2, epsilon=0.1, regime="single_subspace"),
            )

    def test_union_requires_d_eff(self, catalog):
        with pytest.raises(ValueError):
            synthesize(
                catalog["ridge3d"],
                SynthesisConfig(d=3, n=2, epsilon=0.1, regime="union_subspaces"),
            )
