"""Full-horizon runners: PDFW, its baselines and the two-phase scheme."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pdfw.common import ContractViolation, UnsupportedInstance
from pdfw.core import AlgoConfig
from pdfw.algorithms import (
    draw_alpha,
    run_algorithm,
    run_dpp,
    run_frank_wolfe,
    run_pd_gradient,
    run_pdfw,
    run_tracking_fw,
    run_two_phase,
    tracking_trace,
)
from pdfw.diagnostics import MixturePolytope, compute_bounds, dist_to_polytope, tracking_bounds
from pdfw.problems import LinearObjective, QuadraticObjective, make_deterministic, make_random_finite


class TestPrimalDualFrankWolfe:
    def test_two_slot_recursion(self, segment_instance):
        result = run_pdfw(segment_instance, AlgoConfig(T=2, V=1, eta=0.5))
        np.testing.assert_array_equal(result.trace.xs, [[1, 0], [1, 0]])
        np.testing.assert_array_equal(result.trace.gamma(0), [0.5, 0])
        np.testing.assert_array_equal(result.trace.gamma(1), [0.75, 0])
        np.testing.assert_array_equal(result.x_bar, [1, 0])
        assert result.f_xbar == -1.0
        assert result.alpha in (-1, 0)

    def test_single_slot(self, convex_instance):
        result = run_pdfw(convex_instance, AlgoConfig(T=1, V=3.0, eta=0.2, seed=4))
        x0 = result.trace.xs[0]
        np.testing.assert_array_equal(result.x_bar, x0)
        np.testing.assert_allclose(result.trace.gamma(0), 0.2 * x0)
        assert result.alpha == -1
        np.testing.assert_array_equal(result.gamma_alpha, np.zeros(2))

    def test_violations_recomputable(self, convex_instance):
        result = run_pdfw(convex_instance, AlgoConfig(T=50, V=5.0, eta=0.1, seed=1))
        A, b = convex_instance.constraints.A, convex_instance.constraints.b
        np.testing.assert_allclose(result.violations, A @ result.trace.xs.mean(axis=0) - b, atol=1e-12)

    def test_deterministic(self, convex_instance):
        cfg = AlgoConfig(T=200, V=5.0, eta=0.1, seed=9)
        first, second = run_pdfw(convex_instance, cfg), run_pdfw(convex_instance, cfg)
        np.testing.assert_array_equal(first.trace.xs, second.trace.xs)
        np.testing.assert_array_equal(first.trace.queues, second.trace.queues)
        assert first.alpha == second.alpha

    def test_horizon_does_not_change_states(self, convex_instance):
        short = run_pdfw(convex_instance, AlgoConfig(T=30, seed=2))
        long = run_pdfw(convex_instance, AlgoConfig(T=60, seed=2))
        np.testing.assert_array_equal(short.trace.states, long.trace.states[:30])


class TestRunIdentities:
    """Exact per-run identities on random finite instances."""

    @given(seed=st.integers(0, 1000), T=st.integers(1, 150), eta=st.floats(0.01, 0.99), V=st.floats(0.1, 50))
    @settings(max_examples=30, deadline=None)
    def test_identities(self, sigmoidal_instance, seed, T, eta, V):
        inst = sigmoidal_instance
        trace = run_pdfw(inst, AlgoConfig(T=T, V=V, eta=eta, seed=seed)).trace
        A, b = inst.constraints.A, inst.constraints.b

        assert np.all(trace.queues >= 0)
        assert trace.queue_error(inst.constraints) == 0.0
        assert trace.recursion_error(eta) <= 1e-12
        # Queue lower bound
        assert np.all((trace.xs @ A.T - b).sum(axis=0) <= trace.queues[-1] + 1e-9)
        # Path-average identity
        np.testing.assert_allclose(
            trace.x_bar - trace.theta_bar, trace.gamma(T - 1) / (eta * T), atol=1e-9
        )
        # One-step queue change
        steps = np.linalg.norm(np.diff(trace.queues, axis=0), axis=1)
        assert np.all(steps <= inst.bounds.B + 1e-9)

    @given(seed=st.integers(0, 10_000), T=st.integers(1, 10_000))
    @settings(max_examples=200, deadline=None)
    def test_alpha_range(self, seed, T):
        assert -1 <= draw_alpha(seed, T) <= max(T - 2, -1)

    def test_alpha_is_uniform(self):
        alphas = np.array([draw_alpha(seed, 4) for seed in range(4000)])
        frequencies = np.bincount(alphas + 1, minlength=4) / len(alphas)
        assert len(frequencies) == 4
        np.testing.assert_allclose(frequencies, 0.25, atol=0.03)


class TestPrimalDualGradient:
    def test_same_trace_as_pdfw(self, convex_instance):
        beta = 0.1
        baseline = run_pd_gradient(convex_instance, beta, T=300, seed=6)
        pdfw = run_pdfw(convex_instance, AlgoConfig(T=300, V=1 / beta, eta=beta, seed=6))
        np.testing.assert_array_equal(baseline.trace.xs, pdfw.trace.xs)
        np.testing.assert_array_equal(baseline.trace.gammas, pdfw.trace.gammas)
        np.testing.assert_array_equal(baseline.trace.queues, pdfw.trace.queues)

    def test_hand_recursion(self, segment_instance):
        result = run_pd_gradient(segment_instance, 0.5, T=2)
        np.testing.assert_array_equal(result.trace.gamma(0), [0.5, 0])
        np.testing.assert_array_equal(result.trace.gamma(1), [0.75, 0])

    @pytest.mark.parametrize("beta", [0.0, 1.0, -0.1])
    def test_invalid_beta(self, segment_instance, beta):
        with pytest.raises(ContractViolation):
            run_pd_gradient(segment_instance, beta, T=2)


class TestDriftPlusPenalty:
    def test_enumerates_objective(self, segment_instance):
        result = run_dpp(segment_instance, AlgoConfig(T=1, V=1, eta=0.5))
        np.testing.assert_array_equal(result.trace.xs[0], [1, 0])

    def test_nonlinear_objective(self):
        inst = make_deterministic([[0, 0], [1, 0]], QuadraticObjective([0.25, 0.0]))
        result = run_dpp(inst, AlgoConfig(T=1, V=1, eta=0.5))
        np.testing.assert_array_equal(result.trace.xs[0], [0, 0])

    def test_linear_objective_matches_pdfw(self):
        inst = make_random_finite(d=2, n_states=3, n_vertices=4, seed=0, objective="linear")
        cfg = AlgoConfig(T=200, V=4.0, eta=0.1, seed=3)
        np.testing.assert_array_equal(run_dpp(inst, cfg).trace.xs, run_pdfw(inst, cfg).trace.xs)

    def test_queues_follow_update_rule(self, convex_instance):
        trace = run_dpp(convex_instance, AlgoConfig(T=100, V=5.0, eta=0.1, seed=0)).trace
        assert trace.queue_error(convex_instance.constraints) <= 1e-12

    def test_continuous_sets_unsupported(self, unit_box_instance):
        with pytest.raises(UnsupportedInstance):
            run_dpp(unit_box_instance, AlgoConfig(T=5))


class TestFrankWolfe:
    def test_harmonic_steps_give_running_average(self, convex_instance):
        trace = run_frank_wolfe(convex_instance, T=100, seed=1).trace
        running = np.cumsum(trace.xs, axis=0) / np.arange(1, 101)[:, None]
        np.testing.assert_allclose(trace.gammas[1:], running, atol=1e-9)

    def test_fixed_steps_need_eta(self, convex_instance):
        with pytest.raises(ContractViolation):
            run_frank_wolfe(convex_instance, T=10, steps="fixed")


class TestTracking:
    def test_two_slot_box(self, unit_box_instance):
        trace = tracking_trace(unit_box_instance, [0.5], T=2)
        np.testing.assert_array_equal(trace.xs, [[1.0], [0.0]])
        assert run_tracking_fw(unit_box_instance, [0.5], T=2)[0] == 0.5

    def test_vertex_target(self):
        inst = make_deterministic([[1, 0], [0, 0], [0, 1]], LinearObjective([0.0, 0.0]))
        x_bar = run_tracking_fw(inst, [1.0, 0.0], T=50)
        np.testing.assert_array_equal(x_bar, [1.0, 0.0])

    def test_running_average_identity(self, convex_instance):
        trace = tracking_trace(convex_instance, [0.2, 0.1], T=500, seed=3)
        running = np.cumsum(trace.xs, axis=0) / np.arange(1, 501)[:, None]
        assert np.max(np.abs(running - trace.gammas[1:])) <= 1e-9

    def test_uses_fresh_states(self, convex_instance):
        phase1 = run_pdfw(convex_instance, AlgoConfig(T=200, seed=5)).trace.states
        phase2 = tracking_trace(convex_instance, [0.2, 0.1], T=200, seed=5).states
        assert not np.array_equal(phase1, phase2)

    @pytest.mark.parametrize("offset", [0.0, 0.8])
    def test_tracking_excess_bound(self, convex_instance, offset):
        # offset 0 keeps the target inside the achievable-mean polytope
        poly = MixturePolytope.from_instance(convex_instance)
        target = poly.sample(np.random.default_rng(7), 1)[0] + offset
        T = 200
        bound = tracking_bounds(compute_bounds(convex_instance), T)["tracking_sq"]
        squared = [
            np.sum((run_tracking_fw(convex_instance, target, T, seed=seed) - target) ** 2)
            for seed in range(20)
        ]
        excess = np.mean(squared) - dist_to_polytope(poly, target) ** 2
        assert excess <= bound
        if offset == 0.0:
            assert np.sqrt(np.mean(squared)) <= np.sqrt(bound)

    @pytest.mark.parametrize("target", [[0.5, 0.5], [np.nan], [np.inf]])
    def test_invalid_target(self, unit_box_instance, target):
        with pytest.raises(ContractViolation):
            tracking_trace(unit_box_instance, target, T=5)


class TestTwoPhase:
    def test_single_slot(self, segment_instance):
        result = run_two_phase(segment_instance, AlgoConfig(T=1, V=1, eta=0.5))
        np.testing.assert_array_equal(result.target, [0, 0])
        np.testing.assert_array_equal(result.phase2_xbar, [0, 0])
        assert result.tracking_error == 0.0

    def test_tracking_error_recomputable(self, convex_instance):
        result = run_two_phase(convex_instance, AlgoConfig(T=100, seed=2, schedule="CubeRoot"), replications=3)
        assert len(result.phase2_xbars) == 3
        np.testing.assert_allclose(result.phase2_xbar, np.mean(result.phase2_xbars, axis=0))
        assert result.tracking_error == pytest.approx(np.linalg.norm(result.phase2_xbar - result.target))
        np.testing.assert_array_equal(result.target, result.phase1.gamma_alpha)

    def test_deterministic_instance_tracks_target(self):
        inst = make_deterministic([[0, 0], [1, 0], [0, 1]], QuadraticObjective([0.3, 0.3]))
        T = 1000
        errors = [
            run_two_phase(inst, AlgoConfig(T=T, seed=seed, schedule="CubeRoot")).tracking_error
            for seed in range(5)
        ]
        assert np.mean(errors) <= inst.bounds.D * (np.sqrt(2) + 1) / T ** (1 / 3)


class TestDispatch:
    def test_unknown_algorithm(self, segment_instance):
        with pytest.raises(NotImplementedError):
            run_algorithm("simplex", segment_instance, AlgoConfig(T=1))

    def test_pdgrad_by_name(self, segment_instance):
        cfg = AlgoConfig(T=3, V=2.0, eta=0.5)
        by_name = run_algorithm("pdgrad", segment_instance, cfg)
        np.testing.assert_array_equal(by_name.trace.xs, run_pd_gradient(segment_instance, 0.5, 3).trace.xs)
