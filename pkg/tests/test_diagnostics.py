"""LP solver, polytope queries, certificates, bound constants and empirical checks."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog
from scipy.spatial.distance import pdist

from pdfw.common import ContractViolation, InfeasibleRegion, UnsupportedInstance
from pdfw.core import DecisionSet, LinearConstraints, Objective, ProblemInstance, StateModel
from pdfw.diagnostics import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    BoundConstants,
    DriftTestConfig,
    LagrangeCertificate,
    MixturePolytope,
    NoCertificate,
    SlaterCertificate,
    bruteforce_dist,
    bruteforce_fw_gap,
    certify_lagrange,
    certify_slater,
    compute_bounds,
    convex_bounds,
    diameter,
    dist_to_polytope,
    drift_expectation_bound,
    drift_test,
    fit_rate,
    fw_gap,
    gap_perturbation_check,
    lp_solve,
    membership,
    minkowski_points,
    slater_constant,
    solve_gamma_star,
)
from pdfw.problems import (
    LinearObjective,
    QuadraticObjective,
    SigmoidalUtility,
    make_convex_scheduling,
    make_deterministic,
    make_random_finite,
)

from conftest import float_arrays


class TestLinearProgramming:
    def test_maximize(self):
        result = lp_solve([1, 1], [[1, 1]], [1], maximize=True)
        assert result.status == OPTIMAL
        assert result.value == pytest.approx(1.0)

    def test_infeasible(self):
        result = lp_solve([1], [[1], [1]], [2, 1], [">=", "<="])
        assert result.status == INFEASIBLE
        assert not result.success

    def test_unbounded(self):
        assert lp_solve([1], maximize=True).status == UNBOUNDED

    def test_equality_rows(self):
        result = lp_solve([1, 2], [[1, 1]], [1], ["="])
        assert result.value == pytest.approx(1.0)
        np.testing.assert_allclose(result.x, [1, 0], atol=1e-12)

    def test_free_and_bounded_variables(self):
        # min x - y with x free but x >= -2 from the row, y in [0, 3]
        result = lp_solve([1, -1], [[1, 0]], [-2], [">="], bounds=[(None, None), (0, 3)])
        assert result.value == pytest.approx(-5.0)

    def test_marginal_sign(self):
        result = lp_solve([-1], [[1]], [2])
        assert result.value == pytest.approx(-2.0)
        assert result.marginals[0] == pytest.approx(-1.0)

    def test_unknown_sense(self):
        with pytest.raises(ContractViolation):
            lp_solve([1], [[1]], [1], ["<"])

    @given(
        c=float_arrays((4,), -1, 1),
        A=float_arrays((3, 4), 0, 1),
        b=float_arrays((3,), 0.5, 2),
    )
    @settings(max_examples=100, deadline=None)
    def test_agrees_with_scipy(self, c, A, b):
        result = lp_solve(c, A, b, bounds=(0, 1))
        reference = linprog(c, A_ub=A, b_ub=b, bounds=(0, 1), method="highs")
        assert result.status == OPTIMAL
        assert result.value == pytest.approx(reference.fun, abs=1e-7)
        # Strong duality from the final basis
        assert result.dual_value == pytest.approx(result.value, abs=1e-7)
        assert np.all(A @ result.x <= b + 1e-9)


class TestPolytopeQueries:
    def test_gap_at_far_end(self, unit_interval):
        inst = unit_interval(QuadraticObjective([0.0]))
        poly = MixturePolytope.from_instance(inst)
        assert fw_gap(inst, poly, np.array([1.0])) == pytest.approx(2.0)
        assert fw_gap(inst, poly, np.array([0.0])) == pytest.approx(0.0, abs=1e-12)

    def test_gap_with_constraint(self, unit_interval):
        inst = unit_interval(QuadraticObjective([0.3]), A=[[1.0]], b=[0.5])
        poly = MixturePolytope.from_instance(inst)
        assert fw_gap(inst, poly, np.array([1.0])) == pytest.approx(1.4)

    def test_gap_of_empty_region(self, unit_interval):
        inst = unit_interval(QuadraticObjective([0.3]), A=[[1.0]], b=[-1.0])
        with pytest.raises(InfeasibleRegion):
            fw_gap(inst, MixturePolytope.from_instance(inst), np.array([0.5]))

    def test_distance_to_segment(self):
        inst = make_deterministic([[0, 0], [1, 0]], LinearObjective([0.0, 0.0]))
        poly = MixturePolytope.from_instance(inst)
        assert dist_to_polytope(poly, np.array([0.5, 1.0])) == pytest.approx(1.0, abs=1e-6)
        assert dist_to_polytope(poly, np.array([0.3, 0.0])) == 0.0

    def test_distance_to_mixture(self, two_state_mixture):
        poly = MixturePolytope.from_instance(two_state_mixture())
        assert dist_to_polytope(poly, np.array([1.0, 1.0])) == pytest.approx(np.sqrt(0.5), abs=1e-6)
        assert membership(poly, np.array([0.25, 0.5]))
        assert not membership(poly, np.array([0.6, 0.1]))

    def test_distance_of_nonfinite_point(self, two_state_mixture):
        with pytest.raises(ContractViolation):
            dist_to_polytope(MixturePolytope.from_instance(two_state_mixture()), np.array([np.nan, 0]))

    def test_minkowski_points(self, two_state_mixture):
        points = minkowski_points(MixturePolytope.from_instance(two_state_mixture()))
        np.testing.assert_allclose(points, [[0, 0], [0, 0.5], [0.5, 0], [0.5, 0.5]])


class TestReferenceOptimum:
    def test_unconstrained_center(self, two_state_mixture):
        inst = two_state_mixture(QuadraticObjective([0.2, 0.2]))
        gamma_star, value = solve_gamma_star(inst, MixturePolytope.from_instance(inst))
        np.testing.assert_allclose(gamma_star, [0.2, 0.2], atol=1e-3)
        assert value == pytest.approx(0.0, abs=1e-7)

    def test_active_constraint(self, unit_interval):
        inst = unit_interval(LinearObjective([-1.0]), A=[[1.0]], b=[0.5])
        gamma_star, value = solve_gamma_star(inst, MixturePolytope.from_instance(inst))
        assert gamma_star[0] == pytest.approx(0.5)
        assert value == pytest.approx(-0.5)

    def test_quadratic_with_active_constraint(self, unit_interval):
        inst = unit_interval(QuadraticObjective([0.3]), A=[[1.0]], b=[0.2])
        gamma_star, _ = solve_gamma_star(inst, MixturePolytope.from_instance(inst))
        assert gamma_star[0] == pytest.approx(0.2, abs=1e-3)

    def test_nonconvex_refused(self, unit_interval):
        inst = unit_interval(SigmoidalUtility(dimension=1))
        with pytest.raises(UnsupportedInstance):
            solve_gamma_star(inst, MixturePolytope.from_instance(inst))

    def test_not_above_grid_search(self):
        inst = make_random_finite(d=2, n_states=2, n_vertices=3, seed=3)
        poly = MixturePolytope.from_instance(inst)
        _, value = solve_gamma_star(inst, poly)

        steps = np.arange(21) / 20
        weights = np.array([(a, b, max(1 - a - b, 0.0)) for a in steps for b in steps if a + b <= 1 + 1e-12])
        (p1, p2), (V1, V2) = poly.probabilities, poly.vertex_lists
        points = (p1 * (weights @ V1)[:, None, :] + p2 * (weights @ V2)[None, :, :]).reshape(-1, 2)
        feasible = points[np.all(points @ inst.constraints.A.T <= inst.constraints.b, axis=1)]
        grid_value = min(inst.objective.value(v) for v in feasible)
        assert value <= grid_value + 1e-7

    @pytest.mark.parametrize(
        "center, b, expected",
        [
            ([1.0, 1.0], 1.0, [0.5, 0.5]),
            ([0.9, 0.3], 0.8, [0.7, 0.1]),
            ([0.2, 0.3], 1.0, [0.2, 0.3]),
        ],
    )
    def test_projection_onto_cut_square(self, center, b, expected):
        # Unit square cut by gamma_1 + gamma_2 <= b: the optimum is a projection
        inst = make_deterministic(
            [[0, 0], [1, 0], [0, 1], [1, 1]], QuadraticObjective(center), A=[[1.0, 1.0]], b=[b]
        )
        gamma_star, value = solve_gamma_star(inst, MixturePolytope.from_instance(inst))
        expected_value = float(np.sum((np.array(center) - np.array(expected)) ** 2))
        assert value == pytest.approx(expected_value, abs=1e-4)
        np.testing.assert_allclose(gamma_star, expected, atol=1e-3)


class TestConvexGap:
    @staticmethod
    def _feasible_points(inst, poly, rng, size):
        """Points of the polytope pulled towards the Slater point until feasible"""
        center = certify_slater(inst).gamma_tilde
        r_center = inst.constraints.residuals(center)
        points = []
        for sample in poly.sample(rng, size):
            r_sample = inst.constraints.residuals(sample)
            rising = r_sample > r_center
            scale = np.min(-r_center[rising] / (r_sample[rising] - r_center[rising]), initial=1.0)
            points.append(center + min(scale, 1.0) * (sample - center))
        return points

    @pytest.mark.parametrize("seed", range(5))
    def test_gap_properties(self, seed):
        inst = make_convex_scheduling(d=2, n_states=3, seed=seed)
        poly = MixturePolytope.from_instance(inst)
        gamma_star, f_star = solve_gamma_star(inst, poly)
        assert fw_gap(inst, poly, gamma_star) <= 1e-6

        for gamma in self._feasible_points(inst, poly, np.random.default_rng(seed), 20):
            assert np.all(inst.constraints.residuals(gamma) <= 1e-12)
            gap = fw_gap(inst, poly, gamma)
            assert gap >= -1e-9
            assert gap >= inst.objective.value(gamma) - f_star - 1e-8


class TestBoundConstants:
    def test_linear_on_box(self):
        inst = ProblemInstance(
            StateModel.deterministic(),
            [DecisionSet.box([0, 0], [1, 1])],
            LinearObjective([-1.0, -1.0]),
            LinearConstraints.none(2),
        )
        bc = compute_bounds(inst)
        assert bc.M == pytest.approx(np.sqrt(2))
        assert bc.K == pytest.approx(2.0)
        assert bc.D == pytest.approx(np.sqrt(2))
        assert (bc.L, bc.B) == (0.0, 0.0)
        assert bc.certified

    def test_constraint_bound(self):
        inst = make_deterministic([[0, 0], [1, 0]], LinearObjective([1.0, 1.0]), A=[[1.0, 0.0]], b=[0.0])
        assert compute_bounds(inst).B == pytest.approx(1.0)

    def test_quadratic_on_box(self):
        inst = ProblemInstance(
            StateModel.deterministic(),
            [DecisionSet.box([0, 0], [1, 1])],
            QuadraticObjective([0.0, 0.0]),
            LinearConstraints.none(2),
        )
        bc = compute_bounds(inst)
        assert bc.M == pytest.approx(2 * np.sqrt(2))
        assert bc.K == pytest.approx(2.0)
        assert bc.L == 2.0

    def test_sampled_fallback_is_flagged(self):
        class Cubic(Objective):
            dimension, smoothness, convex = 1, 6.0, False

            def value(self, gamma):
                return float(gamma[0] ** 3)

            def gradient(self, gamma):
                return 3 * gamma**2

        bc = compute_bounds(make_deterministic([[0.0], [1.0]], Cubic()))
        assert not bc.certified
        assert bc.M == pytest.approx(3.0)
        assert bc.K == pytest.approx(1.0)

    def test_diameter_covers_vertices(self, convex_instance):
        bc = compute_bounds(convex_instance)
        vertices = np.vstack([s.generators() for s in convex_instance.decision_sets])
        assert np.all(np.linalg.norm(vertices, axis=1) <= bc.D + 1e-12)

    def test_chunked_diameter(self):
        points = np.random.default_rng(0).normal(size=(2500, 2))
        assert diameter(points) == pytest.approx(pdist(points).max(), rel=1e-12)
        assert diameter(points[:1]) == 0.0

    def test_negative_constant_rejected(self):
        with pytest.raises(ContractViolation):
            BoundConstants(M=1, K=1, B=-1, D=1, L=1)

    def test_convex_bound_decreases_with_square_root_schedule(self, convex_instance):
        bc = compute_bounds(convex_instance)
        bounds = [convex_bounds(bc, T, T**0.5, T**-0.5)["objective"] for T in (100, 1000, 10000)]
        assert bounds[0] > bounds[1] > bounds[2]


class TestCertificates:
    def test_slater_margin(self, unit_interval):
        inst = unit_interval(LinearObjective([1.0]), A=[[1.0]], b=[0.5])
        certificate = certify_slater(inst)
        assert isinstance(certificate, SlaterCertificate)
        assert certificate.margin == pytest.approx(0.5)
        np.testing.assert_allclose(certificate.gamma_tilde, [0.0], atol=1e-12)
        assert certificate.verify(inst)

    def test_boundary_only(self, unit_interval):
        inst = unit_interval(LinearObjective([1.0]), A=[[1.0]], b=[0.0])
        certificate = certify_slater(inst)
        assert isinstance(certificate, NoCertificate)
        assert certificate.margin == pytest.approx(0.0, abs=1e-9)

    def test_needs_constraints(self, unit_interval):
        with pytest.raises(ContractViolation):
            certify_slater(unit_interval(LinearObjective([1.0])))

    def test_power_budget_margin(self, convex_instance):
        # All rates are nonnegative, so the idle policy is the most slack one
        certificate = certify_slater(convex_instance)
        assert certificate.margin == pytest.approx(convex_instance.constraints.b.min(), abs=1e-9)
        assert sum(np.sum(w) for w in certificate.witness) == pytest.approx(2.0)

    def test_lagrange_multiplier(self, unit_interval):
        inst = unit_interval(LinearObjective([-1.0]), A=[[1.0]], b=[0.5])
        certificate = certify_lagrange(inst, MixturePolytope.from_instance(inst), np.array([0.5]))
        assert isinstance(certificate, LagrangeCertificate)
        np.testing.assert_allclose(certificate.multipliers, [1.0], atol=1e-9)
        assert certificate.checked_gap <= 1e-9

    def test_lagrange_on_generated_instance(self, convex_instance):
        poly = MixturePolytope.from_instance(convex_instance)
        gamma_star, _ = solve_gamma_star(convex_instance, poly)
        certificate = certify_lagrange(convex_instance, poly, gamma_star)
        assert np.all(certificate.multipliers >= 0)
        assert certificate.checked_gap <= 1e-5


class TestSlaterConstant:
    def test_degenerate(self):
        zero = BoundConstants(M=0, K=0, B=0, D=0, L=0)
        assert slater_constant(zero, 1.0, 0.0) == pytest.approx(1.0)

    def test_unit_constants(self):
        bc = BoundConstants(M=0, K=0, B=1, D=1, L=0)
        expected = 3 + 8 * np.log(1 + 32 * np.e)
        assert slater_constant(bc, 1.0, 0.0) == pytest.approx(expected)
        assert slater_constant(bc, 1.0, 0.0) == pytest.approx(38.8, abs=0.2)

    @pytest.mark.parametrize("epsilon", [0.0, -1.0])
    def test_margin_must_be_positive(self, epsilon):
        with pytest.raises(ContractViolation):
            slater_constant(BoundConstants(M=1, K=1, B=1, D=1, L=1), epsilon, 1.0)

    @given(
        constants=float_arrays((5,), 0, 10),
        increment=st.floats(0.01, 5),
        which=st.sampled_from(["M", "K", "B", "D", "L"]),
    )
    @settings(max_examples=100, deadline=None)
    def test_monotone_in_constants(self, constants, increment, which):
        values = dict(zip(["M", "K", "B", "D", "L"], constants))
        smaller = slater_constant(BoundConstants(**values), 0.5, 1.0)
        values[which] += increment
        assert slater_constant(BoundConstants(**values), 0.5, 1.0) >= smaller


class TestRateFit:
    HORIZONS = np.array([10, 100, 1000, 10000])

    def test_inverse(self):
        assert fit_rate(self.HORIZONS, 3 / self.HORIZONS) == pytest.approx(-1.0, abs=1e-10)

    def test_inverse_square_root(self):
        assert fit_rate(self.HORIZONS, 3 / np.sqrt(self.HORIZONS)) == pytest.approx(-0.5, abs=1e-10)

    def test_constant(self):
        assert fit_rate(self.HORIZONS, np.full(4, 0.7)) == pytest.approx(0.0, abs=1e-10)

    def test_nonpositive_points_excluded(self):
        errors = 3 / self.HORIZONS
        errors[1] = 0.0
        assert fit_rate(self.HORIZONS, errors) == pytest.approx(-1.0, abs=1e-10)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            fit_rate(self.HORIZONS, [1.0, -1.0, 0.0, 2.0])


class TestDrift:
    def test_decreasing_process(self):
        rng = np.random.default_rng(0)
        Z = [50.0]
        for u in rng.uniform(-1.0, -0.5, size=200):
            Z.append(max(Z[-1] + u, 0.0))
        cfg = DriftTestConfig(t0=5, delta_max=1.0, xi=0.25, lambda_threshold=10.0)
        report = drift_test(Z, cfg)
        assert report.one_step_ok and report.window_ok and report.expectation_ok
        assert report.passed

    def test_biased_random_walk(self):
        rng = np.random.default_rng(1)
        steps = np.where(rng.random((20, 2000)) < 0.75, -1.0, 1.0)
        Z = np.zeros((20, 2001))
        Z[:, 0] = 20.0
        for t in range(2000):
            Z[:, t + 1] = np.maximum(Z[:, t] + steps[:, t], 0.0)
        cfg = DriftTestConfig(t0=10, delta_max=1.0, xi=0.25, lambda_threshold=10.0)
        report = drift_test(Z, cfg)
        assert report.n_windows > 0
        assert report.window_mean <= -10 * 0.25 / 2
        assert report.passed
        assert report.expectation_bound == pytest.approx(drift_expectation_bound(cfg))

    def test_vacuous_window(self):
        cfg = DriftTestConfig(t0=2, delta_max=1.0, xi=0.5, lambda_threshold=100.0)
        report = drift_test(np.linspace(0, 5, 11), cfg)
        assert report.vacuous
        assert report.passed

    def test_one_step_violation(self):
        cfg = DriftTestConfig(t0=2, delta_max=1.0, xi=0.5, lambda_threshold=100.0)
        report = drift_test([0.0, 5.0, 5.0], cfg)
        assert not report.one_step_ok
        assert not report.passed

    def test_invalid_config(self):
        with pytest.raises(ContractViolation):
            DriftTestConfig(t0=2, delta_max=1.0, xi=1.5, lambda_threshold=1.0)
        with pytest.raises(ContractViolation):
            DriftTestConfig(t0=0, delta_max=1.0, xi=0.5, lambda_threshold=1.0)

    def test_config_from_bounds(self):
        bc = BoundConstants(M=1, K=1, B=2, D=1, L=1)
        cfg = DriftTestConfig.from_bounds(bc, epsilon=0.5, V=10, eta=0.1, t0=10)
        assert (cfg.t0, cfg.delta_max, cfg.xi) == (10, 2, 0.25)
        assert cfg.lambda_threshold > 0


class TestPerturbation:
    def test_identical_pairs(self, bundled_sigmoidal):
        poly = MixturePolytope.from_instance(bundled_sigmoidal)
        gamma = np.array([0.2, 0.3])
        report = gap_perturbation_check(bundled_sigmoidal, poly, [(gamma, gamma)])
        assert report.max_violation == 0.0
        assert report.passed

    def test_linear_gap_difference(self, two_state_mixture):
        inst = two_state_mixture(LinearObjective([1.0, -0.5]), A=[[1.0, 1.0]], b=[0.6])
        poly = MixturePolytope.from_instance(inst)
        rng = np.random.default_rng(0)
        pairs = [(rng.uniform(0, 1, 2), rng.uniform(0, 1, 2)) for _ in range(20)]
        for gamma, gamma_tilde in pairs:
            difference = fw_gap(inst, poly, gamma) - fw_gap(inst, poly, gamma_tilde)
            assert difference == pytest.approx(np.array([1.0, -0.5]) @ (gamma - gamma_tilde), abs=1e-9)
        assert gap_perturbation_check(inst, poly, pairs).passed

    def test_sigmoidal_pairs(self, bundled_sigmoidal):
        poly = MixturePolytope.from_instance(bundled_sigmoidal)
        rng = np.random.default_rng(2)
        points = poly.sample(rng, 40)
        pairs = list(zip(points[:20], points[20:]))
        report = gap_perturbation_check(bundled_sigmoidal, poly, pairs)
        assert report.n_pairs == 20
        assert report.passed


class TestBruteForceOracles:
    """LP-based queries against the enumerated hull in d <= 2."""

    @given(seed=st.integers(0, 50), dimension=st.sampled_from([1, 2]))
    @settings(max_examples=10, deadline=None)
    def test_agreement(self, seed, dimension):
        inst = make_random_finite(d=dimension, n_states=2, n_vertices=3, seed=seed, objective="sigmoidal")
        poly = MixturePolytope.from_instance(inst)
        for gamma in np.random.default_rng(seed).uniform(-0.5, 1.5, size=(5, dimension)):
            assert fw_gap(inst, poly, gamma) == pytest.approx(bruteforce_fw_gap(inst, poly, gamma), abs=1e-6)
            assert dist_to_polytope(poly, gamma) == pytest.approx(bruteforce_dist(poly, gamma), abs=1e-4)

    def test_mixture_distance(self, two_state_mixture):
        poly = MixturePolytope.from_instance(two_state_mixture())
        assert bruteforce_dist(poly, np.array([1.0, 1.0])) == pytest.approx(np.sqrt(0.5))
        assert bruteforce_dist(poly, np.array([0.1, 0.1])) == 0.0

    def test_three_dimensions_unsupported(self):
        inst = make_deterministic([[0, 0, 0], [1, 0, 0]], LinearObjective([1.0, 1.0, 1.0]))
        with pytest.raises(ContractViolation):
            bruteforce_dist(MixturePolytope.from_instance(inst), np.zeros(3))
