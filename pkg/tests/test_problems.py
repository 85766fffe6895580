"""Objective families, instance generators and instance files."""

import os

import numpy as np
import pytest
import yaml
from hypothesis import given, settings, strategies as st

from pdfw.common import ContractViolation, GenerationError
from pdfw.diagnostics import SlaterCertificate, compute_bounds
from pdfw.problems import (
    GENERATORS,
    InstanceSpec,
    LinearObjective,
    QuadraticObjective,
    SigmoidalUtility,
    generate,
    gradient_error,
    load_instance,
    load_spec,
    make_convex_scheduling,
    make_objective,
    make_random_finite,
    make_sigmoidal_scheduling,
    save_instance,
    smoothness_ratio,
)

from conftest import INSTANCE_FOLDER, float_arrays, instance_file

OBJECTIVE_FAMILIES = [
    LinearObjective([0.4, -1.2]),
    QuadraticObjective([0.3, 0.7], weight=2.0),
    SigmoidalUtility(dimension=2),
    SigmoidalUtility(c=[1.0, 2.0], a=[5.0, 10.0], x0=[0.2, 0.25]),
]


class TestObjectives:
    @pytest.mark.parametrize("objective", OBJECTIVE_FAMILIES, ids=lambda o: type(o).__name__)
    def test_gradients_match_differences(self, objective):
        points = np.random.default_rng(0).uniform(0, 1, size=(50, 2))
        assert gradient_error(objective, points) < 1e-5

    @pytest.mark.parametrize("objective", OBJECTIVE_FAMILIES, ids=lambda o: type(o).__name__)
    def test_smoothness_constant(self, objective):
        rng = np.random.default_rng(1)
        pairs = list(zip(rng.uniform(0, 1, size=(200, 2)), rng.uniform(0, 1, size=(200, 2))))
        assert smoothness_ratio(objective, pairs) <= objective.smoothness + 1e-9

    @pytest.mark.parametrize("objective", OBJECTIVE_FAMILIES, ids=lambda o: type(o).__name__)
    def test_box_bounds_dominate_samples(self, objective):
        lower, upper = np.zeros(2), np.array([0.8, 1.0])
        M, K = objective.box_bounds(lower, upper)
        for point in np.random.default_rng(2).uniform(lower, upper, size=(200, 2)):
            assert np.linalg.norm(objective.gradient(point)) <= M + 1e-12
            assert abs(objective.value(point)) <= K + 1e-12

    def test_quadratic_values(self):
        f = QuadraticObjective([1.0, 0.0], weight=0.5)
        assert f(np.array([0.0, 0.0])) == 0.5
        np.testing.assert_array_equal(f.gradient(np.array([0.0, 0.0])), [-1.0, 0.0])
        assert f.smoothness == 1.0

    def test_sigmoid_at_threshold(self):
        f = SigmoidalUtility(c=2.0, a=4.0, x0=0.5, dimension=1)
        assert f(np.array([0.5])) == pytest.approx(-1.0)
        assert f.gradient(np.array([0.5]))[0] == pytest.approx(-2.0)
        assert not f.convex

    def test_scalar_parameters_broadcast(self):
        f = SigmoidalUtility(a=[10.0, 5.0])
        assert f.dimension == 2
        np.testing.assert_array_equal(f.c, [1.0, 1.0])

    def test_negative_steepness(self):
        with pytest.raises(ContractViolation):
            SigmoidalUtility(a=-1.0, dimension=1)

    def test_registry(self):
        f = make_objective("quadratic", center=[0.1, 0.2])
        assert isinstance(f, QuadraticObjective)
        with pytest.raises(NotImplementedError):
            make_objective("cubic")


class TestGenerators:
    @pytest.mark.parametrize("factory", [make_convex_scheduling, make_sigmoidal_scheduling])
    def test_slater_certified(self, factory):
        inst = factory(d=3, n_states=4, seed=7)
        certificate = inst.certificates["slater"]
        assert isinstance(certificate, SlaterCertificate)
        assert certificate.margin > 0
        assert certificate.verify(inst)
        assert inst.bounds is not None

    def test_vertices_in_unit_cube(self, convex_instance):
        for decision_set in convex_instance.decision_sets:
            assert np.all((decision_set.vertices >= 0) & (decision_set.vertices <= 1))
            np.testing.assert_array_equal(decision_set.vertices[0], np.zeros(2))

    def test_reproducible(self):
        first = make_convex_scheduling(d=2, n_states=3, seed=11)
        second = make_convex_scheduling(d=2, n_states=3, seed=11)
        np.testing.assert_array_equal(first.state_model.probabilities, second.state_model.probabilities)
        np.testing.assert_array_equal(first.constraints.b, second.constraints.b)
        for a, b in zip(first.decision_sets, second.decision_sets):
            np.testing.assert_array_equal(a.vertices, b.vertices)

    @pytest.mark.parametrize("d,n_states", [(0, 2), (2, 0)])
    def test_invalid_sizes(self, d, n_states):
        with pytest.raises(GenerationError):
            make_convex_scheduling(d=d, n_states=n_states, seed=0)

    def test_random_finite_needs_vertices(self):
        with pytest.raises(GenerationError):
            make_random_finite(d=2, n_states=2, n_vertices=0, seed=0)

    @given(seed=st.integers(0, 1000), objective=st.sampled_from(["quadratic", "linear", "sigmoidal"]))
    @settings(max_examples=20, deadline=None)
    def test_random_finite(self, seed, objective):
        inst = make_random_finite(d=2, n_states=3, n_vertices=4, seed=seed, objective=objective)
        assert inst.constraints.N == 1
        # The idle policy satisfies the constraint strictly
        assert inst.constraints.b[0] > 0
        assert inst.certificates["slater"].margin > 0

    def test_registry(self):
        assert set(GENERATORS) == {"convex_scheduling", "sigmoidal_scheduling", "random_finite"}
        inst = generate("random_finite", d=1, n_states=2, n_vertices=3, seed=0, objective="linear")
        assert inst.dimension == 1
        with pytest.raises(NotImplementedError):
            generate("lattice", d=2)


class TestInstanceFiles:
    def test_round_trip(self, convex_instance, tmp_path):
        path = tmp_path / "instance.yaml"
        save_instance(convex_instance, path)
        loaded = load_instance(path)

        np.testing.assert_allclose(loaded.state_model.probabilities, convex_instance.state_model.probabilities)
        np.testing.assert_allclose(loaded.constraints.A, convex_instance.constraints.A)
        np.testing.assert_allclose(loaded.constraints.b, convex_instance.constraints.b)
        np.testing.assert_allclose(loaded.objective.center, convex_instance.objective.center)
        for a, b in zip(loaded.decision_sets, convex_instance.decision_sets):
            np.testing.assert_allclose(a.vertices, b.vertices)
        assert loaded.certificates["slater"].margin == pytest.approx(
            convex_instance.certificates["slater"].margin, abs=1e-9
        )
        assert loaded.bounds == compute_bounds(loaded)

    def test_edges_are_kept(self, segment_instance, tmp_path):
        path = tmp_path / "graph.yaml"
        save_instance(InstanceSpec.from_instance(segment_instance, edges=[(0, 1), (1, 2)]), path)
        assert load_spec(path).edges == [[0, 1], [1, 2]]

    def test_wrong_version(self, segment_instance):
        document = InstanceSpec.from_instance(segment_instance).to_dict()
        document["version"] = 2
        with pytest.raises(ContractViolation):
            InstanceSpec.from_dict(document)

    @pytest.mark.parametrize("key", ["states", "objective", "d"])
    def test_missing_key(self, segment_instance, key):
        document = InstanceSpec.from_instance(segment_instance).to_dict()
        del document[key]
        with pytest.raises(ContractViolation):
            InstanceSpec.from_dict(document)

    def test_declared_margin_is_checked(self, convex_instance):
        document = InstanceSpec.from_instance(convex_instance).to_dict()
        document["certificates"]["slater_margin"] += 0.05
        with pytest.raises(GenerationError):
            InstanceSpec.from_dict(document).to_instance()
        # Skipping verification accepts the file as is
        InstanceSpec.from_dict(document).to_instance(verify=False)

    def test_declared_optimum_is_checked(self, convex_instance):
        document = InstanceSpec.from_instance(convex_instance).to_dict()
        document["certificates"]["gamma_star"] = [5.0, 5.0]
        with pytest.raises(GenerationError):
            InstanceSpec.from_dict(document).to_instance()

    def test_unknown_decision_set(self, segment_instance):
        document = InstanceSpec.from_instance(segment_instance).to_dict()
        document["states"][0] = {"probability": 1.0, "ball": {"radius": 1.0}}
        with pytest.raises(NotImplementedError):
            InstanceSpec.from_dict(document).to_instance()

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_instance(tmp_path / "absent.yaml")

    @pytest.mark.parametrize("name", sorted(os.listdir(INSTANCE_FOLDER)))
    def test_bundled_instances_load(self, name):
        inst = load_instance(instance_file(name))
        with open(instance_file(name), encoding="utf8") as instancefile:
            assert inst.name == yaml.safe_load(instancefile)["name"]
        if inst.constraints.N > 0:
            assert inst.bounds.B > 0

    @given(probabilities=float_arrays((3,), 0.01, 1.0))
    @settings(max_examples=20, deadline=None)
    def test_probabilities_survive_yaml(self, probabilities, tmp_path_factory):
        probabilities = probabilities / probabilities.sum()
        spec = InstanceSpec(
            name="mixture",
            d=1,
            probabilities=probabilities.tolist(),
            decision_sets=[{"vertices": [[0.0], [1.0]]}] * 3,
            objective_id="linear",
            objective_params={"c": [1.0]},
        )
        path = tmp_path_factory.mktemp("specs") / "mixture.yaml"
        save_instance(spec, path)
        np.testing.assert_allclose(load_instance(path).state_model.probabilities, probabilities, rtol=1e-12)
