"""Shared instances and strategies for the PDFW test suite."""

import os

import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pdfw.core import DecisionSet, LinearConstraints, ProblemInstance, StateModel
from pdfw.problems import (
    LinearObjective,
    QuadraticObjective,
    load_instance,
    make_convex_scheduling,
    make_deterministic,
    make_sigmoidal_scheduling,
)

INSTANCE_FOLDER = os.path.join(os.path.dirname(__file__), "../pdfw/inputdata/instances")


def instance_file(name: str) -> str:
    return os.path.join(INSTANCE_FOLDER, name)


def float_arrays(shape, min_value=-10.0, max_value=10.0):
    """Finite float64 arrays with entries in [min_value, max_value]"""
    return arrays(
        dtype=np.float64,
        shape=shape,
        elements=st.floats(
            min_value=min_value, max_value=max_value, allow_nan=False, allow_infinity=False
        ),
    )


#######################
# Small hand-checkable instances
#######################


@pytest.fixture
def segment_instance():
    """X = {(0,0), (1,0)} in every slot, f(gamma) = -gamma_1, no constraints"""
    return make_deterministic([[0.0, 0.0], [1.0, 0.0]], LinearObjective([-1.0, 0.0]))


@pytest.fixture
def unit_interval():
    """Factory for d = 1 single-state instances on conv{0, 1}"""

    def build(objective, A=None, b=None):
        return make_deterministic([[0.0], [1.0]], objective, A, b)

    return build


@pytest.fixture
def two_state_mixture():
    """p = (0.5, 0.5), X_1 = {(0,0), (1,0)}, X_2 = {(0,0), (0,1)}"""

    def build(objective=None, A=None, b=None):
        objective = LinearObjective([0.0, 0.0]) if objective is None else objective
        constraints = (
            LinearConstraints.none(2) if A is None else LinearConstraints(A, b)
        )
        return ProblemInstance(
            StateModel([0.5, 0.5]),
            [
                DecisionSet.finite([[0.0, 0.0], [1.0, 0.0]]),
                DecisionSet.finite([[0.0, 0.0], [0.0, 1.0]]),
            ],
            objective,
            constraints,
            name="two_state_mixture",
        )

    return build


@pytest.fixture
def unit_box_instance():
    """Box [0, 1] in every slot, d = 1"""
    return ProblemInstance(
        StateModel.deterministic(),
        [DecisionSet.box([0.0], [1.0])],
        QuadraticObjective([0.5]),
        LinearConstraints.none(1),
        name="unit_box",
    )


#######################
# Generated instances (expensive, shared per module)
#######################


@pytest.fixture(scope="module")
def convex_instance():
    return make_convex_scheduling(d=2, n_states=2, seed=0)


@pytest.fixture(scope="module")
def sigmoidal_instance():
    return make_sigmoidal_scheduling(d=2, n_states=2, seed=0)


@pytest.fixture(scope="module")
def bundled_sigmoidal():
    return load_instance(instance_file("two_user_sigmoidal.yaml"))
