"""
Instance generators
-------------------
Opportunistic scheduling of d users: in every slot a channel state is drawn,
and the scheduler serves at most one user, at the rate the state allows.
The vertex set of a state is therefore {0} u {r_{s,j} e_j : j = 1..d}.
Per-user average-power constraints <e_j, gamma> <= b_j keep the idle policy
strictly feasible, so every generated instance has a Slater certificate.

All generated vertices lie in [0, 1]^d.
"""

import numpy as np

from pdfw.common import logger, timer, GenerationError
from pdfw.core.types import DecisionSet, LinearConstraints, ProblemInstance, StateModel
from pdfw.diagnostics.bounds import compute_bounds
from pdfw.diagnostics.certificates import SlaterCertificate, certify_slater
from pdfw.problems.objectives import (
    LinearObjective,
    QuadraticObjective,
    SigmoidalUtility,
    make_objective,
)

MAX_RETRIES = 100


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def _state_probabilities(rng, n_states):
    probabilities = rng.dirichlet(np.ones(n_states))
    return probabilities / probabilities.sum()


def _scheduling_sets(rng, d, n_states):
    decision_sets = []
    for _ in range(n_states):
        rates = rng.uniform(0.2, 1.0, size=d)
        decision_sets.append(DecisionSet.finite(np.vstack([np.zeros(d), np.diag(rates)])))
    return decision_sets


def _power_budgets(rng, state_model, decision_sets):
    """Budgets between 20% and 80% of each user's largest average rate"""
    largest = sum(
        p * s.vertices.max(axis=0)
        for p, s in zip(state_model.probabilities, decision_sets)
    )
    return rng.uniform(0.2, 0.8, size=len(largest)) * largest


def _certified(build, name):
    """Retries `build(attempt)` until the instance has a Slater certificate"""
    for attempt in range(MAX_RETRIES):
        inst = build(attempt)
        certificate = certify_slater(inst)
        if isinstance(certificate, SlaterCertificate):
            inst.certificates["slater"] = certificate
            logger.debug(
                f"Instance `{name}` certified with Slater margin {certificate.margin:.4g} "
                f"after {attempt + 1} draw(s)"
            )
            return inst.with_bounds(compute_bounds(inst))
    raise GenerationError(
        f"Could not draw a Slater-certified `{name}` instance in {MAX_RETRIES} attempts"
    )


def _scheduling_instance(d, n_states, seed, objective_factory, name):
    if d < 1 or n_states < 1:
        raise GenerationError(f"Need d >= 1 and n_states >= 1, got d={d}, n_states={n_states}")

    def build(attempt):
        rng = _rng([seed, attempt])
        state_model = StateModel(_state_probabilities(rng, n_states))
        decision_sets = _scheduling_sets(rng, d, n_states)
        budgets = _power_budgets(rng, state_model, decision_sets)
        objective = objective_factory(rng)
        return ProblemInstance(
            state_model,
            decision_sets,
            objective,
            LinearConstraints(np.eye(d), budgets),
            name=name,
        )

    return _certified(build, name)


@timer("Convex scheduling instance generation")
def make_convex_scheduling(d: int, n_states: int, seed: int) -> ProblemInstance:
    """Scheduling instance with f(gamma) = ||gamma - g||^2, g uniform in [0, 1]^d"""
    return _scheduling_instance(
        d,
        n_states,
        seed,
        lambda rng: QuadraticObjective(rng.uniform(0, 1, size=d)),
        f"convex_scheduling_d{d}_s{n_states}_seed{seed}",
    )


@timer("Sigmoidal scheduling instance generation")
def make_sigmoidal_scheduling(d: int, n_states: int, seed: int) -> ProblemInstance:
    """Scheduling instance maximizing a sum of sigmoidal utilities (a=10, x0=0.5, c=1)"""
    return _scheduling_instance(
        d,
        n_states,
        seed,
        lambda rng: SigmoidalUtility(dimension=d),
        f"sigmoidal_scheduling_d{d}_s{n_states}_seed{seed}",
    )


def make_deterministic(vertices, objective, A=None, b=None, name="deterministic") -> ProblemInstance:
    """Single-state instance whose decision set is fixed in every slot"""
    decision_set = DecisionSet.finite(vertices)
    if A is None:
        constraints = LinearConstraints.none(decision_set.dimension)
    else:
        constraints = LinearConstraints(np.atleast_2d(A), np.atleast_1d(b))
    inst = ProblemInstance(
        StateModel.deterministic(), [decision_set], objective, constraints, name=name
    )
    return inst.with_bounds(compute_bounds(inst))


@timer("Random finite instance generation")
def make_random_finite(
    d: int, n_states: int, n_vertices: int, seed: int, objective: str = "quadratic"
) -> ProblemInstance:
    """
    Random finite instance: each state has the origin plus `n_vertices - 1`
    uniform vertices in [0, 1]^d, and one random constraint that the origin
    satisfies strictly. Used by the oracle and identity checks.
    """
    if n_vertices < 1:
        raise GenerationError("Need at least one vertex per state")
    name = f"random_{objective}_d{d}_s{n_states}_v{n_vertices}_seed{seed}"

    def build(attempt):
        rng = _rng([seed, attempt])
        state_model = StateModel(_state_probabilities(rng, n_states))
        decision_sets = [
            DecisionSet.finite(
                np.vstack([np.zeros(d), rng.uniform(0, 1, size=(n_vertices - 1, d))])
            )
            for _ in range(n_states)
        ]
        a = rng.uniform(0.1, 1.0, size=d)
        largest = max(float(np.max(s.vertices @ a)) for s in decision_sets)
        b = rng.uniform(0.3, 0.8) * max(largest, 1e-3)
        if objective == "quadratic":
            f = QuadraticObjective(rng.uniform(0, 1, size=d))
        elif objective == "linear":
            f = LinearObjective(rng.uniform(-1, 1, size=d))
        elif objective == "sigmoidal":
            f = make_objective("sigmoidal", dimension=d)
        else:
            raise NotImplementedError(f"Objective `{objective}` not implemented")
        return ProblemInstance(
            state_model,
            decision_sets,
            f,
            LinearConstraints(a[None, :], [b]),
            name=name,
        )

    return _certified(build, name)


GENERATORS = {
    "convex_scheduling": make_convex_scheduling,
    "sigmoidal_scheduling": make_sigmoidal_scheduling,
    "random_finite": make_random_finite,
}


def generate(name: str, **params) -> ProblemInstance:
    if name not in GENERATORS:
        raise NotImplementedError(f"Instance generator `{name}` not implemented")
    return GENERATORS[name](**params)
