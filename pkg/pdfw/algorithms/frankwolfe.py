"""
Queue-free stochastic Frank-Wolfe with pre-determined weights, and its use
as the tracking phase of the two-phase scheme.

With the harmonic weights eta_t = 1/(t+1), gamma_t is exactly the running
average of x_0..x_t.
"""

import time

import numpy as np

from pdfw.common import ContractViolation, PropertyFailure
from pdfw.core.oracle import lmo, queue_update
from pdfw.core.types import (
    TRACKING_STREAM,
    ProblemInstance,
    QueueState,
    RunTrace,
    rng_stream,
)
from pdfw.algorithms.pdfw import sample_states
from pdfw.algorithms.result import RunResult, draw_alpha

HARMONIC = "harmonic"
FIXED = "fixed"
IDENTITY_SLACK = 1e-9


def _frank_wolfe_loop(inst, states, gradient, steps, eta):
    T, d, N = len(states), inst.dimension, inst.constraints.N
    xs = np.empty((T, d))
    gammas = np.zeros((T + 1, d))
    queues = np.zeros((T + 1, N))
    gamma = np.zeros(d)
    q = QueueState.zeros(N)
    for t, state in enumerate(states):
        if steps == HARMONIC:
            eta_t = 1 / (t + 1)
        elif steps == FIXED:
            eta_t = eta
        else:
            raise NotImplementedError(f"Step rule `{steps}` not implemented")
        x = lmo(inst.decision_sets[state], gradient(gamma))
        gamma = (1 - eta_t) * gamma + eta_t * x
        # Queues are tracked for reporting only, decisions ignore them
        q = queue_update(q, x, inst.constraints)
        xs[t] = x
        gammas[t + 1] = gamma
        queues[t + 1] = q.q
    return xs, gammas, queues


def run_frank_wolfe(
    inst: ProblemInstance, T: int, steps: str = HARMONIC, eta: float = None, seed: int = 0
) -> RunResult:
    """
    Minimizes f over the achievable-mean polytope, ignoring the linear
    constraints: x_t = lmo(X_{S[t]}, grad f(gamma_{t-1})).
    """
    if steps == FIXED and (eta is None or not 0 < eta <= 1):
        raise ContractViolation(f"Fixed steps need eta in (0, 1], got {eta}")
    start = time.perf_counter()
    states = sample_states(inst, seed, T)
    xs, gammas, queues = _frank_wolfe_loop(inst, states, inst.objective.gradient, steps, eta)
    trace = RunTrace(xs, gammas, queues, states, draw_alpha(seed, T))
    return RunResult.from_trace(inst, trace, time.perf_counter() - start)


def tracking_trace(
    inst: ProblemInstance, target, T: int, seed: int = 0, replication: int = 0
) -> RunTrace:
    """
    Tracking phase: x_t = lmo(X_{S[t]}, gamma_{t-1} - target) with
    eta_t = 1/(t+1), on states drawn from the tracking stream of `seed`.
    """
    target = np.asarray(target, dtype=float)
    if target.shape != (inst.dimension,) or not np.all(np.isfinite(target)):
        raise ContractViolation(f"Tracking target must be a finite {inst.dimension}-vector")
    if T < 1:
        raise ContractViolation(f"Horizon T must be positive, got {T}")
    rng = rng_stream(seed, TRACKING_STREAM, replication)
    states = inst.state_model.sample(rng, T)
    xs, gammas, queues = _frank_wolfe_loop(
        inst, states, lambda gamma: gamma - target, HARMONIC, None
    )
    trace = RunTrace(xs, gammas, queues, states)

    running_average = np.cumsum(xs, axis=0) / np.arange(1, T + 1)[:, None]
    error = np.max(np.abs(running_average - gammas[1:]))
    if error > IDENTITY_SLACK:
        raise PropertyFailure(
            f"Tracking iterates deviate from the running average by {error:.3g}"
        )
    return trace


def run_tracking_fw(
    inst: ProblemInstance, target, T: int, seed: int = 0, replication: int = 0
) -> np.ndarray:
    """Returns the time average x_bar_T of the tracking phase"""
    return tracking_trace(inst, target, T, seed, replication).x_bar
