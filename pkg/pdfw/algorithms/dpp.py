"""
Drift-plus-penalty baseline: per slot, minimize V f(x) + <Q(t), A x - b>
over the (finite) decision set. Unlike PDFW it needs f itself, not only its
gradient, and solves the nonlinear per-slot problem by enumeration.
"""

import time

import numpy as np

from pdfw.common import UnsupportedInstance
from pdfw.core.oracle import decision_vertices, queue_update
from pdfw.core.types import AlgoConfig, ProblemInstance, QueueState, RunTrace
from pdfw.algorithms.pdfw import sample_states
from pdfw.algorithms.result import RunResult, draw_alpha


def run_dpp(inst: ProblemInstance, cfg: AlgoConfig) -> RunResult:
    if not inst.is_finite:
        raise UnsupportedInstance(
            f"Drift-plus-penalty needs finite decision sets, `{inst.name}` has continuous ones"
        )
    start = time.perf_counter()
    T, d, N = cfg.T, inst.dimension, inst.constraints.N
    V, eta = cfg.V_eff, cfg.eta_eff
    constraints = inst.constraints

    # f and the constraint residuals of each vertex do not change over time
    vertices = [decision_vertices(s) for s in inst.decision_sets]
    penalties = [V * np.array([inst.objective.value(v) for v in vs]) for vs in vertices]
    residuals = [vs @ constraints.A.T - constraints.b for vs in vertices]

    states = sample_states(inst, cfg.seed, T)
    xs = np.empty((T, d))
    gammas = np.zeros((T + 1, d))
    queues = np.zeros((T + 1, N))
    gamma = np.zeros(d)
    q = QueueState.zeros(N)
    for t, state in enumerate(states):
        k = int(np.argmin(penalties[state] + residuals[state] @ q.q))
        x = vertices[state][k]
        q = queue_update(q, x, constraints)
        gamma = (1 - eta) * gamma + eta * x
        xs[t] = x
        gammas[t + 1] = gamma
        queues[t + 1] = q.q

    trace = RunTrace(xs, gammas, queues, states, draw_alpha(cfg.seed, T))
    return RunResult.from_trace(inst, trace, time.perf_counter() - start)
