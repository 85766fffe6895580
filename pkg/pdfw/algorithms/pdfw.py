"""
Primal-dual Frank-Wolfe runner and the primal-dual gradient baseline, which
is the same algorithm with V = 1/beta and eta = beta.
"""

import time

import numpy as np

from pdfw.common import ContractViolation
from pdfw.core.oracle import pdfw_step
from pdfw.core.types import (
    STATE_STREAM,
    AlgoConfig,
    ProblemInstance,
    QueueState,
    RunTrace,
    rng_stream,
)
from pdfw.algorithms.result import RunResult, draw_alpha


def sample_states(inst: ProblemInstance, seed, T: int) -> np.ndarray:
    return inst.state_model.sample(rng_stream(seed, STATE_STREAM), T)


def run_pdfw(inst: ProblemInstance, cfg: AlgoConfig) -> RunResult:
    """
    Runs T slots (t = 0..T-1) from gamma_{-1} = 0 and Q(0) = 0. In each slot
    the decision minimizes V <grad f(gamma_{t-1}), x> + sum_i Q_i(t) <a_i, x>
    over the current decision set.
    """
    start = time.perf_counter()
    T, d, N = cfg.T, inst.dimension, inst.constraints.N
    states = sample_states(inst, cfg.seed, T)

    xs = np.empty((T, d))
    gammas = np.zeros((T + 1, d))
    queues = np.zeros((T + 1, N))
    gamma = np.zeros(d)
    q = QueueState.zeros(N)
    for t, state in enumerate(states):
        x, gamma, q = pdfw_step(inst, cfg, gamma, q, state)
        xs[t] = x
        gammas[t + 1] = gamma
        queues[t + 1] = q.q

    trace = RunTrace(xs, gammas, queues, states, draw_alpha(cfg.seed, T))
    return RunResult.from_trace(inst, trace, time.perf_counter() - start)


def run_pd_gradient(inst: ProblemInstance, beta: float, T: int, seed: int = 0) -> RunResult:
    """Primal-dual gradient method with step beta, run as PDFW(V=1/beta, eta=beta)"""
    if not 0 < beta < 1:
        raise ContractViolation(f"beta must lie in (0, 1), got {beta}")
    return run_pdfw(inst, AlgoConfig(T=T, V=1 / beta, eta=beta, seed=seed))
