"""
Per-slot operations of the primal-dual Frank-Wolfe algorithm: the linear
minimization oracle over a decision set, the virtual-queue update, the
queue-weighted cost vector and the complete single-slot step.
"""

from typing import Tuple

import numpy as np

from pdfw.common import ContractViolation
from pdfw.core.types import (
    BOX,
    FINITE_VERTICES,
    PRODUCT,
    SIMPLEX,
    AlgoConfig,
    DecisionSet,
    LinearConstraints,
    ProblemInstance,
    QueueState,
)


def lmo(decision_set: DecisionSet, cost: np.ndarray) -> np.ndarray:
    """
    Returns a minimizer of <cost, x> over the decision set.

    Ties are broken deterministically: lowest vertex index for finite sets,
    the lower corner for zero box costs, the first minimal coordinate for
    the simplex.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.shape != (decision_set.dimension,):
        raise ContractViolation(
            f"Cost of shape {cost.shape} for a decision set of dimension {decision_set.dimension}"
        )
    if not np.all(np.isfinite(cost)):
        raise ContractViolation(f"Cost vector must be finite, got {cost}")
    return _lmo(decision_set, cost)


def _lmo(decision_set: DecisionSet, cost: np.ndarray) -> np.ndarray:
    kind = decision_set.kind
    if kind == FINITE_VERTICES:
        return decision_set.vertices[int(np.argmin(decision_set.vertices @ cost))].copy()
    elif kind == BOX:
        return np.where(cost < 0, decision_set.upper, decision_set.lower)
    elif kind == SIMPLEX:
        x = np.zeros(decision_set.dimension)
        x[int(np.argmin(cost))] = decision_set.scale
        return x
    elif kind == PRODUCT:
        parts, start = [], 0
        for block in decision_set.blocks:
            parts.append(_lmo(block, cost[start : start + block.dimension]))
            start += block.dimension
        return np.concatenate(parts)
    else:
        raise NotImplementedError(f"Decision set kind `{kind}` not implemented")


def decision_vertices(decision_set: DecisionSet) -> np.ndarray:
    """Finite generator list of a decision set (vertices, corners or products)"""
    return decision_set.generators()


def ambient_generators(inst: ProblemInstance) -> np.ndarray:
    return inst.ambient_generators()


def queue_update(
    q: QueueState, x: np.ndarray, constraints: LinearConstraints
) -> QueueState:
    """Q_i(t+1) = max(Q_i(t) + <a_i, x> - b_i, 0)"""
    if constraints.N == 0:
        return QueueState(np.zeros(0))
    return QueueState(np.maximum(q.q + (constraints.A @ x - constraints.b), 0.0))


def pdfw_cost(
    V: float, grad: np.ndarray, q: QueueState, constraints: LinearConstraints
) -> np.ndarray:
    """
    Cost vector V * grad + A^T q of the per-slot linear subproblem.

    The queue term is accumulated row by row in constraint order, so the
    result does not depend on the BLAS summation order. The distributed
    simulator relies on this to reproduce centralized traces exactly.
    """
    grad = np.asarray(grad, dtype=float)
    if grad.shape != (constraints.dimension,) or q.q.shape != (constraints.N,):
        raise ContractViolation(
            f"Gradient of shape {grad.shape} and queues of shape {q.q.shape} "
            f"do not match constraints of shape {constraints.A.shape}"
        )
    cost = V * grad
    for i in np.flatnonzero(q.q):
        cost += q.q[i] * constraints.A[i]
    return cost


def pdfw_step(
    inst: ProblemInstance,
    cfg: AlgoConfig,
    gamma_prev: np.ndarray,
    q: QueueState,
    state_index: int,
) -> Tuple[np.ndarray, np.ndarray, QueueState]:
    """
    One slot of the algorithm: observe the state, solve the linear
    subproblem, then update the running average and the virtual queues.

    Returns:
        (x_t, gamma_t, Q(t+1))
    """
    cost = pdfw_cost(
        cfg.V_eff, inst.objective.gradient(gamma_prev), q, inst.constraints
    )
    x = lmo(inst.decision_sets[state_index], cost)
    gamma_next = (1 - cfg.eta_eff) * gamma_prev + cfg.eta_eff * x
    q_next = queue_update(q, x, inst.constraints)
    return x, gamma_next, q_next
