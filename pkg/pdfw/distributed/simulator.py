"""
Synchronous simulator of the distributed algorithm
--------------------------------------------------
In every round t each node i

1. observes its state and picks x^(i)_t = lmo(X^(i)_t, V grad_gamma f^(i)(gamma_{t-1}, beta_{t-1}))
2. picks theta^(i)_t in Theta minimizing
   V <grad_theta f^(i)(gamma_{t-1}, beta_{t-1}), theta> + sum_j <Q_ij(t) - Q_ji(t), theta>
   using only the queues it shares with its neighbors (received last round)
3. averages gamma^(i)_t = (1-eta) gamma^(i)_{t-1} + eta x^(i)_t and
   beta^(i)_t = (1-eta) beta^(i)_{t-1} + eta theta^(i)_t.

After a round barrier every edge queue is updated,
Q_ij(t+1) = max(Q_ij(t) + theta^(i)_t - theta^(j)_t, 0). A common output
index alpha is drawn once for all nodes.

`stack_instance` writes the same problem as one centralized instance; a
centralized PDFW run on it reproduces the distributed trace exactly.
"""

import time
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from pdfw.common import ContractViolation
from pdfw.core.oracle import lmo
from pdfw.core.types import (
    STATE_STREAM,
    AlgoConfig,
    DecisionSet,
    LinearConstraints,
    ProblemInstance,
    RunTrace,
    StateModel,
    rng_stream,
)
from pdfw.algorithms.result import draw_alpha
from pdfw.distributed.graph import GraphTopology
from pdfw.distributed.nodes import NodeSpec, NodeState, StackedObjective


#######################
# Edge queues
#######################


class EdgeQueues:
    """Q_ij(t) in R^p_{>=0} for every ordered neighbor pair (i, j)"""

    def __init__(self, graph: GraphTopology, values: Dict[Tuple[int, int], np.ndarray]):
        self.graph = graph
        self.values = values

    @classmethod
    def zeros(cls, graph: GraphTopology, p: int) -> "EdgeQueues":
        return cls(graph, {pair: np.zeros(p) for pair in graph.ordered_pairs})

    def __getitem__(self, pair) -> np.ndarray:
        return self.values[pair]

    def messages(self, i: int) -> Dict[int, Tuple[np.ndarray, np.ndarray]]:
        """What node i may see: (Q_ij, Q_ji) for each neighbor j"""
        return {j: (self.values[(i, j)], self.values[(j, i)]) for j in self.graph.neighbors(i)}

    def updated(self, thetas: List[np.ndarray]) -> "EdgeQueues":
        return EdgeQueues(
            self.graph,
            {
                (i, j): edge_queue_update(Q, thetas[i], thetas[j])
                for (i, j), Q in self.values.items()
            },
        )

    def as_vector(self) -> np.ndarray:
        """All queues in the row order of the stacked instance"""
        if not self.values:
            return np.zeros(0)
        return np.concatenate([self.values[pair] for pair in self.graph.ordered_pairs])


def edge_queue_update(Q_ij: np.ndarray, theta_i: np.ndarray, theta_j: np.ndarray) -> np.ndarray:
    """Q_ij' = max(Q_ij + theta_i - theta_j, 0) entrywise"""
    return np.maximum(Q_ij + (theta_i - theta_j), 0.0)


#######################
# Node steps
#######################


def node_step_x(
    node: NodeState, gamma_prev, beta_prev, state_index: int, V: float = 1.0
) -> np.ndarray:
    """Decision of node i for the state it observes in this slot"""
    grad = node.spec.objective.gradient_gamma(gamma_prev, beta_prev)
    return lmo(node.spec.decision_sets[state_index], V * grad)


def node_step_theta(
    node: NodeState,
    index: int,
    beta_prev,
    gamma_prev,
    messages: Dict[int, Tuple[np.ndarray, np.ndarray]],
    V: float,
) -> np.ndarray:
    """
    Local copy of the shared variable for node `index`.

    `messages` maps each neighbor j to (Q_ij, Q_ji); it is the only
    information about the rest of the network available to the node.
    Queue terms are added in lexicographic pair order.
    """
    cost = V * node.spec.objective.gradient_theta(gamma_prev, beta_prev)
    neighbors = sorted(messages)
    for j in neighbors:
        if j < index:
            cost = cost - messages[j][1]
    for j in neighbors:
        cost = cost + messages[j][0]
    for j in neighbors:
        if j > index:
            cost = cost - messages[j][1]
    return lmo(node.spec.theta_set, cost)


#######################
# Full run
#######################


@dataclass
class DistributedResult:
    """
    Attributes:
        gammas (list of ndarray): per node, (T+1) x d_i history with gamma_{-1} first
        betas (list of ndarray): per node, (T+1) x p history with beta_{-1} first
        xs, thetas (list of ndarray): per node, T x d_i and T x p decisions
        queues (ndarray): (T+1) x (n_pairs * p) edge queues in stacked row order
        states (ndarray): joint state index per slot
        alpha (int): common output index in {-1, ..., T-2}
    """

    graph: GraphTopology
    gammas: List[np.ndarray]
    betas: List[np.ndarray]
    xs: List[np.ndarray]
    thetas: List[np.ndarray]
    queues: np.ndarray
    states: np.ndarray
    alpha: int
    wallclock: float

    @property
    def gamma_alpha(self) -> List[np.ndarray]:
        return [g[self.alpha + 1] for g in self.gammas]

    @property
    def beta_alpha(self) -> List[np.ndarray]:
        return [b[self.alpha + 1] for b in self.betas]

    @property
    def consensus_residual(self) -> float:
        """max over node pairs of |beta^(i)_alpha - beta^(j)_alpha| (entrywise)"""
        betas = np.array(self.beta_alpha)
        return float(np.max(betas.max(axis=0) - betas.min(axis=0)))

    def edge_queue(self, i: int, j: int) -> np.ndarray:
        """History of Q_ij, (T+1) x p"""
        p = self.betas[0].shape[1]
        row = self.graph.ordered_pairs.index((i, j))
        return self.queues[:, row * p : (row + 1) * p]

    def stacked_trace(self) -> RunTrace:
        """The run as a trace of the stacked centralized instance"""
        xs = np.hstack([part for x, th in zip(self.xs, self.thetas) for part in (x, th)])
        gammas = np.hstack([part for g, b in zip(self.gammas, self.betas) for part in (g, b)])
        return RunTrace(xs, gammas, self.queues, self.states, self.alpha)


def joint_state_model(nodes: List[NodeSpec]) -> StateModel:
    return StateModel.product([node.state_model for node in nodes])


def run_distributed(graph: GraphTopology, nodes: List[NodeSpec], cfg: AlgoConfig) -> DistributedResult:
    if len(nodes) != graph.K:
        raise ContractViolation(f"{len(nodes)} nodes for a graph with {graph.K} nodes")
    p = nodes[0].p
    if any(node.p != p for node in nodes):
        raise ContractViolation("All nodes must share the dimension p of the shared variable")

    start = time.perf_counter()
    T, V, eta = cfg.T, cfg.V_eff, cfg.eta_eff
    joint = joint_state_model(nodes)
    states = joint.sample(rng_stream(cfg.seed, STATE_STREAM), T)
    node_states = np.unravel_index(states, joint.components)

    K = graph.K
    current = [NodeState.initial(node) for node in nodes]
    queues = EdgeQueues.zeros(graph, p)
    gammas = [np.zeros((T + 1, node.d)) for node in nodes]
    betas = [np.zeros((T + 1, p)) for _ in nodes]
    xs = [np.empty((T, node.d)) for node in nodes]
    thetas = [np.empty((T, p)) for _ in nodes]
    queue_history = np.zeros((T + 1, len(graph.ordered_pairs) * p))

    for t in range(T):
        # Steps 1 and 2 only read the previous round
        decisions = [
            node_step_x(current[i], current[i].gamma, current[i].beta, node_states[i][t], V)
            for i in range(K)
        ]
        shared = [
            node_step_theta(current[i], i, current[i].beta, current[i].gamma, queues.messages(i), V)
            for i in range(K)
        ]
        # Round barrier
        for i in range(K):
            current[i].gamma = (1 - eta) * current[i].gamma + eta * decisions[i]
            current[i].beta = (1 - eta) * current[i].beta + eta * shared[i]
            xs[i][t] = decisions[i]
            thetas[i][t] = shared[i]
            gammas[i][t + 1] = current[i].gamma
            betas[i][t + 1] = current[i].beta
        queues = queues.updated(shared)
        queue_history[t + 1] = queues.as_vector()

    return DistributedResult(
        graph,
        gammas,
        betas,
        xs,
        thetas,
        queue_history,
        states,
        draw_alpha(cfg.seed, T),
        time.perf_counter() - start,
    )


#######################
# Stacked centralized form
#######################


def consensus_constraints(graph: GraphTopology, nodes: List[NodeSpec]) -> LinearConstraints:
    """theta^(i) - theta^(j) <= 0 per ordered neighbor pair and coordinate"""
    p = nodes[0].p
    offsets = np.cumsum([0] + [node.d + node.p for node in nodes])
    rows = []
    for i, j in graph.ordered_pairs:
        for l in range(p):
            row = np.zeros(offsets[-1])
            row[offsets[i] + nodes[i].d + l] = 1.0
            row[offsets[j] + nodes[j].d + l] = -1.0
            rows.append(row)
    A = np.array(rows) if rows else np.zeros((0, offsets[-1]))
    return LinearConstraints(A, np.zeros(len(rows)))


def stack_instance(graph: GraphTopology, nodes: List[NodeSpec], name: str = "stacked") -> ProblemInstance:
    """
    The distributed problem as one centralized instance over the stacked
    vector (gamma^(1), theta^(1), ..., gamma^(K), theta^(K)) with the joint
    state of all nodes.
    """
    joint = joint_state_model(nodes)
    decision_sets = []
    for index in range(joint.n_states):
        components = joint.decode(index)
        decision_sets.append(
            DecisionSet.product(
                [
                    DecisionSet.product([node.decision_sets[s], node.theta_set])
                    for node, s in zip(nodes, components)
                ]
            )
        )
    return ProblemInstance(
        joint,
        decision_sets,
        StackedObjective([node.objective for node in nodes]),
        consensus_constraints(graph, nodes),
        name=name,
    )
