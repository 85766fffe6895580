"""
Nodes of the distributed problem. Node i owns decisions gamma^(i) in R^{d_i},
a local copy theta^(i) of the shared variable, restricted to the box Theta,
and a local objective f^(i)(gamma^(i), theta^(i)).
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from pdfw.common import ContractViolation
from pdfw.core.types import DecisionSet, Objective, StateModel
from pdfw.problems.objectives import CoupledLocalObjective, SigmoidalUtility


@dataclass(frozen=True)
class NodeSpec:
    """
    Args:
        state_model (StateModel): the node's own i.i.d. state
        decision_sets (tuple of DecisionSet): per-state sets in R^{d_i}
        objective (CoupledLocalObjective): f^(i) over (gamma, theta)
        theta_lower, theta_upper (ndarray): the box Theta in R^p
    """

    state_model: StateModel
    decision_sets: Tuple[DecisionSet, ...]
    objective: CoupledLocalObjective
    theta_lower: np.ndarray
    theta_upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "decision_sets", tuple(self.decision_sets))
        theta_set = DecisionSet.box(self.theta_lower, self.theta_upper)
        object.__setattr__(self, "theta_set", theta_set)
        if len(self.decision_sets) != self.state_model.n_states:
            raise ContractViolation("One decision set per node state is required")
        for decision_set in self.decision_sets:
            if decision_set.dimension != self.objective.d:
                raise ContractViolation(
                    f"Node decision set of dimension {decision_set.dimension}, objective expects {self.objective.d}"
                )
        if theta_set.dimension != self.objective.p:
            raise ContractViolation("Theta box and objective disagree on p")
        if np.any(theta_set.lower > 0) or np.any(theta_set.upper < 0):
            raise ContractViolation("Theta must contain the origin")

    @property
    def d(self) -> int:
        return self.objective.d

    @property
    def p(self) -> int:
        return self.objective.p


@dataclass
class NodeState:
    """Mutable per-node iterate: gamma^(i)_t and the averaged copy beta^(i)_t"""

    spec: NodeSpec
    gamma: np.ndarray
    beta: np.ndarray

    @classmethod
    def initial(cls, spec: NodeSpec) -> "NodeState":
        return cls(spec, np.zeros(spec.d), np.zeros(spec.p))


class StackedObjective(Objective):
    """Sum of block objectives, each acting on its own slice of the stacked vector"""

    def __init__(self, blocks: List[Objective]):
        self.blocks = list(blocks)
        self.sizes = [block.dimension for block in self.blocks]
        self.offsets = np.cumsum([0] + self.sizes)
        self.dimension = int(self.offsets[-1])
        # Block-diagonal Hessian
        self.smoothness = float(max(block.smoothness for block in self.blocks))
        self.convex = all(block.convex for block in self.blocks)

    def parts(self, z):
        return [z[start:stop] for start, stop in zip(self.offsets[:-1], self.offsets[1:])]

    def value(self, z):
        return float(sum(block.value(part) for block, part in zip(self.blocks, self.parts(z))))

    def gradient(self, z):
        return np.concatenate(
            [block.gradient(part) for block, part in zip(self.blocks, self.parts(z))]
        )

    def box_bounds(self, lower, upper):
        bounds = [
            block.box_bounds(lo, hi)
            for block, lo, hi in zip(self.blocks, self.parts(lower), self.parts(upper))
        ]
        return (
            float(np.sqrt(sum(M**2 for M, _ in bounds))),
            float(sum(K for _, K in bounds)),
        )


def make_consensus_nodes(
    K: int,
    d: int = 1,
    n_states: int = 2,
    p: int = 1,
    seed: int = 0,
    theta_lower: float = 0.0,
    theta_upper: float = 1.0,
    weight: float = 1.0,
    coupling: float = 0.5,
    identical: bool = False,
) -> List[NodeSpec]:
    """
    Scheduling nodes sharing a p-dimensional variable: node i serves its d
    users with the sigmoidal utility, prefers the shared value tau_i and
    couples its mean throughput with the shared variable.

    With `identical=True` every node gets the same draw.
    """
    nodes = []
    for i in range(K):
        rng = np.random.Generator(np.random.PCG64([seed, 0 if identical else i]))
        probabilities = rng.dirichlet(np.ones(n_states))
        decision_sets = [
            DecisionSet.finite(np.vstack([np.zeros(d), np.diag(rng.uniform(0.2, 1.0, size=d))]))
            for _ in range(n_states)
        ]
        target = rng.uniform(theta_lower, theta_upper, size=p)
        objective = CoupledLocalObjective(
            SigmoidalUtility(dimension=d), target, weight=weight, coupling=coupling
        )
        nodes.append(
            NodeSpec(
                StateModel(probabilities / probabilities.sum()),
                decision_sets,
                objective,
                np.full(p, theta_lower, dtype=float),
                np.full(p, theta_upper, dtype=float),
            )
        )
    return nodes
