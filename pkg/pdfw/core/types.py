"""
Domain types of the primal-dual Frank-Wolfe (PDFW) framework
--------------------------------------------------------------
A problem consists of an i.i.d. state process, one decision set per state,
a smooth objective and a set of linear constraints on the achievable mean.
All types are immutable after construction so that one instance can be
shared between many concurrent runs; each run owns its own `RunTrace`.
"""

import itertools
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from pdfw.common import ContractViolation


#######################
# States
#######################


@dataclass(frozen=True)
class StateModel:
    """
    Finite i.i.d. state process.

    States are drawn by inverse-CDF sampling: a uniform number u in [0, 1)
    from a `numpy.random.Generator(PCG64(seed))` selects the first state whose
    cumulative probability exceeds u.

    Args:
        probabilities (Sequence[float]): probability of each state (sums to 1)
        states (Sequence, optional): state identifiers. Defaults to 0..n-1.
        components (tuple, optional): sizes of the component state spaces when
            this model is the product of independent models (see `product`)
    """

    probabilities: np.ndarray
    states: Optional[tuple] = None
    components: Optional[tuple] = None

    def __post_init__(self):
        probabilities = np.asarray(self.probabilities, dtype=float).reshape(-1)
        if probabilities.size == 0:
            raise ContractViolation("A state model needs at least one state")
        if np.any(probabilities < 0) or abs(probabilities.sum() - 1.0) > 1e-12:
            raise ContractViolation(
                f"State probabilities must be nonnegative and sum to 1, got {probabilities}"
            )
        states = (
            tuple(range(len(probabilities)))
            if self.states is None
            else tuple(self.states)
        )
        if len(states) != len(probabilities):
            raise ContractViolation("Number of states and probabilities differ")
        cdf = np.cumsum(probabilities)
        cdf[-1] = 1.0
        object.__setattr__(self, "probabilities", probabilities)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "_cdf", cdf)

    @property
    def n_states(self) -> int:
        return len(self.probabilities)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draws `size` i.i.d. state indices using the inverse CDF"""
        uniforms = rng.random(size)
        indices = np.searchsorted(self._cdf, uniforms, side="right")
        return np.minimum(indices, self.n_states - 1)

    def sampler(self, seed) -> "StateSampler":
        return StateSampler(self, seed)

    def decode(self, index: int) -> tuple:
        """Component indices of a joint state (product models only)"""
        if self.components is None:
            return (int(index),)
        return tuple(int(i) for i in np.unravel_index(int(index), self.components))

    @classmethod
    def deterministic(cls) -> "StateModel":
        return cls(np.array([1.0]))

    @classmethod
    def uniform(cls, n_states: int) -> "StateModel":
        return cls(np.full(n_states, 1.0 / n_states))

    @classmethod
    def product(cls, models: Sequence["StateModel"]) -> "StateModel":
        """Joint state of independent components, indexed in C order"""
        probabilities = np.array([1.0])
        for model in models:
            probabilities = np.outer(probabilities, model.probabilities).reshape(-1)
        probabilities = probabilities / probabilities.sum()
        states = tuple(itertools.product(*[model.states for model in models]))
        components = tuple(model.n_states for model in models)
        return cls(probabilities, states, components)


#######################
# Random streams
#######################

STATE_STREAM = 0
ALPHA_STREAM = 1
TRACKING_STREAM = 2


def rng_stream(seed, stream: int, replication: Optional[int] = None) -> np.random.Generator:
    """
    Independent PCG64 stream `stream` of a run seed: 0 draws the states,
    1 the output index alpha and 2 the states of a tracking phase.
    """
    key = (stream,) if replication is None else (stream, replication)
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key))
    )


class StateSampler:
    """Seeded per-slot state draws, identical to the states of a run with the same seed"""

    def __init__(self, model: StateModel, seed):
        self.model = model
        self.rng = rng_stream(seed, STATE_STREAM)

    def draw(self) -> int:
        return int(self.model.sample(self.rng, 1)[0])

    def draw_sequence(self, size: int) -> np.ndarray:
        return self.model.sample(self.rng, size)


#######################
# Decision sets
#######################

FINITE_VERTICES = "FiniteVertices"
BOX = "Box"
SIMPLEX = "Simplex"
PRODUCT = "Product"


@dataclass(frozen=True)
class DecisionSet:
    """
    Decision set X_s available in one state.

    Use the constructors `finite`, `box`, `simplex` and `product` rather
    than the raw dataclass.
    """

    kind: str
    vertices: Optional[np.ndarray] = None
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    scale: Optional[float] = None
    dimension: Optional[int] = None
    blocks: Tuple["DecisionSet", ...] = field(default_factory=tuple)

    @classmethod
    def finite(cls, vertices) -> "DecisionSet":
        vertices = np.atleast_2d(np.asarray(vertices, dtype=float))
        if vertices.shape[0] == 0:
            raise ContractViolation("A finite decision set needs at least one vertex")
        if not np.all(np.isfinite(vertices)):
            raise ContractViolation("Decision vertices must be finite")
        # Deduplicate, keeping the first occurrence so that tie-breaking
        # by lowest index is unaffected
        unique = []
        for vertex in vertices:
            if not any(np.array_equal(vertex, other) for other in unique):
                unique.append(vertex)
        vertices = np.array(unique)
        vertices.setflags(write=False)
        return cls(FINITE_VERTICES, vertices=vertices, dimension=vertices.shape[1])

    @classmethod
    def box(cls, lower, upper) -> "DecisionSet":
        lower = np.asarray(lower, dtype=float).reshape(-1)
        upper = np.asarray(upper, dtype=float).reshape(-1)
        if lower.shape != upper.shape or np.any(lower > upper):
            raise ContractViolation(f"Invalid box [{lower}, {upper}]")
        return cls(BOX, lower=lower, upper=upper, dimension=len(lower))

    @classmethod
    def simplex(cls, dimension: int, scale: float = 1.0) -> "DecisionSet":
        if dimension < 1 or scale < 0:
            raise ContractViolation("Simplex needs dimension >= 1 and scale >= 0")
        return cls(SIMPLEX, scale=float(scale), dimension=int(dimension))

    @classmethod
    def product(cls, blocks: Sequence["DecisionSet"]) -> "DecisionSet":
        blocks = tuple(blocks)
        if not blocks:
            raise ContractViolation("A product set needs at least one block")
        return cls(PRODUCT, blocks=blocks, dimension=sum(b.dimension for b in blocks))

    @property
    def is_finite(self) -> bool:
        if self.kind == PRODUCT:
            return all(block.is_finite for block in self.blocks)
        return self.kind == FINITE_VERTICES

    def generators(self) -> np.ndarray:
        """Finite list of points whose convex hull is conv(X_s)"""
        if self.kind == FINITE_VERTICES:
            return np.array(self.vertices)
        if self.kind == BOX:
            return np.array(list(itertools.product(*zip(self.lower, self.upper))))
        if self.kind == SIMPLEX:
            return self.scale * np.eye(self.dimension)
        return np.array(
            [
                np.concatenate(parts)
                for parts in itertools.product(
                    *[block.generators() for block in self.blocks]
                )
            ]
        )


#######################
# Objective
#######################


class Objective(ABC):
    """
    Smooth objective f with L-Lipschitz gradient.

    Subclasses implement `value` and `gradient`, and preferably `box_bounds`,
    which gives closed-form bounds (M, K) on sup||grad f|| and sup|f| over a box.

    Attributes:
        dimension (int): d
        smoothness (float): L
        convex (bool): whether f is convex
    """

    dimension: int
    smoothness: float
    convex: bool

    @abstractmethod
    def value(self, gamma: np.ndarray) -> float:
        pass

    @abstractmethod
    def gradient(self, gamma: np.ndarray) -> np.ndarray:
        pass

    def box_bounds(self, lower: np.ndarray, upper: np.ndarray) -> Tuple[float, float]:
        raise NotImplementedError(
            f"{type(self).__name__} has no closed-form bounds on a box"
        )

    def __call__(self, gamma):
        return self.value(gamma)


#######################
# Constraints and queues
#######################


@dataclass(frozen=True)
class LinearConstraints:
    """Constraints <a_i, gamma> <= b_i, stored as an N x d matrix A and N-vector b"""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float).reshape(-1)
        A = np.asarray(self.A, dtype=float)
        if A.ndim == 1 and len(b) == 0:
            A = A.reshape(0, A.size)
        if A.ndim != 2 or A.shape[0] != len(b):
            raise ContractViolation(
                f"Constraint matrix of shape {A.shape} does not match b of length {len(b)}"
            )
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ContractViolation("Constraint rows must be finite")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @classmethod
    def none(cls, dimension: int) -> "LinearConstraints":
        return cls(np.zeros((0, dimension)), np.zeros(0))

    @property
    def N(self) -> int:
        return self.A.shape[0]

    @property
    def dimension(self) -> int:
        return self.A.shape[1]

    @property
    def a_norms(self) -> np.ndarray:
        return np.linalg.norm(self.A, axis=1)

    def residuals(self, x: np.ndarray) -> np.ndarray:
        return self.A @ x - self.b


@dataclass(frozen=True)
class QueueState:
    """Nonnegative virtual queue vector Q(t)"""

    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).reshape(-1)
        if np.any(q < 0):
            raise ContractViolation(f"Virtual queues must be nonnegative, got {q}")
        object.__setattr__(self, "q", q)

    @classmethod
    def zeros(cls, N: int) -> "QueueState":
        return cls(np.zeros(N))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.q))


#######################
# Problem instance
#######################


@dataclass(frozen=True)
class ProblemInstance:
    """
    Immutable description of a constrained stochastic program:

        min f(gamma)  s.t.  gamma in the achievable-mean polytope,  A gamma <= b

    Args:
        state_model (StateModel)
        decision_sets (Sequence[DecisionSet]): one decision set per state index
        objective (Objective)
        constraints (LinearConstraints)
        bounds (BoundConstants, optional): filled in by `diagnostics.compute_bounds`
        name (str, optional)
        certificates (dict, optional): verified certificates, e.g. the Slater
            certificate under "slater" and the reference optimum under "gamma_star"
    """

    state_model: StateModel
    decision_sets: Tuple[DecisionSet, ...]
    objective: Objective
    constraints: LinearConstraints
    bounds: Optional[object] = None
    name: str = "instance"
    certificates: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        decision_sets = tuple(self.decision_sets)
        object.__setattr__(self, "decision_sets", decision_sets)
        if len(decision_sets) != self.state_model.n_states:
            raise ContractViolation(
                f"{len(decision_sets)} decision sets for {self.state_model.n_states} states"
            )
        d = self.objective.dimension
        for decision_set in decision_sets:
            if decision_set.dimension != d:
                raise ContractViolation(
                    f"Decision set of dimension {decision_set.dimension} for objective of dimension {d}"
                )
        if self.constraints.dimension != d:
            raise ContractViolation(
                f"Constraints of dimension {self.constraints.dimension} for objective of dimension {d}"
            )

        # 0 must be an achievable mean (gamma_{-1} = 0 starts inside the polytope)
        from pdfw.diagnostics.polytope import MixturePolytope, membership

        if not membership(MixturePolytope.from_instance(self), np.zeros(d)):
            raise ContractViolation("The origin is not in the achievable-mean polytope")

    @property
    def dimension(self) -> int:
        return self.objective.dimension

    @property
    def is_finite(self) -> bool:
        return all(decision_set.is_finite for decision_set in self.decision_sets)

    def ambient_generators(self) -> np.ndarray:
        """Generators of the ambient hull B: the origin and every decision vertex"""
        points = [np.zeros((1, self.dimension))]
        points.extend(decision_set.generators() for decision_set in self.decision_sets)
        return np.unique(np.vstack(points), axis=0)

    def with_bounds(self, bounds) -> "ProblemInstance":
        # Bypass validation: only the bounds change
        copy = object.__new__(ProblemInstance)
        for name in self.__dataclass_fields__:
            object.__setattr__(copy, name, getattr(self, name))
        object.__setattr__(copy, "bounds", bounds)
        return copy


#######################
# Algorithm configuration
#######################

FIXED = "Fixed"
CUBE_ROOT = "CubeRoot"
SQUARE_ROOT = "SquareRoot"
SCHEDULES = (FIXED, CUBE_ROOT, SQUARE_ROOT)


@dataclass(frozen=True)
class AlgoConfig:
    """
    Algorithm parameters.

    With the `CubeRoot` schedule V = T^(1/3) and eta = T^(-2/3); with
    `SquareRoot` V = T^(1/2) and eta = T^(-1/2). These override `V` and `eta`.
    The effective values are available as `V_eff` and `eta_eff`.
    """

    T: int
    V: float = 1.0
    eta: float = 0.5
    seed: int = 0
    schedule: str = FIXED

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 1:
            raise ContractViolation(f"Horizon T must be a positive integer, got {self.T}")
        if self.schedule not in SCHEDULES:
            raise NotImplementedError(f"Schedule `{self.schedule}` not implemented")
        if self.schedule == FIXED:
            if not 0 < self.eta < 1:
                raise ContractViolation(f"eta must lie in (0, 1), got {self.eta}")
            if not self.V > 0:
                raise ContractViolation(f"V must be positive, got {self.V}")
            V_eff, eta_eff = float(self.V), float(self.eta)
        elif self.schedule == CUBE_ROOT:
            V_eff, eta_eff = self.T ** (1 / 3), self.T ** (-2 / 3)
        else:
            V_eff, eta_eff = self.T**0.5, self.T**-0.5
        object.__setattr__(self, "V_eff", V_eff)
        object.__setattr__(self, "eta_eff", eta_eff)

    def replace(self, **changes) -> "AlgoConfig":
        values = {name: getattr(self, name) for name in self.__dataclass_fields__}
        values.update(changes)
        return AlgoConfig(**values)


#######################
# Run trace
#######################


@dataclass
class RunTrace:
    """
    Full per-slot history of a run over T slots.

    Attributes:
        xs (ndarray): T x d decisions x_0..x_{T-1}
        gammas (ndarray): (T+1) x d averages; row 0 holds gamma_{-1} = 0, so
            gamma_t is `gammas[t + 1]` (use `gamma(t)`)
        queues (ndarray): (T+1) x N queue vectors Q(0)..Q(T)
        states (ndarray): state index observed in each slot
        alpha (int): index in {-1, ..., T-2} of the randomized output
    """

    xs: np.ndarray
    gammas: np.ndarray
    queues: np.ndarray
    states: np.ndarray
    alpha: Optional[int] = None

    @property
    def T(self) -> int:
        return self.xs.shape[0]

    def gamma(self, t: int) -> np.ndarray:
        """gamma_t for t in {-1, 0, ..., T-1}"""
        if not -1 <= t <= self.T - 1:
            raise IndexError(f"gamma_{t} outside -1..{self.T - 1}")
        return self.gammas[t + 1]

    @property
    def x_bar(self) -> np.ndarray:
        return self.xs.mean(axis=0)

    @property
    def theta_bar(self) -> np.ndarray:
        """(1/T) sum_{t=0}^{T-1} gamma_{t-1}"""
        return self.gammas[:-1].mean(axis=0)

    @property
    def gamma_alpha(self) -> np.ndarray:
        if self.alpha is None:
            raise ValueError("No output index alpha was drawn for this trace")
        return self.gamma(self.alpha)

    @property
    def queue_norms(self) -> np.ndarray:
        return np.linalg.norm(self.queues, axis=1)

    def recursion_error(self, eta: float) -> float:
        """Largest deviation from gamma_t = (1 - eta) gamma_{t-1} + eta x_t"""
        replay = (1 - eta) * self.gammas[:-1] + eta * self.xs
        return float(np.max(np.abs(replay - self.gammas[1:]), initial=0.0))

    def queue_error(self, constraints: LinearConstraints) -> float:
        """Largest deviation from Q(t+1) = max(Q(t) + A x_t - b, 0)"""
        if constraints.N == 0:
            return 0.0
        replay = np.maximum(
            self.queues[:-1] + self.xs @ constraints.A.T - constraints.b, 0.0
        )
        return float(np.max(np.abs(replay - self.queues[1:]), initial=0.0))
