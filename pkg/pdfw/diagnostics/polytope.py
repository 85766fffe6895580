"""
Achievable-mean polytope
------------------------
The set of one-shot expectations of randomized stationary policies is the
probability-weighted Minkowski sum of the per-state convex hulls:

    { sum_s p_s sum_k w_{s,k} v_{s,k} : w_{s,.} a probability vector per state }

`MixturePolytope` stores this exactly. All queries below are answered with
`lp_solve` on the mixture weights w, or with a Frank-Wolfe engine that uses
the decomposed vertex oracle (per-state argmin, p-weighted sum).
"""

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from pdfw.common import logger, ContractViolation, InfeasibleRegion, UnsupportedInstance
from pdfw.diagnostics.lp import lp_solve, LPResult, OPTIMAL, INFEASIBLE

DIST_GAP = 1e-8
GAMMA_STAR_GAP = 1e-7
MAX_FW_ITERATIONS = 100_000


@dataclass(frozen=True)
class MixturePolytope:
    """
    Args:
        vertex_lists (tuple of ndarray): n_s x d vertex array per state
        probabilities (ndarray): p_s per state
    """

    vertex_lists: tuple
    probabilities: np.ndarray

    def __post_init__(self):
        vertex_lists = tuple(np.atleast_2d(np.asarray(v, dtype=float)) for v in self.vertex_lists)
        probabilities = np.asarray(self.probabilities, dtype=float).reshape(-1)
        if len(vertex_lists) != len(probabilities):
            raise ContractViolation("One vertex list per state is required")
        if len({v.shape[1] for v in vertex_lists}) != 1:
            raise ContractViolation("All vertex lists must share one dimension")
        object.__setattr__(self, "vertex_lists", vertex_lists)
        object.__setattr__(self, "probabilities", probabilities)

    @classmethod
    def from_instance(cls, inst) -> "MixturePolytope":
        return cls(
            tuple(decision_set.generators() for decision_set in inst.decision_sets),
            inst.state_model.probabilities,
        )

    @property
    def dimension(self) -> int:
        return self.vertex_lists[0].shape[1]

    @property
    def n_weights(self) -> int:
        return sum(len(v) for v in self.vertex_lists)

    def weight_matrix(self) -> np.ndarray:
        """d x n_weights matrix W with v(w) = W w"""
        return np.hstack(
            [p * v.T for p, v in zip(self.probabilities, self.vertex_lists)]
        )

    def simplex_rows(self) -> np.ndarray:
        """One row per state summing that state's weights"""
        rows = np.zeros((len(self.vertex_lists), self.n_weights))
        start = 0
        for s, v in enumerate(self.vertex_lists):
            rows[s, start : start + len(v)] = 1.0
            start += len(v)
        return rows

    def point(self, weights: np.ndarray) -> np.ndarray:
        return self.weight_matrix() @ weights

    def split_weights(self, weights: np.ndarray) -> list:
        """Per-state probability vectors from a flat weight vector"""
        parts, start = [], 0
        for v in self.vertex_lists:
            parts.append(np.asarray(weights[start : start + len(v)]))
            start += len(v)
        return parts

    def lmo(self, cost: np.ndarray) -> Tuple[np.ndarray, tuple]:
        """Decomposed vertex oracle: per-state argmin, lowest index on ties"""
        choice = tuple(int(np.argmin(v @ cost)) for v in self.vertex_lists)
        point = sum(
            p * v[k] for p, v, k in zip(self.probabilities, self.vertex_lists, choice)
        )
        return np.asarray(point, dtype=float), choice

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Random points of the polytope (Dirichlet weights per state)"""
        points = np.zeros((size, self.dimension))
        for p, v in zip(self.probabilities, self.vertex_lists):
            weights = rng.dirichlet(np.ones(len(v)), size=size)
            points += p * weights @ v
        return points


def feasible_lp(inst, poly: MixturePolytope, cost: np.ndarray) -> LPResult:
    """min <cost, v(w)> over the polytope intersected with {A v <= b}"""
    W = poly.weight_matrix()
    rows = poly.simplex_rows()
    A = np.vstack([rows, inst.constraints.A @ W])
    rhs = np.concatenate([np.ones(len(rows)), inst.constraints.b])
    senses = ["="] * len(rows) + ["<="] * inst.constraints.N
    result = lp_solve(cost @ W, A, rhs, senses)
    if result.status == INFEASIBLE:
        raise InfeasibleRegion(
            f"No point of the achievable-mean polytope of `{inst.name}` satisfies the constraints"
        )
    return result


def membership(poly: MixturePolytope, gamma: np.ndarray) -> bool:
    """Whether gamma lies in the polytope, decided by LP feasibility"""
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (poly.dimension,):
        raise ContractViolation(
            f"Point of shape {gamma.shape} for a polytope of dimension {poly.dimension}"
        )
    rows = poly.simplex_rows()
    A = np.vstack([rows, poly.weight_matrix()])
    rhs = np.concatenate([np.ones(len(rows)), gamma])
    result = lp_solve(np.zeros(poly.n_weights), A, rhs, ["="] * len(rhs))
    return result.status == OPTIMAL


def fw_gap(inst, poly: MixturePolytope, gamma: np.ndarray) -> float:
    """
    Frank-Wolfe gap sup_v <grad f(gamma), gamma - v> over the feasible points
    v of the polytope (A v <= b).

    Raises:
        InfeasibleRegion: if no feasible point exists
    """
    gamma = np.asarray(gamma, dtype=float)
    grad = inst.objective.gradient(gamma)
    result = feasible_lp(inst, poly, grad)
    return float(grad @ gamma - result.value)


#######################
# Frank-Wolfe engine with away steps
#######################


@dataclass
class FWSolution:
    point: np.ndarray
    gap: float
    iterations: int
    atoms: dict


def _away_step_frank_wolfe(
    gradient: Callable,
    oracle: Callable,
    start: Tuple[np.ndarray, object],
    line_search: Callable,
    tol: float,
) -> FWSolution:
    """
    Minimizes a smooth function over the convex hull of the atoms returned
    by `oracle(cost) -> (point, key)`.

    The iterate is kept as a convex combination of active atoms; each step
    either moves towards the oracle atom or away from the worst active atom.
    `line_search(x, direction, max_step)` returns the step length.
    """
    point, key = start
    atoms = {key: np.asarray(point, dtype=float)}
    weights = {key: 1.0}
    x = atoms[key].copy()
    gap = np.inf
    for iteration in range(1, MAX_FW_ITERATIONS + 1):
        grad = gradient(x)
        target, target_key = oracle(grad)
        gap = float(grad @ (x - target))
        if gap <= tol:
            break

        away_key = max(weights, key=lambda k: grad @ atoms[k])
        away_gap = float(grad @ (atoms[away_key] - x))

        if gap >= away_gap:
            direction = target - x
            max_step = 1.0
            step = line_search(x, direction, max_step)
            for k in weights:
                weights[k] *= 1 - step
            if target_key not in atoms:
                atoms[target_key] = target
                weights[target_key] = 0.0
            weights[target_key] += step
            if step >= 1.0:
                weights = {target_key: 1.0}
        else:
            direction = x - atoms[away_key]
            w_away = weights[away_key]
            max_step = w_away / (1 - w_away)
            step = line_search(x, direction, max_step)
            for k in weights:
                weights[k] *= 1 + step
            weights[away_key] -= step
            if step >= max_step:
                del weights[away_key]

        weights = {k: w for k, w in weights.items() if w > 0}
        atoms = {k: atoms[k] for k in weights}
        x = x + step * direction
    else:
        logger.warning(
            "Frank-Wolfe stopped after {} iterations with gap {:.3g}".format(
                MAX_FW_ITERATIONS, gap
            )
        )
    return FWSolution(x, gap, iteration, {k: (atoms[k], w) for k, w in weights.items()})


def dist_to_polytope(
    poly: MixturePolytope, gamma: np.ndarray, tol: float = DIST_GAP
) -> float:
    """Euclidean distance from gamma to the polytope (0 exactly for members)"""
    gamma = np.asarray(gamma, dtype=float)
    if not np.all(np.isfinite(gamma)):
        raise ContractViolation(f"Point must be finite, got {gamma}")
    if membership(poly, gamma):
        return 0.0

    def exact_step(x, direction, max_step):
        norm2 = direction @ direction
        if norm2 == 0:
            return 0.0
        return float(np.clip(-(x - gamma) @ direction / norm2, 0.0, max_step))

    solution = _away_step_frank_wolfe(
        gradient=lambda v: v - gamma,
        oracle=poly.lmo,
        start=poly.lmo(-gamma),
        line_search=exact_step,
        tol=tol,
    )
    return float(np.linalg.norm(solution.point - gamma))


def solve_gamma_star(
    inst, poly: MixturePolytope, tol: float = GAMMA_STAR_GAP
) -> Tuple[np.ndarray, float]:
    """
    Reference optimum of a convex instance: minimizes f over the feasible
    part of the polytope with Frank-Wolfe whose oracle is an LP.

    Raises:
        UnsupportedInstance: for nonconvex objectives
        InfeasibleRegion: if no feasible point exists
    """
    objective = inst.objective
    if not objective.convex:
        raise UnsupportedInstance(
            f"The reference optimum of the nonconvex objective of `{inst.name}` is undefined"
        )
    W = poly.weight_matrix()

    def oracle(cost):
        point = W @ feasible_lp(inst, poly, cost).x
        return point, tuple(np.round(point, 12))

    def bounded_step(x, direction, max_step):
        if max_step <= 0:
            return 0.0
        fct = lambda s: objective.value(x + s * direction)
        result = minimize_scalar(
            fct, bounds=(0.0, max_step), method="bounded", options={"xatol": 1e-12}
        )
        step = float(result.x)
        if fct(max_step) <= fct(step):
            step = max_step
        if fct(0.0) < fct(step):
            step = 0.0
        return step

    start = oracle(objective.gradient(np.zeros(inst.dimension)))
    solution = _away_step_frank_wolfe(
        gradient=objective.gradient,
        oracle=oracle,
        start=start,
        line_search=bounded_step,
        tol=tol,
    )
    return solution.point, float(objective.value(solution.point))

