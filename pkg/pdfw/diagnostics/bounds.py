"""
Boundedness constants and closed-form convergence bounds.

`compute_bounds` evaluates the constants M, K, B, D and L of an instance;
the remaining functions evaluate the bounds on objective gap, constraint
violation, Frank-Wolfe gap and distance to the polytope as functions of
the horizon T and the algorithm parameters.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

from pdfw.common import logger, ContractViolation
from pdfw.core.types import CUBE_ROOT, SQUARE_ROOT

N_BOUND_SAMPLES = 4096
DIAMETER_CHUNK = 2048


@dataclass(frozen=True)
class BoundConstants:
    """
    Attributes:
        M (float): sup of ||grad f|| over the ambient hull
        K (float): sup of |f| over the ambient hull
        B (float): sup over decision vertices of ||A x - b||
        D (float): diameter of the ambient hull
        L (float): gradient Lipschitz constant
        certified (bool): False when M and K are sampled estimates
    """

    M: float
    K: float
    B: float
    D: float
    L: float
    certified: bool = True

    def __post_init__(self):
        for name in ("M", "K", "B", "D", "L"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                raise ContractViolation(f"Bound constant {name} must be finite and nonnegative, got {value}")


def diameter(points: np.ndarray) -> float:
    """Largest pairwise distance; chunked for large point sets"""
    if len(points) < 2:
        return 0.0
    if len(points) <= DIAMETER_CHUNK:
        return float(pdist(points).max())
    return float(
        max(
            cdist(points[start : start + DIAMETER_CHUNK], points).max()
            for start in range(0, len(points), DIAMETER_CHUNK)
        )
    )


def compute_bounds(inst) -> BoundConstants:
    generators = inst.ambient_generators()
    D = diameter(generators)

    constraints = inst.constraints
    if constraints.N > 0:
        vertices = np.vstack([s.generators() for s in inst.decision_sets])
        residuals = vertices @ constraints.A.T - constraints.b
        B = float(np.sqrt(np.max(np.sum(residuals**2, axis=1))))
    else:
        B = 0.0

    lower, upper = generators.min(axis=0), generators.max(axis=0)
    certified = True
    try:
        M, K = inst.objective.box_bounds(lower, upper)
    except NotImplementedError:
        rng = np.random.default_rng(0)
        points = np.vstack(
            [generators, rng.uniform(lower, upper, size=(N_BOUND_SAMPLES, len(lower)))]
        )
        M = max(np.linalg.norm(inst.objective.gradient(x)) for x in points)
        K = max(abs(inst.objective.value(x)) for x in points)
        certified = False
        logger.warning(
            f"Objective of `{inst.name}` has no closed-form box bounds, "
            "M and K are sampled estimates (not certified)"
        )
    return BoundConstants(
        float(M), float(K), B, D, float(inst.objective.smoothness), certified
    )


def effective_parameters(T: int, schedule: str):
    """(V, eta) for a named schedule"""
    if schedule == CUBE_ROOT:
        return T ** (1 / 3), T ** (-2 / 3)
    elif schedule == SQUARE_ROOT:
        return T**0.5, T**-0.5
    raise NotImplementedError(f"Schedule `{schedule}` has no closed form")


#######################
# Convex case
#######################


def convex_bounds(bc: BoundConstants, T: int, V: float, eta: float) -> dict:
    """
    Objective gap E f(x_bar_T) - f(gamma*) and the constraint violation bound
    sqrt(E||Q(T)||^2) / T, valid for every row.
    """
    objective = (2 * bc.K + bc.M * bc.D) / (eta * T) + bc.B**2 / (2 * V) + bc.L * bc.D**2 * eta / 2
    queue_sq = (
        4 * bc.K * V / T
        + 4 * bc.K * V / (T**2 * eta)
        + bc.B**2 / T
        + bc.L * bc.D**2 * V * eta / T
    )
    return {"objective": objective, "violation": np.sqrt(queue_sq)}


def lagrange_bounds(
    bc: BoundConstants, T: int, V: float, eta: float, multipliers, A
) -> dict:
    """Convex bounds when Lagrange multipliers exist (tighter violation)"""
    multipliers = np.asarray(multipliers, dtype=float)
    norm_lambda = float(np.linalg.norm(multipliers))
    norm_At_lambda = float(np.linalg.norm(np.asarray(A).T @ multipliers))
    queue = 2 * norm_lambda * V + np.sqrt(
        (2 * norm_At_lambda * bc.D * V + 4 * bc.K * V) / eta
        + bc.B**2 * T
        + bc.L * bc.D**2 * eta * V * T
    )
    objective = (2 * bc.K + bc.M * bc.D) / (eta * T) + bc.B**2 / (2 * V) + bc.L * bc.D**2 * eta / 2
    return {"objective": objective, "violation": queue / T}


#######################
# Non-convex case
#######################


def nonconvex_bounds(bc: BoundConstants, T: int, V: float, eta: float, a_norms) -> dict:
    """
    Bounds on E G(gamma_alpha), the per-row violation of E gamma_alpha and
    E dist(gamma_alpha)^2 for arbitrary V and eta.
    """
    a_norms = np.asarray(a_norms, dtype=float)
    queue_sq = (
        2 * bc.M * bc.D * V / T
        + 4 * bc.K * V / (eta * T**2)
        + bc.B**2 / T
        + bc.L * bc.D**2 * eta * V / T
    )
    return {
        "fw_gap": 2 * bc.K / (eta * T) + bc.B**2 / V + eta * bc.L * bc.D**2 / 2,
        "violation": np.sqrt(queue_sq) + a_norms * bc.D / (eta * T),
        "dist2": eta * bc.D**2,
    }


def slater_constant(bc: BoundConstants, epsilon: float, a_norm: float) -> float:
    """Constant C_i of the violation bound C_i / sqrt(T) under a Slater margin"""
    if not epsilon > 0:
        raise ContractViolation(f"Slater margin must be positive, got {epsilon}")
    B, K, D, L, M = bc.B, bc.K, bc.D, bc.L, bc.M
    return float(
        (B**2 + L * D**2 + 2 * M * D) / epsilon
        + B
        + 4 * K
        + epsilon
        + 8 * B**2 / epsilon * np.log(1 + 32 * B**2 / epsilon**2 * np.e)
        + a_norm * D
    )


def slater_bounds(bc: BoundConstants, T: int, epsilon: float, a_norms) -> dict:
    """Bounds with V = sqrt(T), eta = 1/sqrt(T) under a Slater margin epsilon"""
    rate = 1 / np.sqrt(T)
    return {
        "fw_gap": (2 * bc.K + bc.B**2 + bc.L * bc.D**2) * rate,
        "violation": np.array([slater_constant(bc, epsilon, a) for a in a_norms]) * rate,
        "dist2": bc.D**2 * rate,
    }


def deterministic_bounds(
    bc: BoundConstants, T: int, schedule: str, a_norms, epsilon: float = None
) -> dict:
    """
    Bounds for single-state instances, where gamma_t stays in the polytope.
    The SquareRoot form needs a Slater margin for its violation bound.
    """
    a_norms = np.asarray(a_norms, dtype=float)
    if schedule == CUBE_ROOT:
        rate = T ** (-1 / 3)
        return {
            "fw_gap": (2 * bc.K + bc.B**2 + bc.L * bc.D**2 / (2 * T ** (1 / 3))) * rate,
            "violation": (
                np.sqrt(
                    2 * bc.M * bc.D
                    + (4 * bc.K + bc.B**2) / T ** (1 / 3)
                    + bc.L * bc.D**2 / T ** (2 / 3)
                )
                + a_norms * bc.D
            )
            * rate,
        }
    elif schedule == SQUARE_ROOT:
        rate = 1 / np.sqrt(T)
        bounds = {"fw_gap": (2 * bc.K + bc.B**2 + bc.L * bc.D**2 / 2) * rate}
        if epsilon is not None:
            bounds["violation"] = (
                np.array([slater_constant(bc, epsilon, a) for a in a_norms]) * rate
            )
        return bounds
    raise NotImplementedError(f"Schedule `{schedule}` has no deterministic bound")


#######################
# Two-phase tracking
#######################


def tracking_bounds(bc: BoundConstants, T: int, eta: float = None, a_norms=()) -> dict:
    """
    Bounds of the tracking phase and of the complete two-phase scheme.

    `tracking_sq` bounds ||x_bar_T - target||^2 - dist(target, polytope)^2
    for a tracking phase of T slots. `distance` bounds the tracking error
    when the target is gamma_alpha of a first phase run with averaging
    weight `eta`, whose squared distance to the polytope is at most
    eta * D^2. `fw_gap` and `violation` hold for V = T^(1/3),
    eta = T^(-2/3), which is also the default `eta`.
    """
    a_norms = np.asarray(a_norms, dtype=float)
    rate = T ** (-1 / 3)
    eta = T ** (-2 / 3) if eta is None else eta
    tracking_sq = bc.D**2 * (1 + np.log(T)) / T
    return {
        "tracking_sq": tracking_sq,
        "distance": np.sqrt(tracking_sq) + bc.D * np.sqrt(eta),
        "fw_gap": (
            2 * bc.K
            + bc.B**2
            + bc.L * bc.D**2 / 2
            + (2 * bc.D * bc.L + bc.M) * (np.sqrt(2) + 1) * bc.D
        )
        * rate,
        "violation": (
            np.sqrt(2 * bc.M * bc.D + 4 * bc.K + bc.B**2 + bc.L * bc.D**2)
            + a_norms * (np.sqrt(2) + 2) * bc.D
        )
        * rate,
    }
