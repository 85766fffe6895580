"""
Objective families
------------------
Every family ships its smoothness constant L and closed-form bounds
(M, K) = (sup ||grad f||, sup |f|) on a box, which `compute_bounds` uses
to certify the constants of an instance.

Objectives are selected by name through `make_objective`:

    linear      f(g) = <c, g> + offset
    quadratic   f(g) = w ||g - center||^2
    sigmoidal   f(g) = -sum_j c_j / (1 + exp(-a_j (g_j - x0_j)))
"""

from typing import Tuple

import numpy as np
from scipy.special import expit

from pdfw.common import ContractViolation
from pdfw.core.types import Objective


def _vector(values, dimension=None, name="parameter"):
    values = np.atleast_1d(np.asarray(values, dtype=float))
    if dimension is not None and values.shape == (1,) and dimension > 1:
        values = np.full(dimension, values[0])
    if values.ndim != 1 or (dimension is not None and len(values) != dimension):
        raise ContractViolation(f"{name} must be a vector of length {dimension}, got {values}")
    return values


class LinearObjective(Objective):
    def __init__(self, c, offset: float = 0.0):
        self.c = _vector(c, name="c")
        self.offset = float(offset)
        self.dimension = len(self.c)
        self.smoothness = 0.0
        self.convex = True

    def value(self, gamma):
        return float(self.c @ gamma + self.offset)

    def gradient(self, gamma):
        return self.c.copy()

    def box_bounds(self, lower, upper):
        high = np.sum(np.maximum(self.c * lower, self.c * upper)) + self.offset
        low = np.sum(np.minimum(self.c * lower, self.c * upper)) + self.offset
        return float(np.linalg.norm(self.c)), float(max(abs(high), abs(low)))

    def params(self):
        return {"c": self.c.tolist(), "offset": self.offset}


class QuadraticObjective(Objective):
    """f(gamma) = weight * ||gamma - center||^2"""

    def __init__(self, center, weight: float = 1.0):
        self.center = _vector(center, name="center")
        self.weight = float(weight)
        if self.weight < 0:
            raise ContractViolation("Quadratic weight must be nonnegative")
        self.dimension = len(self.center)
        self.smoothness = 2 * self.weight
        self.convex = True

    def value(self, gamma):
        diff = gamma - self.center
        return float(self.weight * diff @ diff)

    def gradient(self, gamma):
        return 2 * self.weight * (gamma - self.center)

    def box_bounds(self, lower, upper):
        farthest = np.maximum(np.abs(lower - self.center), np.abs(upper - self.center))
        return (
            float(2 * self.weight * np.linalg.norm(farthest)),
            float(self.weight * farthest @ farthest),
        )

    def params(self):
        return {"center": self.center.tolist(), "weight": self.weight}


class SigmoidalUtility(Objective):
    """
    Negative sum of per-user logistic utilities of the average throughput.

    Args:
        c: amplitude per user (default 1)
        a: steepness per user (default 10)
        x0: threshold per user (default 0.5)
        dimension (int): number of users when all parameters are scalars
    """

    def __init__(self, c=1.0, a=10.0, x0=0.5, dimension: int = None):
        if dimension is None:
            dimension = max(np.size(c), np.size(a), np.size(x0))
        self.c = _vector(c, dimension, "c")
        self.a = _vector(a, dimension, "a")
        self.x0 = _vector(x0, dimension, "x0")
        if np.any(self.c < 0) or np.any(self.a < 0):
            raise ContractViolation("Sigmoid amplitudes and steepness must be nonnegative")
        self.dimension = dimension
        # Conservative envelope of the logistic second derivative
        self.smoothness = float(np.max(self.c * self.a**2 / 4))
        self.convex = False

    def value(self, gamma):
        return float(-np.sum(self.c * expit(self.a * (gamma - self.x0))))

    def gradient(self, gamma):
        sigma = expit(self.a * (gamma - self.x0))
        return -self.c * self.a * sigma * (1 - sigma)

    def box_bounds(self, lower, upper):
        # |grad_j| peaks at the point of [lower_j, upper_j] closest to x0_j
        closest = np.clip(self.x0, lower, upper)
        sigma = expit(self.a * (closest - self.x0))
        M = np.linalg.norm(self.c * self.a * sigma * (1 - sigma))
        K = np.sum(self.c * expit(self.a * (upper - self.x0)))
        return float(M), float(K)

    def params(self):
        return {"c": self.c.tolist(), "a": self.a.tolist(), "x0": self.x0.tolist()}


class CoupledLocalObjective(Objective):
    """
    Local objective of one node of the distributed problem, over the stacked
    vector (gamma, theta) of length d + p:

        f(gamma, theta) = g(gamma) + weight/2 ||theta - target||^2
                          + coupling * mean(gamma) * sum(theta)

    Args:
        local (Objective): g, the objective of the node's own decisions
        target: tau, preferred value of the shared variable (length p)
        weight (float): pull towards the target
        coupling (float): strength of the interaction between gamma and theta
    """

    def __init__(self, local: Objective, target, weight: float = 1.0, coupling: float = 0.0):
        self.local = local
        self.target = _vector(target, name="target")
        self.weight = float(weight)
        self.coupling = float(coupling)
        self.d = local.dimension
        self.p = len(self.target)
        self.dimension = self.d + self.p
        self.smoothness = float(
            local.smoothness + self.weight + abs(self.coupling) * np.sqrt(self.p / self.d)
        )
        self.convex = bool(local.convex and self.coupling == 0 and self.weight >= 0)

    def split(self, z):
        return z[: self.d], z[self.d :]

    def value(self, z):
        gamma, theta = self.split(z)
        diff = theta - self.target
        return float(
            self.local.value(gamma)
            + self.weight / 2 * diff @ diff
            + self.coupling * gamma.mean() * theta.sum()
        )

    def gradient_gamma(self, gamma, theta):
        return self.local.gradient(gamma) + self.coupling * theta.sum() / self.d

    def gradient_theta(self, gamma, theta):
        return self.weight * (theta - self.target) + self.coupling * gamma.mean()

    def gradient(self, z):
        gamma, theta = self.split(z)
        return np.concatenate(
            [self.gradient_gamma(gamma, theta), self.gradient_theta(gamma, theta)]
        )

    def box_bounds(self, lower, upper):
        (lo_g, lo_t), (hi_g, hi_t) = self.split(lower), self.split(upper)
        M_local, K_local = self.local.box_bounds(lo_g, hi_g)
        max_mean = max(abs(lo_g.mean()), abs(hi_g.mean()))
        max_sum = max(abs(lo_t.sum()), abs(hi_t.sum()))
        far = np.maximum(np.abs(lo_t - self.target), np.abs(hi_t - self.target))
        M_gamma = M_local + abs(self.coupling) * max_sum / np.sqrt(self.d)
        M_theta = self.weight * np.linalg.norm(far) + abs(self.coupling) * max_mean * np.sqrt(self.p)
        K = K_local + self.weight / 2 * far @ far + abs(self.coupling) * max_mean * max_sum
        return float(np.hypot(M_gamma, M_theta)), float(K)


#######################
# Registry
#######################

OBJECTIVES = {
    "linear": LinearObjective,
    "quadratic": QuadraticObjective,
    "sigmoidal": SigmoidalUtility,
}


def make_objective(name: str, **params) -> Objective:
    if name not in OBJECTIVES:
        raise NotImplementedError(f"Objective `{name}` not implemented")
    return OBJECTIVES[name](**params)


def objective_id(objective: Objective) -> str:
    for name, cls in OBJECTIVES.items():
        if type(objective) is cls:
            return name
    raise NotImplementedError(f"Objective {type(objective).__name__} cannot be serialized")


#######################
# Audits
#######################


def gradient_error(objective: Objective, points, h: float = 1e-6) -> float:
    """Largest relative error between the gradient and central differences"""
    worst = 0.0
    for point in np.atleast_2d(points):
        numeric = np.zeros(objective.dimension)
        for j in range(objective.dimension):
            step = np.zeros(objective.dimension)
            step[j] = h
            numeric[j] = (objective.value(point + step) - objective.value(point - step)) / (2 * h)
        analytic = objective.gradient(point)
        scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), 1e-8)
        worst = max(worst, np.linalg.norm(analytic - numeric) / scale)
    return float(worst)


def smoothness_ratio(objective: Objective, pairs) -> float:
    """Largest ||grad f(x) - grad f(y)|| / ||x - y|| over the given pairs"""
    ratio = 0.0
    for x, y in pairs:
        distance = np.linalg.norm(x - y)
        if distance > 0:
            ratio = max(
                ratio,
                np.linalg.norm(objective.gradient(x) - objective.gradient(y)) / distance,
            )
    return float(ratio)
