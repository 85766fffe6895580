"""
Reference oracles for low-dimensional instances (d <= 2) that do not go
through the LP solver: every point sum_s p_s v_{s,k_s} of the polytope is
enumerated, the convex hull of these points is built with
`scipy.spatial.ConvexHull`, and distances and linear minima are evaluated
on the hull geometry directly.
"""

import itertools

import numpy as np
from scipy.spatial import ConvexHull

from pdfw.common import ContractViolation, InfeasibleRegion
from pdfw.diagnostics.polytope import MixturePolytope

FEASIBILITY_TOL = 1e-9


def minkowski_points(poly: MixturePolytope) -> np.ndarray:
    """All p-weighted sums of one vertex per state (duplicates removed)"""
    points = [
        sum(p * v[k] for p, v, k in zip(poly.probabilities, poly.vertex_lists, choice))
        for choice in itertools.product(*(range(len(v)) for v in poly.vertex_lists))
    ]
    return np.unique(np.round(np.asarray(points, dtype=float), 14), axis=0)


class _Hull:
    """Vertices in boundary order, edges and a membership test"""

    def __init__(self, points: np.ndarray):
        if points.shape[1] > 2:
            raise ContractViolation(
                f"Brute-force oracles support d <= 2, got d = {points.shape[1]}"
            )
        self.dimension = points.shape[1]
        centered = points - points.mean(axis=0)
        rank = np.linalg.matrix_rank(centered, tol=1e-12) if len(points) > 1 else 0

        self.equations = None
        if rank == 0:
            self.vertices = points[:1]
            self.edges = []
        elif rank == 1:
            direction = centered[np.argmax(np.linalg.norm(centered, axis=1))]
            projection = centered @ direction
            ends = points[[np.argmin(projection), np.argmax(projection)]]
            self.vertices = ends
            self.edges = [(ends[0], ends[1])]
        else:
            hull = ConvexHull(points)
            self.vertices = points[hull.vertices]
            n = len(self.vertices)
            self.edges = [(self.vertices[k], self.vertices[(k + 1) % n]) for k in range(n)]
            self.equations = hull.equations
        self.rank = rank

    def contains(self, x: np.ndarray, tol: float = FEASIBILITY_TOL) -> bool:
        if self.rank == 2:
            return bool(np.all(self.equations[:, :-1] @ x + self.equations[:, -1] <= tol))
        if self.rank == 0:
            return bool(np.linalg.norm(x - self.vertices[0]) <= tol)
        a, b = self.edges[0]
        return bool(_segment_distance(x, a, b) <= tol)


def _segment_distance(x, a, b) -> float:
    direction = b - a
    norm2 = direction @ direction
    t = 0.0 if norm2 == 0 else float(np.clip((x - a) @ direction / norm2, 0.0, 1.0))
    return float(np.linalg.norm(x - (a + t * direction)))


def bruteforce_dist(poly: MixturePolytope, gamma) -> float:
    """Distance from gamma to the polytope, from its enumerated hull"""
    gamma = np.asarray(gamma, dtype=float)
    hull = _Hull(minkowski_points(poly))
    if hull.contains(gamma, tol=0.0):
        return 0.0
    if hull.rank == 0:
        return float(np.linalg.norm(gamma - hull.vertices[0]))
    return min(_segment_distance(gamma, a, b) for a, b in hull.edges)


def _candidates(hull: _Hull, A: np.ndarray, b: np.ndarray) -> list:
    """Points where the minimum of a linear function over hull ∩ {Av <= b} can sit"""
    candidates = list(hull.vertices)
    for (start, end), (row, rhs) in itertools.product(hull.edges, zip(A, b)):
        slope = row @ (end - start)
        if abs(slope) > 1e-14:
            t = (rhs - row @ start) / slope
            if -FEASIBILITY_TOL <= t <= 1 + FEASIBILITY_TOL:
                candidates.append(start + np.clip(t, 0.0, 1.0) * (end - start))
    if hull.rank == 2:
        for i, j in itertools.combinations(range(len(b)), 2):
            pair = A[[i, j]]
            if abs(np.linalg.det(pair)) > 1e-12:
                candidates.append(np.linalg.solve(pair, b[[i, j]]))
    return candidates


def bruteforce_fw_gap(inst, poly: MixturePolytope, gamma) -> float:
    """
    sup_v <grad f(gamma), gamma - v> over the feasible part of the polytope,
    evaluated over every candidate extreme point of hull ∩ {Av <= b}.

    Raises:
        InfeasibleRegion: if no candidate is feasible
    """
    gamma = np.asarray(gamma, dtype=float)
    grad = inst.objective.gradient(gamma)
    A, b = inst.constraints.A, inst.constraints.b
    hull = _Hull(minkowski_points(poly))

    feasible = [
        v
        for v in _candidates(hull, A, b)
        if np.all(A @ v - b <= FEASIBILITY_TOL) and hull.contains(v)
    ]
    if not feasible:
        raise InfeasibleRegion(f"No feasible point in the polytope of `{inst.name}`")
    return float(grad @ gamma - min(grad @ v for v in feasible))
