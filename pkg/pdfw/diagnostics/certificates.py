"""
Certificates for the constraint qualifications used by the convergence
bounds: a Slater point with margin epsilon and nonnegative Lagrange
multipliers at the reference optimum.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from pdfw.common import logger, ContractViolation
from pdfw.diagnostics.lp import lp_solve, OPTIMAL
from pdfw.diagnostics.polytope import MixturePolytope, feasible_lp

SLATER_THRESHOLD = 1e-9


@dataclass
class SlaterCertificate:
    """
    Attributes:
        margin (float): epsilon > 0 with <a_i, gamma_tilde> - b_i <= -epsilon
        witness (list of ndarray): per-state probability vector over vertices
        gamma_tilde (ndarray): mean of the witness policy
    """

    margin: float
    witness: list
    gamma_tilde: np.ndarray

    def verify(self, inst, tol: float = 1e-7) -> bool:
        residuals = inst.constraints.residuals(self.gamma_tilde)
        return bool(np.all(residuals <= -self.margin + tol))


@dataclass
class NoCertificate:
    margin: float
    reason: str = ""


@dataclass
class LagrangeCertificate:
    """
    Attributes:
        multipliers (ndarray): lambda >= 0, one per constraint
        checked_gap (float): max over sampled gamma of
            f(gamma*) - f(gamma) - <lambda, A gamma - b>, nonpositive up to rounding
    """

    multipliers: np.ndarray
    checked_gap: float
    gamma_star: np.ndarray = field(repr=False, default=None)


def certify_slater(inst, poly: Optional[MixturePolytope] = None):
    """
    Largest margin epsilon of a randomized stationary policy whose mean is
    strictly feasible, found by an LP over the mixture weights.

    Returns:
        SlaterCertificate when the margin exceeds 1e-9, NoCertificate otherwise
    """
    constraints = inst.constraints
    if constraints.N < 1:
        raise ContractViolation("A Slater certificate needs at least one constraint")
    poly = MixturePolytope.from_instance(inst) if poly is None else poly

    W = poly.weight_matrix()
    rows = poly.simplex_rows()
    n_w = poly.n_weights
    # Variables: mixture weights, then the free margin epsilon
    c = np.zeros(n_w + 1)
    c[-1] = 1.0
    A = np.vstack(
        [
            np.hstack([rows, np.zeros((len(rows), 1))]),
            np.hstack([constraints.A @ W, np.ones((constraints.N, 1))]),
        ]
    )
    rhs = np.concatenate([np.ones(len(rows)), constraints.b])
    senses = ["="] * len(rows) + ["<="] * constraints.N
    bounds = [(0.0, None)] * n_w + [(None, None)]
    result = lp_solve(c, A, rhs, senses, bounds, maximize=True)

    if result.status != OPTIMAL:
        return NoCertificate(0.0, f"Slater LP ended with status {result.status}")
    margin = float(result.value)
    if margin <= SLATER_THRESHOLD:
        return NoCertificate(margin, "No strictly feasible randomized policy")
    weights = result.x[:n_w]
    return SlaterCertificate(margin, poly.split_weights(weights), W @ weights)


def certify_lagrange(
    inst,
    poly: MixturePolytope,
    gamma_star: np.ndarray,
    n_samples: int = 200,
    seed: int = 0,
) -> LagrangeCertificate:
    """
    Lagrange multipliers from the duals of the constraint rows of the LP
    linearized at gamma*. The certificate is checked on gamma* and on
    `n_samples` random points of the polytope.
    """
    gamma_star = np.asarray(gamma_star, dtype=float)
    objective = inst.objective
    constraints = inst.constraints
    result = feasible_lp(inst, poly, objective.gradient(gamma_star))
    n_rows = len(poly.vertex_lists)
    multipliers = np.maximum(-result.marginals[n_rows:], 0.0)

    rng = np.random.default_rng(seed)
    points = np.vstack([poly.sample(rng, n_samples), gamma_star[None, :]])
    f_star = objective.value(gamma_star)
    checked_gap = max(
        f_star - objective.value(g) - multipliers @ constraints.residuals(g)
        for g in points
    )
    logger.debug(f"Lagrange certificate for `{inst.name}`: checked gap {checked_gap:.3g}")
    return LagrangeCertificate(multipliers, float(checked_gap), gamma_star)
