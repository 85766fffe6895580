"""
Perturbation property of the Frank-Wolfe gap:

    |G(gamma) - G(gamma_tilde)| <= (2 D L + M) ||gamma - gamma_tilde||
"""

from dataclasses import dataclass, field

import numpy as np

from pdfw.common import logger
from pdfw.diagnostics.polytope import fw_gap

PROPERTY_SLACK = 1e-7


@dataclass
class PerturbationReport:
    max_violation: float
    n_pairs: int
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def gap_perturbation_check(
    inst, poly, pairs, bounds=None, slack: float = PROPERTY_SLACK
) -> PerturbationReport:
    """
    Evaluates both sides of the perturbation inequality on each (gamma,
    gamma_tilde) pair. `max_violation` is the largest value of
    |G(gamma) - G(gamma_tilde)| - (2DL + M)||gamma - gamma_tilde|| and every
    pair exceeding `slack` is listed in `failures`.
    """
    if bounds is None:
        from pdfw.diagnostics.bounds import compute_bounds

        bounds = inst.bounds or compute_bounds(inst)
    pairs = list(pairs)
    constant = 2 * bounds.D * bounds.L + bounds.M
    max_violation = 0.0 if not pairs else -np.inf
    failures = []
    for gamma, gamma_tilde in pairs:
        gamma = np.asarray(gamma, dtype=float)
        gamma_tilde = np.asarray(gamma_tilde, dtype=float)
        difference = abs(fw_gap(inst, poly, gamma) - fw_gap(inst, poly, gamma_tilde))
        violation = difference - constant * np.linalg.norm(gamma - gamma_tilde)
        max_violation = max(max_violation, violation)
        if violation > slack:
            failures.append((gamma, gamma_tilde, violation))
    for gamma, gamma_tilde, violation in failures:
        logger.error(
            f"Gap perturbation bound violated by {violation:.3g} at {gamma} / {gamma_tilde}"
        )
    return PerturbationReport(float(max_violation), len(pairs), failures)
