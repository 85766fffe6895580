"""
Two-phase policy extraction: run PDFW for T slots to obtain gamma_alpha,
then run the tracking Frank-Wolfe for another T slots on fresh states so
that the realized time average approaches gamma_alpha.
"""

import time

import numpy as np

from pdfw.core.types import AlgoConfig, ProblemInstance
from pdfw.algorithms.pdfw import run_pdfw
from pdfw.algorithms.frankwolfe import run_tracking_fw
from pdfw.algorithms.result import TwoPhaseResult


def run_two_phase(
    inst: ProblemInstance, cfg: AlgoConfig, replications: int = 1
) -> TwoPhaseResult:
    """
    Args:
        replications (int): number of independent tracking phases for the
            same gamma_alpha; their mean estimates E_alpha[x_bar_T]
    """
    start = time.perf_counter()
    phase1 = run_pdfw(inst, cfg)
    target = phase1.gamma_alpha
    xbars = [
        run_tracking_fw(inst, target, cfg.T, cfg.seed, replication)
        for replication in range(replications)
    ]
    phase2_xbar = np.mean(xbars, axis=0)
    return TwoPhaseResult(
        phase1=phase1,
        target=target,
        phase2_xbar=phase2_xbar,
        tracking_error=float(np.linalg.norm(phase2_xbar - target)),
        phase2_xbars=xbars,
        wallclock=time.perf_counter() - start,
    )
