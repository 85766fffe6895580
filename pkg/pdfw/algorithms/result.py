"""
Outputs of the full-horizon runners.
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from pdfw.core.types import ALPHA_STREAM, ProblemInstance, RunTrace, rng_stream


def draw_alpha(seed, T: int) -> int:
    """Output index, uniform on {-1, 0, ..., T-2}, from its own random stream"""
    return int(rng_stream(seed, ALPHA_STREAM).integers(-1, T - 1))


@dataclass
class RunResult:
    """
    Attributes:
        trace (RunTrace)
        f_xbar (float): f of the time average x_bar_T
        violations (ndarray): <a_i, x_bar_T> - b_i per constraint
        gamma_alpha (ndarray): randomized output gamma_alpha
        wallclock (float): seconds spent in the run
        theta_bar (ndarray): (1/T) sum_t gamma_{t-1}
        final_queues (ndarray): Q(T)
    """

    trace: RunTrace
    f_xbar: float
    violations: np.ndarray
    gamma_alpha: np.ndarray
    wallclock: float
    theta_bar: np.ndarray
    final_queues: np.ndarray

    @classmethod
    def from_trace(cls, inst: ProblemInstance, trace: RunTrace, wallclock: float) -> "RunResult":
        x_bar = trace.x_bar
        return cls(
            trace=trace,
            f_xbar=float(inst.objective.value(x_bar)),
            violations=inst.constraints.residuals(x_bar),
            gamma_alpha=trace.gamma_alpha,
            wallclock=wallclock,
            theta_bar=trace.theta_bar,
            final_queues=trace.queues[-1].copy(),
        )

    @property
    def x_bar(self) -> np.ndarray:
        return self.trace.x_bar

    @property
    def alpha(self) -> int:
        return self.trace.alpha

    @property
    def queue_norm(self) -> float:
        return float(np.linalg.norm(self.final_queues))

    @property
    def max_violation(self) -> float:
        return float(self.violations.max()) if len(self.violations) else 0.0


@dataclass
class TwoPhaseResult:
    """
    Attributes:
        phase1 (RunResult): the primal-dual run producing gamma_alpha
        target (ndarray): gamma_alpha of phase 1
        phase2_xbar (ndarray): time average of the tracking phase, averaged
            over the tracking replications
        tracking_error (float): ||phase2_xbar - target||
        phase2_xbars (list): time average of every tracking replication
    """

    phase1: RunResult
    target: np.ndarray
    phase2_xbar: np.ndarray
    tracking_error: float
    phase2_xbars: List[np.ndarray]
    wallclock: float = 0.0
