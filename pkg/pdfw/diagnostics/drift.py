"""
Empirical check of the queue drift condition
--------------------------------------------
Under a Slater margin epsilon, the queue-norm process Z(t) = ||Q(t)|| moves
by at most delta_max = B per slot and decreases on average by t0 * xi over
windows of t0 slots that start above a threshold lambda, with xi = epsilon/2.
Such a process has E Z(t) bounded uniformly in t. The test below pools all
windows that start above lambda instead of conditioning on full histories.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from pdfw.common import logger, mean_and_se, ContractViolation


@dataclass(frozen=True)
class DriftTestConfig:
    """
    Args:
        t0 (int): window length
        delta_max (float): bound on one-step changes (B)
        xi (float): required mean decrease per slot above the threshold
        lambda_threshold (float): threshold lambda
        n_se (float): standard errors allowed in Monte Carlo comparisons
    """

    t0: int
    delta_max: float
    xi: float
    lambda_threshold: float
    n_se: float = 3.0

    def __post_init__(self):
        if int(self.t0) != self.t0 or self.t0 < 1:
            raise ContractViolation(f"Window length must be a positive integer, got {self.t0}")
        if not 0 < self.xi < self.delta_max:
            raise ContractViolation(
                f"Need 0 < xi < delta_max, got xi={self.xi}, delta_max={self.delta_max}"
            )

    @classmethod
    def from_bounds(cls, bc, epsilon: float, V: float, eta: float, t0: int, **kwargs):
        """Parameters for the queue norms of a run with Slater margin epsilon"""
        B, L, D, M, K = bc.B, bc.L, bc.D, bc.M, bc.K
        threshold = (
            (V * L * eta * D**2 + B**2 + 2 * V * M * D) * t0
            + 4 * V * K / eta
            + epsilon * B * t0**2
            + epsilon**2 * t0**2
        ) / (epsilon * t0)
        return cls(int(t0), B, epsilon / 2, threshold, **kwargs)


def drift_expectation_bound(cfg: DriftTestConfig) -> float:
    """Uniform bound on E Z(t) implied by the drift condition"""
    delta, xi = cfg.delta_max, cfg.xi
    return cfg.lambda_threshold + 4 * delta**2 / xi * cfg.t0 * np.log(
        1 + 8 * delta**2 / xi**2 * np.exp(xi / (4 * delta))
    )


@dataclass
class DriftReport:
    one_step_ok: bool
    max_step: float
    window_ok: Optional[bool]
    window_mean: Optional[float]
    window_se: Optional[float]
    n_windows: int
    expectation_ok: bool
    max_mean_norm: float
    expectation_bound: float

    @property
    def vacuous(self) -> bool:
        return self.window_ok is None

    @property
    def passed(self) -> bool:
        return self.one_step_ok and self.window_ok is not False and self.expectation_ok


def drift_test(queue_norms, cfg: DriftTestConfig, tol: float = 1e-9) -> DriftReport:
    """
    Args:
        queue_norms: series Z(0..T) of one run, or an array (runs x slots)
        cfg (DriftTestConfig)

    Returns:
        DriftReport. The window check is None (vacuous) when no slot lies
        above the threshold.
    """
    Z = np.atleast_2d(np.asarray(queue_norms, dtype=float))
    steps = np.abs(np.diff(Z, axis=1))
    max_step = float(steps.max(initial=0.0))
    one_step_ok = bool(max_step <= cfg.delta_max + tol)

    t0 = cfg.t0
    window_ok, window_mean, window_se, n_windows = None, None, None, 0
    if Z.shape[1] > t0:
        starts = Z[:, :-t0]
        changes = Z[:, t0:] - starts
        selected = changes[starts > cfg.lambda_threshold]
        n_windows = int(selected.size)
        if n_windows > 0:
            window_mean, window_se = mean_and_se(selected)
            window_ok = bool(window_mean <= -t0 * cfg.xi / 2 + cfg.n_se * window_se)
    if window_ok is None:
        logger.info(
            f"No queue norm above the drift threshold {cfg.lambda_threshold:.4g}, window check is vacuous"
        )

    mean_norms, se_norms = mean_and_se(Z) if Z.shape[0] > 1 else (Z[0], np.zeros(Z.shape[1]))
    bound = drift_expectation_bound(cfg)
    expectation_ok = bool(np.all(mean_norms <= bound + cfg.n_se * se_norms))
    return DriftReport(
        one_step_ok,
        max_step,
        window_ok,
        window_mean,
        window_se,
        n_windows,
        expectation_ok,
        float(np.max(mean_norms)),
        float(bound),
    )
