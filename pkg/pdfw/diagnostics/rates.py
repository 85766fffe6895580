"""
Empirical convergence rates
"""

import numpy as np
from scipy.stats import linregress

from pdfw.common import logger


def fit_rate(horizons, errors) -> float:
    """
    Least-squares slope of log(error) against log(T).

    Points with a nonpositive error are excluded with a warning.

    Raises:
        ValueError: if fewer than 3 usable points remain
    """
    horizons = np.asarray(horizons, dtype=float).reshape(-1)
    errors = np.asarray(errors, dtype=float).reshape(-1)
    if horizons.shape != errors.shape:
        raise ValueError("Need one error per horizon")
    keep = (errors > 0) & (horizons > 0)
    for T, error in zip(horizons[~keep], errors[~keep]):
        logger.warning(f"Excluding rate point T={T:g} with nonpositive error {error:g}")
    if keep.sum() < 3:
        raise ValueError(f"Rate fit needs at least 3 positive points, got {keep.sum()}")
    return float(linregress(np.log(horizons[keep]), np.log(errors[keep])).slope)
