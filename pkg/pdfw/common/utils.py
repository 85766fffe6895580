"""
Common functions and utilities
"""

import functools
import logging
import os
import time
import numpy as np
import yaml
from pdfw.common import logger

INPUTDATA_FOLDER = os.path.join(os.path.dirname(__file__), "..", "inputdata")


def inputdata_path(folder, filename):
    """Absolute path of a file shipped in `pdfw/inputdata/<folder>`"""
    return os.path.normpath(os.path.join(INPUTDATA_FOLDER, folder, filename))


def timer(name, log=False):
    """Decorator which times functions

    Arguments:
        name {str} -- Description of the function
        log {bool} -- Send the duration to the PDFW logger at INFO instead of DEBUG
    """

    def decorator(fct):
        @functools.wraps(fct)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            result = fct(*args, **kwargs)
            message = "{} took {:.3g} seconds.".format(name, time.perf_counter() - start)
            logger.log(logging.INFO if log else logging.DEBUG, message)
            return result

        return wrapper

    return decorator


def load_yaml(filename, folder="config"):
    """Reads a YAML file. Relative names are looked up in `pdfw/inputdata/<folder>`."""
    full_filename = filename if os.path.isabs(filename) else inputdata_path(folder, filename)
    try:
        with open(full_filename, "r", encoding="utf8") as yamlfile:
            return yaml.safe_load(yamlfile) or {}
    except OSError as err:
        raise OSError(f"Could not read {full_filename}: {err}") from err


def mean_and_se(values):
    """Seed-averaged Monte Carlo estimate of an expectation.

    Args:
        values: one sample per seed

    Returns:
        (mean, standard error), the standard error uses ddof=1 and is 0 for a single sample
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("Cannot estimate a mean from zero samples")
    mean = float(values.mean(axis=0)) if values.ndim == 1 else values.mean(axis=0)
    if values.shape[0] < 2:
        return mean, 0.0 if values.ndim == 1 else np.zeros_like(mean)
    se = values.std(axis=0, ddof=1) / np.sqrt(values.shape[0])
    return mean, (float(se) if values.ndim == 1 else se)
