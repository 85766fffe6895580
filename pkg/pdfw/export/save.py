"""
Writes experiment output: the summary CSV (one row per horizon), the
bound-check report, optional per-slot traces, and for every CSV a
`<file>.csv.params.json` side-file with the plan that produced it.
"""

import json
import os

import numpy as np
import pandas as pd

from pdfw.common import logger

FLOAT_FORMAT = "%.10g"

SUMMARY_COLUMNS = [
    "instance",
    "algorithm",
    "schedule",
    "T",
    "seeds",
    "f_xbar_mean",
    "f_xbar_se",
    "subopt_mean",
    "max_violation_mean",
    "fw_gap_mean",
    "dist2_mean",
    "bound_subopt",
    "bound_violation",
    "wallclock_s",
]


def _write(dataframe: pd.DataFrame, params: dict, folder: str, filename: str) -> str:
    path = os.path.join(folder, f"{filename}.csv")
    try:
        os.makedirs(folder, exist_ok=True)
        dataframe.to_csv(path, float_format=FLOAT_FORMAT, index=False)
        with open(f"{path}.params.json", "w", encoding="utf8") as fh:
            json.dump(params, fh, indent=2, sort_keys=True, default=str)
    except OSError as err:
        raise OSError(f"Could not write {path}: {err}") from err
    logger.info(f"Saved {path}")
    return path


def save_summary(summary: pd.DataFrame, params: dict, experiment: str, folder: str = "output") -> str:
    """Summary columns first (in the fixed order), extra columns after"""
    extra = [column for column in summary.columns if column not in SUMMARY_COLUMNS]
    ordered = summary.reindex(columns=SUMMARY_COLUMNS + extra).sort_values("T", kind="stable")
    return _write(ordered, params, folder, f"{experiment}_summary")


def save_report(report: pd.DataFrame, params: dict, experiment: str, folder: str = "output") -> str:
    return _write(report, params, folder, f"{experiment}_report")


def trace_rows(T: int, seed: int, trace) -> pd.DataFrame:
    """Long-format trace of one run: one row per slot t = -1..T-1"""
    d = trace.xs.shape[1]
    N = trace.queues.shape[1]
    frame = {"T": T, "seed": seed, "t": np.arange(-1, trace.T)}
    states = np.concatenate([[-1], trace.states])
    frame["state"] = states
    xs = np.vstack([np.full((1, d), np.nan), trace.xs])
    for j in range(d):
        frame[f"x_{j + 1}"] = xs[:, j]
    for j in range(d):
        frame[f"gamma_{j + 1}"] = trace.gammas[:, j]
    # Q(t + 1) is the queue after the decision of slot t
    for i in range(N):
        frame[f"q_{i + 1}"] = trace.queues[:, i]
    frame["alpha"] = trace.alpha if trace.alpha is not None else -2
    return pd.DataFrame(frame)


def save_traces(traces, params: dict, experiment: str, folder: str = "output") -> str:
    """
    Args:
        traces: iterable of (T, seed, RunTrace), written in the given order
    """
    dataframe = pd.concat([trace_rows(T, seed, trace) for T, seed, trace in traces], ignore_index=True)
    return _write(dataframe, params, folder, f"{experiment}_trace")
