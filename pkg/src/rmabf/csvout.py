"""CSV writers for aggregates, single-trial series, index tables and sweeps.

Numbers are written with 9 significant digits; files are UTF-8 with LF line
endings. Per-arm columns cover the first ``ARM_COLUMNS`` arms, followed by
the min and mean over all arms.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import RmabfError
from .harness import AggregateMetrics, RegretSeries, SweepPoint
from .index_policy import IndexTable

ARM_COLUMNS = 8

SWEEP_HEADER = ["rho", "arms", "budget", "lp_bound", "index_mean", "index_stderr",
                "gap", "gap_stderr", "attractor_distance"]
ORACLE_HEADER = ["arm", "eta", "lp_value", "brute_force_value", "grid_error", "abs_diff", "agree"]


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".9g")


def _arm_header(N: int) -> list[str]:
    cols = []
    for n in range(min(N, ARM_COLUMNS)):
        cols += [f"act_frac_{n}", f"fair_viol_{n}"]
    return cols + ["act_frac_min", "act_frac_mean", "fair_viol_min", "fair_viol_mean"]


def learn_header(N: int) -> list[str]:
    return (["t", "mean_cum_reward", "mean_reward_regret_lp", "mean_reward_regret_index",
             "stderr_reward_regret"] + _arm_header(N))


def series_header(N: int) -> list[str]:
    return ["t", "cum_reward", "reward_regret_lp", "reward_regret_index"] + _arm_header(N)


def index_header() -> list[str]:
    return ["arm", "state", "omega"]


def _arm_block(frac: np.ndarray, viol: np.ndarray) -> np.ndarray:
    k = min(frac.shape[1], ARM_COLUMNS)
    inter = np.empty((frac.shape[0], 2 * k))
    inter[:, 0::2] = frac[:, :k]
    inter[:, 1::2] = viol[:, :k]
    if frac.shape[0] == 0 or frac.shape[1] == 0:
        summary = np.zeros((frac.shape[0], 4))
    else:
        summary = np.column_stack([frac.min(axis=1), frac.mean(axis=1),
                                   viol.min(axis=1), viol.mean(axis=1)])
    return np.hstack([inter, summary])


def _rows(obj):
    if isinstance(obj, AggregateMetrics):
        N = obj.eta.shape[0]
        body = np.column_stack([obj.cum_reward_mean, obj.reward_regret_lp,
                                obj.reward_regret_index, obj.reward_regret_stderr,
                                _arm_block(obj.activation_fraction.reshape(obj.T, N),
                                           obj.fairness_violation.reshape(obj.T, N))])
        return learn_header(N), [[t] + list(r) for t, r in zip(range(1, obj.T + 1), body)]
    if isinstance(obj, RegretSeries):
        N = obj.activation_fraction.shape[1]
        body = np.column_stack([obj.cum_reward, obj.reward_regret_lp, obj.reward_regret_index,
                                _arm_block(obj.activation_fraction, obj.fairness_violation)])
        return series_header(N), [[t] + list(r) for t, r in zip(range(1, obj.T + 1), body)]
    if isinstance(obj, IndexTable):
        N, S = obj.omega.shape
        return index_header(), [[n, s, obj.omega[n, s]] for n in range(N) for s in range(S)]
    if isinstance(obj, (list, tuple)) and all(isinstance(p, SweepPoint) for p in obj):
        return SWEEP_HEADER, [[p.rho, p.arms, p.budget, p.lp_bound, p.index_mean,
                               p.index_stderr, p.gap, p.gap_stderr, p.attractor_distance()]
                              for p in obj]
    raise TypeError(f"cannot write {type(obj).__name__} as CSV")


def write_rows(path, header: Sequence[str], rows) -> None:
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(x) for x in row])
    except OSError as exc:
        raise RmabfError(f"{path}: cannot write CSV ({exc.strerror})") from None


def write_csv(obj, path) -> None:
    """Write an aggregate, a single-trial series, an index table or sweep points."""
    header, rows = _rows(obj)
    write_rows(path, header, rows)
