"""LP solve entry point with two backends.

``simplex`` is the in-repo dense Bland-rule solver; it is exact and
deterministic and fits problems up to a few hundred rows. ``highs`` hands the
same program to the HiGHS dual simplex, which is what the per-episode
extended LPs of a 30-arm instance need to run in reasonable time.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .model import LpSolution, LpStatus, StandardFormLP
from .simplex import simplex

try:
    import highspy
except ImportError:  # pragma: no cover - exercised only without highspy
    highspy = None

AUTO_DENSE_LIMIT = 400 * 1000


def _pick(lp: StandardFormLP) -> str:
    rows = lp.A_ub.shape[0] + lp.A_eq.shape[0]
    if highspy is None or rows * lp.num_vars <= AUTO_DENSE_LIMIT:
        return "simplex"
    return "highs"


def solve_lp(lp: StandardFormLP, method: str = "simplex") -> LpSolution:
    """Solve ``lp``; infeasibility and unboundedness come back as statuses."""
    if method == "auto":
        method = _pick(lp)
    if method == "simplex":
        return simplex(lp)
    if method == "highs":
        return HighsSolver().solve(lp)
    raise ValueError(f"unknown LP method {method!r}; expected simplex, highs or auto")


class HighsSolver:
    """HiGHS wrapper that can warm-start from the previous basis.

    Warm starts are only attempted when the new program has the same row and
    column counts as the last one solved. ``free_rows`` lets a caller switch
    off rows it knows to be redundant without changing the row layout.
    """

    def __init__(self, warm_start: bool = False):
        if highspy is None:
            raise ImportError("highspy is required for the HiGHS backend")
        self.warm_start = warm_start
        self._h = highspy.Highs()
        self._h.setOptionValue("output_flag", False)
        self._h.setOptionValue("primal_feasibility_tolerance", 1e-9)
        self._h.setOptionValue("dual_feasibility_tolerance", 1e-9)
        self._h.setOptionValue("presolve", "off")
        self._h.setOptionValue("solver", "simplex")
        self._basis = None
        self._dims = None

    def _pass(self, lp: StandardFormLP, free_rows: np.ndarray | None) -> None:
        M = sp.vstack([lp.A_ub, lp.A_eq]).tocsc()
        m_ub = lp.A_ub.shape[0]
        lower = np.concatenate([np.full(m_ub, -np.inf), lp.b_eq]).astype(float)
        upper = np.concatenate([lp.b_ub, lp.b_eq]).astype(float)
        if free_rows is not None:
            upper[:m_ub][free_rows] = np.inf
        cost = -lp.c if lp.maximize else lp.c
        n = lp.num_vars
        # array overload of passModel; far cheaper than filling a HighsLp
        self._h.passModel(n, M.shape[0], M.nnz, 1, 1, 0.0, np.asarray(cost, dtype=float),
                          np.zeros(n), np.full(n, np.inf), lower, upper,
                          M.indptr.astype(np.int32), M.indices.astype(np.int32),
                          M.data.astype(float), np.zeros(n, dtype=np.int32))

    def solve(self, lp: StandardFormLP, free_rows: np.ndarray | None = None) -> LpSolution:
        h = self._h
        self._pass(lp, free_rows)
        dims = (lp.num_vars, lp.A_ub.shape[0] + lp.A_eq.shape[0])
        if self.warm_start and self._basis is not None and dims == self._dims:
            h.setBasis(self._basis)
        h.run()
        status = h.getModelStatus()
        iters = int(h.getInfo().simplex_iteration_count)
        ms = highspy.HighsModelStatus
        if status == ms.kOptimal:
            if self.warm_start:
                self._basis = h.getBasis()
                self._dims = dims
            x = np.array(h.getSolution().col_value)
            x[np.abs(x) < 1e-13] = 0.0
            return LpSolution(LpStatus.OPTIMAL, x, float(lp.c @ x), iters)
        self._basis = None
        if status == ms.kInfeasible:
            return LpSolution(LpStatus.INFEASIBLE, iterations=iters)
        if status == ms.kUnbounded:
            return LpSolution(LpStatus.UNBOUNDED, iterations=iters)
        if status == ms.kUnboundedOrInfeasible:
            # re-run from scratch with presolve to tell the two apart
            h.setOptionValue("presolve", "on")
            h.clearSolver()
            h.run()
            h.setOptionValue("presolve", "off")
            if h.getModelStatus() == ms.kUnbounded:
                return LpSolution(LpStatus.UNBOUNDED, iterations=iters)
            return LpSolution(LpStatus.INFEASIBLE, iterations=iters)
        raise RuntimeError(f"HiGHS returned {h.modelStatusToString(status)}")
