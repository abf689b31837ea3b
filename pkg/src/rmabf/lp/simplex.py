"""Dense two-phase primal simplex with Bland's anti-cycling rule."""

from __future__ import annotations

import numpy as np

from ..errors import CyclingError
from .model import LpSolution, LpStatus, StandardFormLP

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-8


def _pivot(T: np.ndarray, basis: np.ndarray, r: int, j: int) -> None:
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    basis[r] = j


def _run(T: np.ndarray, basis: np.ndarray, ncols: int, max_iter: int, it: int) -> tuple[str, int]:
    """Minimize the objective stored in the last row of ``T``.

    Only the first ``ncols`` columns may enter the basis.
    """
    m = T.shape[0] - 1
    while True:
        reduced = T[m, :ncols]
        candidates = np.flatnonzero(reduced < -PIVOT_TOL)
        if candidates.size == 0:
            return "optimal", it
        if it >= max_iter:
            raise CyclingError(f"cycling suspected: no optimum after {it} pivots")
        j = candidates[0]
        col = T[:m, j]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            return "unbounded", it
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
        r = ties[np.argmin(basis[ties])]
        _pivot(T, basis, r, j)
        it += 1


def simplex(lp: StandardFormLP, max_iter: int | None = None) -> LpSolution:
    A_ub = lp.A_ub.toarray() if lp.A_ub.shape[0] else np.zeros((0, lp.num_vars))
    A_eq = lp.A_eq.toarray() if lp.A_eq.shape[0] else np.zeros((0, lp.num_vars))
    b_ub = np.asarray(lp.b_ub, dtype=float)
    b_eq = np.asarray(lp.b_eq, dtype=float)
    n = lp.num_vars
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq
    cost = -lp.c if lp.maximize else lp.c.astype(float)

    # columns: structural | slacks (one per ub row) | artificials (as needed)
    A = np.zeros((m, n + m_ub))
    A[:m_ub, :n] = A_ub
    A[:m_ub, n:] = np.eye(m_ub)
    A[m_ub:, :n] = A_eq
    b = np.concatenate([b_ub, b_eq])
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    need_art = np.ones(m, dtype=bool)
    need_art[:m_ub] = neg[:m_ub]
    art_rows = np.flatnonzero(need_art)
    k = art_rows.size
    ncols = n + m_ub + k
    T = np.zeros((m + 1, ncols + 1))
    T[:m, :n + m_ub] = A
    T[art_rows, n + m_ub + np.arange(k)] = 1.0
    T[:m, -1] = b
    basis = np.empty(m, dtype=int)
    basis[:m_ub] = n + np.arange(m_ub)
    basis[art_rows] = n + m_ub + np.arange(k)

    if max_iter is None:
        max_iter = 50 * (m + ncols) + 1000
    it = 0
    if k:
        T[m, :] = 0.0
        T[m, n + m_ub:ncols] = 1.0
        T[m] -= T[art_rows].sum(axis=0)
        _, it = _run(T, basis, ncols, max_iter, it)
        if -T[m, -1] > FEAS_TOL * max(1.0, np.abs(b).max(initial=0.0)):
            return LpSolution(LpStatus.INFEASIBLE, iterations=it)
        # drive zero-level artificials out; drop rows that are redundant
        keep = np.ones(m, dtype=bool)
        for r in range(m):
            if basis[r] >= n + m_ub:
                row = T[r, :n + m_ub]
                nz = np.flatnonzero(np.abs(row) > PIVOT_TOL)
                if nz.size:
                    _pivot(T, basis, r, nz[0])
                else:
                    keep[r] = False
        T = np.vstack([T[:m][keep], T[m:]])
        basis = basis[keep]
        m = basis.size
        T = np.delete(T, np.s_[n + m_ub:ncols], axis=1)
        ncols = n + m_ub

    T[m, :] = 0.0
    T[m, :n] = cost
    for r in range(m):
        j = basis[r]
        if T[m, j] != 0.0:
            T[m] -= T[m, j] * T[r]
    status, it = _run(T, basis, ncols, max_iter, it)
    if status == "unbounded":
        return LpSolution(LpStatus.UNBOUNDED, iterations=it)
    x_full = np.zeros(ncols)
    x_full[basis] = T[:m, -1]
    x = x_full[:n]
    obj = float(lp.c @ x)
    return LpSolution(LpStatus.OPTIMAL, x, obj, it)
