"""Occupancy-measure LPs: the offline relaxation and the per-episode extended LP."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..mdp import RmabInstance
from .model import ConfidenceModel, StandardFormLP

A = 2


def _csr(rows, cols, vals, shape) -> sp.csr_matrix:
    if rows:
        r, c, v = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    else:
        r = c = np.zeros(0, dtype=int)
        v = np.zeros(0)
    return sp.csr_matrix((v, (r, c)), shape=shape)


def _activation_rows(active_cols: np.ndarray, B: float, eta: np.ndarray | None):
    """Budget row plus (optionally) one fairness row per arm, as ``<=`` rows.

    ``active_cols[n]`` lists the columns whose sum is arm n's activation mass.
    """
    N = active_cols.shape[0]
    w = active_cols.shape[1]
    rows = [np.zeros(N * w, dtype=int)]
    cols = [active_cols.ravel()]
    vals = [np.ones(N * w)]
    b = [float(B)]
    groups = {"budget": slice(0, 1)}
    if eta is not None:
        rows.append(1 + np.repeat(np.arange(N), w))
        cols.append(active_cols.ravel())
        vals.append(-np.ones(N * w))
        b.extend(-np.asarray(eta, dtype=float))
        groups["fairness"] = slice(1, 1 + N)
    return rows, cols, vals, b, groups


def build_offline_lp(instance: RmabInstance) -> StandardFormLP:
    """Relaxed problem over state-action occupancies ``zeta[n, s, a]``."""
    N, S = instance.num_arms, instance.num_states
    P = instance.transitions()  # (N, A, S, S)
    r = instance.rewards()  # (N, S, A)
    idx = np.arange(N * S * A).reshape(N, S, A)

    rows, cols, vals, b_ub, ub_groups = _activation_rows(
        idx[:, :, 1], instance.budget, instance.eta)
    A_ub = _csr(rows, cols, vals, (len(b_ub), idx.size))

    # flow: sum_a zeta(s, a) - sum_{s', a'} zeta(s', a') P(s | s', a') = 0
    erows, ecols, evals = [], [], []
    flow = np.arange(N * S).reshape(N, S)
    erows.append(np.repeat(flow.ravel(), A))
    ecols.append(idx.ravel())
    evals.append(np.ones(N * S * A))
    # inflow term for target s from every (s', a')
    tgt = np.broadcast_to(flow[:, None, None, :], (N, S, A, S))  # [n, s', a', s]
    src = np.broadcast_to(idx[..., None], (N, S, A, S))
    coef = np.transpose(P, (0, 2, 1, 3))  # [n, s', a', s]
    erows.append(tgt.ravel())
    ecols.append(src.ravel())
    evals.append(-coef.ravel())
    erows.append(N * S + np.repeat(np.arange(N), S * A))
    ecols.append(idx.ravel())
    evals.append(np.ones(N * S * A))
    A_eq = _csr(erows, ecols, evals, (N * S + N, idx.size))
    A_eq.sum_duplicates()
    b_eq = np.concatenate([np.zeros(N * S), np.ones(N)])

    return StandardFormLP(
        c=r.ravel().astype(float), A_ub=A_ub, b_ub=np.array(b_ub), A_eq=A_eq, b_eq=b_eq,
        shape=(N, S, A), maximize=True, ub_groups=ub_groups,
        eq_groups={"flow": slice(0, N * S), "normalization": slice(N * S, N * S + N)})


def elp_objective(conf: ConfidenceModel, passive_reward_known: bool = True) -> np.ndarray:
    r = conf.r_tilde.copy()
    if passive_reward_known:
        r[:, :, 0] = 0.0
    S = conf.p_hat.shape[-1]
    return np.repeat(r[..., None], S, axis=3).ravel()


def build_elp(conf: ConfidenceModel, budget: float, eta, include_fairness: bool = True,
              passive_reward_known: bool = True) -> StandardFormLP:
    """Extended LP over ``z[n, s, a, s']`` with the confidence ball linearized.

    Ball rows read ``z(s,a,s') - hi * sum_y z(s,a,y) <= 0`` and
    ``-z(s,a,s') + lo * sum_y z(s,a,y) <= 0`` with ``lo, hi`` the clamped
    edges. With ``passive_reward_known`` the passive optimistic reward is
    zero, since passive arms pay nothing by construction.
    """
    N, S = conf.p_hat.shape[0], conf.p_hat.shape[1]
    nv = N * S * A * S
    idx = np.arange(nv).reshape(N, S, A, S)
    lo, hi = conf.bounds()

    rows, cols, vals, b_ub, ub_groups = _activation_rows(
        idx[:, :, 1, :].reshape(N, S * S), budget, eta if include_fairness else None)
    base = len(b_ub)

    # ball rows: one per (n, s, a, s'), each touching the S entries z(n, s, a, .)
    nb = nv
    row_id = np.arange(nb).reshape(N, S, A, S)
    blk_rows = np.broadcast_to(row_id[..., None], (N, S, A, S, S))  # [.., s', y]
    blk_cols = np.broadcast_to(idx[:, :, :, None, :], (N, S, A, S, S))
    eye = np.eye(S)[None, None, None]  # [.., s', y]
    upper = eye - hi[..., None]
    lower = -eye + lo[..., None]
    rows += [base + blk_rows.ravel(), base + nb + blk_rows.ravel()]
    cols += [blk_cols.ravel(), blk_cols.ravel()]
    vals += [upper.ravel(), lower.ravel()]
    b_ub = np.concatenate([b_ub, np.zeros(2 * nb)])
    ub_groups["ball_upper"] = slice(base, base + nb)
    ub_groups["ball_lower"] = slice(base + nb, base + 2 * nb)
    A_ub = _csr(rows, cols, vals, (b_ub.size, nv))
    A_ub.eliminate_zeros()

    # flow: sum_{a, s'} z(s, a, s') - sum_{s', a'} z(s', a', s) = 0
    flow = np.arange(N * S).reshape(N, S)
    erows = [np.broadcast_to(flow[:, :, None, None], (N, S, A, S)).ravel(),
             np.broadcast_to(flow[:, None, None, :], (N, S, A, S)).ravel(),
             N * S + np.repeat(np.arange(N), S * A * S)]
    ecols = [idx.ravel(), idx.ravel(), idx.ravel()]
    evals = [np.ones(nv), -np.ones(nv), np.ones(nv)]
    A_eq = _csr(erows, ecols, evals, (N * S + N, nv))
    A_eq.sum_duplicates()
    A_eq.eliminate_zeros()
    b_eq = np.concatenate([np.zeros(N * S), np.ones(N)])

    return StandardFormLP(
        c=elp_objective(conf, passive_reward_known), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
        shape=(N, S, A, S), maximize=True, ub_groups=ub_groups,
        eq_groups={"flow": slice(0, N * S), "normalization": slice(N * S, N * S + N)})
