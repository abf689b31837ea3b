"""Fair indices from occupancy measures and top-B activation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lp.model import OccupancyMeasure

ZERO_MASS = 1e-9


@dataclass(frozen=True, eq=False)
class IndexTable:
    omega: np.ndarray  # (N, S), activation probability per arm-state

    @property
    def num_arms(self) -> int:
        return self.omega.shape[0]


def fair_indices(occ: OccupancyMeasure) -> IndexTable:
    """``omega[n, s] = mass(s, active) / mass(s)``; unvisited states get 0."""
    sa = occ.state_action()
    total = sa.sum(axis=2)
    active = sa[:, :, 1]
    visited = total > ZERO_MASS
    omega = np.zeros_like(total)
    np.divide(active, total, out=omega, where=visited)
    return IndexTable(np.clip(omega, 0.0, 1.0))


def top_b(values: np.ndarray, B: int, tiebreak: np.ndarray) -> np.ndarray:
    """0/1 actions for the ``B`` largest entries along the last axis.

    Ties are ordered by ``tiebreak`` (i.i.d. uniforms), i.e. by a uniformly
    random permutation. Works on a single row or a batch of rows.
    """
    N = values.shape[-1]
    B = min(int(B), N)
    order = np.lexsort((tiebreak, -values), axis=-1)
    actions = np.zeros(values.shape, dtype=np.int8)
    np.put_along_axis(actions, order[..., :B], 1, axis=-1)
    return actions


def select_top_b(indices: IndexTable, states: np.ndarray, B: int,
                 rng: np.random.Generator) -> np.ndarray:
    """Activate the ``min(B, N)`` arms whose current-state index is largest."""
    N = indices.num_arms
    values = indices.omega[np.arange(N), np.asarray(states)]
    return top_b(values, B, rng.random(N))
