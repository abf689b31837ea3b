from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..errors import SolverInconsistencyError

OCC_TOL = 1e-7


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class StandardFormLP:
    """``opt c.x`` s.t. ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``x >= 0``.

    ``shape`` is the variable index map: variable ``j`` is the multi-index
    ``np.unravel_index(j, shape)``, i.e. ``(n, s, a)`` or ``(n, s, a, s')``.
    ``ub_groups`` / ``eq_groups`` name contiguous row blocks.
    """

    c: np.ndarray
    A_ub: sp.csr_matrix
    b_ub: np.ndarray
    A_eq: sp.csr_matrix
    b_eq: np.ndarray
    shape: tuple[int, ...]
    maximize: bool = True
    ub_groups: dict[str, slice] = field(default_factory=dict)
    eq_groups: dict[str, slice] = field(default_factory=dict)

    @property
    def num_vars(self) -> int:
        return self.c.shape[0]

    def variable(self, j: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(j, self.shape))

    def column(self, multi_index: tuple[int, ...]) -> int:
        return int(np.ravel_multi_index(multi_index, self.shape))

    def residuals(self, x: np.ndarray) -> tuple[float, float]:
        """Worst inequality excess and worst equality residual at ``x``."""
        ub = float(np.max(self.A_ub @ x - self.b_ub, initial=0.0))
        eq = float(np.max(np.abs(self.A_eq @ x - self.b_eq), initial=0.0))
        return ub, eq


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray | None = None
    objective_value: float = float("nan")
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


@dataclass
class OccupancyMeasure:
    """Per-arm visitation frequencies.

    ``values`` is either ``(N, S, A)`` (state-action form) or
    ``(N, S, A, S)`` (state-action-next-state form).
    """

    values: np.ndarray

    @property
    def extended(self) -> bool:
        return self.values.ndim == 4

    def state_action(self) -> np.ndarray:
        return self.values.sum(axis=3) if self.extended else self.values

    def with_kernels(self, transitions: np.ndarray) -> "OccupancyMeasure":
        """Expand a state-action measure using kernels shaped (N, A, S, S)."""
        if self.extended:
            return self
        P = np.transpose(transitions, (0, 2, 1, 3))  # (N, S, A, S')
        return OccupancyMeasure(self.values[..., None] * P)

    def mass(self) -> np.ndarray:
        return self.state_action().sum(axis=(1, 2))

    def activation(self) -> np.ndarray:
        return self.state_action()[:, :, 1].sum(axis=1)

    def flow_residual(self) -> float:
        if not self.extended:
            raise ValueError("flow residual needs the state-action-next-state form")
        out = self.values.sum(axis=(2, 3))
        inflow = self.values.sum(axis=(1, 2))
        return float(np.max(np.abs(out - inflow)))


@dataclass
class ConfidenceModel:
    """Empirical kernels, rewards and radii for every (arm, state, action)."""

    p_hat: np.ndarray  # (N, S, A, S)
    r_hat: np.ndarray  # (N, S, A)
    delta: np.ndarray  # (N, S, A)

    @property
    def r_tilde(self) -> np.ndarray:
        return self.r_hat + self.delta

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Clamped ball edges ``max(0, P - d)`` and ``min(1, P + d)``."""
        d = self.delta[..., None]
        return np.clip(self.p_hat - d, 0.0, 1.0), np.clip(self.p_hat + d, 0.0, 1.0)


def occupancy_from_solution(sol: LpSolution, lp: StandardFormLP) -> OccupancyMeasure:
    """Reshape an optimal solution into an occupancy measure and re-check it."""
    if not sol.optimal or sol.x is None:
        raise SolverInconsistencyError(f"cannot read occupancy from a {sol.status.value} solution")
    x = np.asarray(sol.x, dtype=float).copy()
    if np.any(x < -1e-9):
        raise SolverInconsistencyError(f"solver inconsistency: negative occupancy {x.min():.3g}")
    x[x < 0] = 0.0
    occ = OccupancyMeasure(x.reshape(lp.shape))
    mass = occ.mass()
    if np.max(np.abs(mass - 1.0)) > OCC_TOL:
        raise SolverInconsistencyError(f"solver inconsistency: occupancy mass {mass}")
    _, eq = lp.residuals(x)
    if eq > OCC_TOL:
        raise SolverInconsistencyError(f"solver inconsistency: equality residual {eq:.3g}")
    if occ.extended and occ.flow_residual() > OCC_TOL:
        raise SolverInconsistencyError("solver inconsistency: flow balance violated")
    return occ
