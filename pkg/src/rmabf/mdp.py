"""Arm and instance types for restless bandits with activation floors.

States are integers ``0..S-1``; action 1 is *active*, action 0 is *passive*.
Kernels are stored as ``transition[a, s, s']`` and mean rewards as
``reward_mean[s, a]``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ChainError

ROW_TOL = 1e-9


class RewardDist(str, enum.Enum):
    BERNOULLI = "bernoulli"
    DETERMINISTIC = "deterministic"


def _frozen(x, dtype=float) -> np.ndarray:
    arr = np.array(x, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ArmModel:
    """One arm: a two-action MDP with per-state mean rewards."""

    transition: np.ndarray  # (2, S, S)
    reward_mean: np.ndarray  # (S, 2)
    reward_dist: RewardDist = RewardDist.BERNOULLI

    def __post_init__(self):
        object.__setattr__(self, "transition", _frozen(self.transition))
        object.__setattr__(self, "reward_mean", _frozen(self.reward_mean))
        object.__setattr__(self, "reward_dist", RewardDist(self.reward_dist))
        if self.transition.ndim != 3 or self.transition.shape[0] != 2:
            raise ValueError(f"transition must have shape (2, S, S), got {self.transition.shape}")
        S = self.transition.shape[1]
        if self.transition.shape[2] != S:
            raise ValueError(f"transition must have shape (2, S, S), got {self.transition.shape}")
        if self.reward_mean.shape != (S, 2):
            raise ValueError(f"reward_mean must have shape ({S}, 2), got {self.reward_mean.shape}")

    @property
    def num_states(self) -> int:
        return self.transition.shape[1]


@dataclass(frozen=True, eq=False)
class RmabInstance:
    """N arms, an activation budget B and per-arm activation floors."""

    arms: tuple[ArmModel, ...]
    budget: int
    eta: np.ndarray
    initial_states: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "arms", tuple(self.arms))
        object.__setattr__(self, "eta", _frozen(self.eta))
        init = self.initial_states
        if init is None:
            init = np.zeros(len(self.arms), dtype=int)
        object.__setattr__(self, "initial_states", _frozen(init, dtype=int))

    @property
    def num_arms(self) -> int:
        return len(self.arms)

    @property
    def num_states(self) -> int:
        return self.arms[0].num_states

    def transitions(self) -> np.ndarray:
        """Stacked kernels, shape (N, 2, S, S)."""
        return np.stack([arm.transition for arm in self.arms])

    def rewards(self) -> np.ndarray:
        """Stacked mean rewards, shape (N, S, 2)."""
        return np.stack([arm.reward_mean for arm in self.arms])


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[tuple[str, str], ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def messages(self) -> list[str]:
        return [msg for _, msg in self.violations]

    def codes(self) -> list[str]:
        return [code for code, _ in self.violations]


def _arm_violations(arm: ArmModel, label: str) -> list[tuple[str, str]]:
    out = []
    P = arm.transition
    if np.any(P < -ROW_TOL) or np.any(P > 1 + ROW_TOL):
        out.append(("probability_range", f"{label}: transition entries outside [0, 1]"))
    sums = P.sum(axis=-1)
    bad = np.argwhere(np.abs(sums - 1.0) > ROW_TOL)
    for a, s in bad:
        out.append(("non_stochastic_row",
                    f"{label}: non-stochastic row (action {a}, state {s}) sums to {sums[a, s]:.12g}"))
    r = arm.reward_mean
    if np.any(r < 0) or np.any(r > 1):
        out.append(("reward_range", f"{label}: reward means outside [0, 1]"))
    if np.any(r[:, 0] != 0):
        out.append(("passive_reward", f"{label}: passive reward means must be 0"))
    return out


def validate_instance(instance: RmabInstance) -> ValidationReport:
    """Check every structural invariant; never raises."""
    v: list[tuple[str, str]] = []
    N = instance.num_arms
    if N == 0:
        return ValidationReport((("no_arms", "instance has no arms"),))
    S = instance.arms[0].num_states
    for n, arm in enumerate(instance.arms):
        if arm.num_states != S:
            v.append(("state_space_mismatch",
                      f"arm {n}: has {arm.num_states} states, arm 0 has {S}"))
        v.extend(_arm_violations(arm, f"arm {n}"))
    B = instance.budget
    if int(B) != B or B < 1:
        v.append(("budget_nonpositive", f"budget must be a positive integer, got {B}"))
    if B > N:
        v.append(("budget_exceeds_arms", f"budget {B} exceeds number of arms {N}"))
    eta = instance.eta
    if eta.shape != (N,):
        v.append(("eta_length", f"eta/arms length mismatch: {eta.shape[0] if eta.ndim else 0} vs {N}"))
    else:
        if np.any(eta < 0) or np.any(eta > 1):
            v.append(("eta_range", "fairness floors must lie in [0, 1]"))
        if eta.sum() > B + ROW_TOL:
            v.append(("fairness_exceeds_budget",
                      f"fairness floors exceed budget: sum(eta)={eta.sum():.6g} > B={B}"))
    init = instance.initial_states
    if init.shape != (N,):
        v.append(("initial_states_length", f"initial_states length {init.shape} does not match {N} arms"))
    elif np.any(init < 0) or np.any(init >= S):
        v.append(("initial_state_range", f"initial states must lie in 0..{S - 1}"))
    return ValidationReport(tuple(v))


def stationary_distribution(kernel: np.ndarray) -> np.ndarray:
    """Unique stationary distribution of a row-stochastic matrix.

    Solves ``pi (P - I) = 0`` with ``sum(pi) = 1``. Periodic chains are fine;
    chains with more than one closed class raise :class:`ChainError`.
    """
    P = np.asarray(kernel, dtype=float)
    S = P.shape[0]
    M = np.eye(S) - P
    if S > 1 and np.linalg.matrix_rank(M, tol=1e-10) < S - 1:
        raise ChainError("periodic or reducible chain suspected")
    A = M.T.copy()
    A[-1, :] = 1.0
    b = np.zeros(S)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise ChainError("periodic or reducible chain suspected") from exc
    pi = np.where(np.abs(pi) < 1e-15, 0.0, pi)
    if np.any(pi < -1e-9) or np.max(np.abs(pi @ P - pi)) > 1e-8:
        raise ChainError("periodic or reducible chain suspected")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def policy_kernel(arm: ArmModel, activation: Sequence[float]) -> np.ndarray:
    """Kernel of the chain that activates in state s with probability activation[s]."""
    u = np.asarray(activation, dtype=float)[:, None]
    return u * arm.transition[1] + (1.0 - u) * arm.transition[0]
