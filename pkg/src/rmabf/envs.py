"""Environment builders and the stochastic stepping of arms.

Four families are provided: birth-death queues (synthetic), CPAP adherence,
crowd-annotation workers (RTE) and land-mobile-satellite channels (LMSS).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .mdp import ArmModel, RewardDist, RmabInstance

# Passive kernels read off the CPAP adherence diagrams; states are the
# low / intermediate / acceptable adherence levels.
CPAP_DIAGRAMS = {
    1: ((0.0385, 0.0, 0.9615),
        (0.0, 0.0, 1.0),
        (0.0257, 0.0245, 0.9498)),
    2: ((0.7427, 0.0741, 0.1835),
        (0.3399, 0.1634, 0.4967),
        (0.2323, 0.1020, 0.6657)),
}

# The cluster-2 low-adherence row sums to 1.0003 as printed; the excess is
# taken from the (low -> acceptable) entry so the row is stochastic.
_CPAP_ROUNDING_FIX = {2: ((0, 2), 0.1832)}

# (p11, p12, p21, p22) per elevation angle; state 0 = good, 1 = bad.
LMSS_TABLE = {
    40: (0.9155, 0.0845, 0.0811, 0.9189),
    60: (0.9043, 0.0957, 0.2, 0.8),
    70: (0.9155, 0.0845, 0.2069, 0.7931),
    80: (0.9268, 0.0732, 0.2667, 0.7333),
}

# Successful-annotation probabilities of the ten RTE workers.
RTE_WORKERS = (0.495, 0.45, 0.4, 0.3, 0.6, 0.55, 0.65, 0.5, 0.54, 0.37)


@dataclass(frozen=True)
class BirthDeath:
    lam: float
    mu: float = 5.0
    S: int = 6
    p: float = 0.05


@dataclass(frozen=True)
class Cpap:
    cluster: int
    boost: float = 0.2
    noise_scale: float = 0.0
    seed: int | None = None


@dataclass(frozen=True)
class Rte:
    q: float
    passive_stay: float = 0.0


@dataclass(frozen=True)
class Lmss:
    elevation: int
    good_reward: float = 1.0
    bad_reward: float = 0.2


EnvSpec = Union[BirthDeath, Cpap, Rte, Lmss]


@dataclass(frozen=True)
class StepOutcome:
    next_state: int
    reward: float


def make_birth_death_arm(lam: float, mu: float, S: int, p: float) -> ArmModel:
    """Reflected birth-death chain; active arms pay Bernoulli(s * p)."""
    if lam <= 0 or mu <= 0:
        raise ValueError("arrival and departure rates must be positive")
    if S < 2:
        raise ValueError("birth-death arm needs at least 2 states")
    if p <= 0:
        raise ValueError("reward slope must be positive")
    if p * (S - 1) > 1 + 1e-12:
        raise ValueError("reward mean exceeds 1")
    up = lam / (lam + mu)
    down = mu / (lam + mu)
    K = np.zeros((S, S))
    for s in range(S):
        K[s, min(s + 1, S - 1)] += up
        K[s, max(s - 1, 0)] += down
    r = np.zeros((S, 2))
    r[:, 1] = np.arange(S) * p
    return ArmModel(np.stack([K, K]), r, RewardDist.BERNOULLI)


def _cpap_passive(cluster: int) -> np.ndarray:
    K = np.array(CPAP_DIAGRAMS[cluster], dtype=float)
    if cluster in _CPAP_ROUNDING_FIX:
        (i, j), value = _CPAP_ROUNDING_FIX[cluster]
        K[i, j] = value
    return K


def make_cpap_arm(cluster: int, boost: float, noise_scale: float = 0.0,
                  rng: np.random.Generator | None = None) -> ArmModel:
    """CPAP adherence arm.

    Noise is uniform on ``[-noise_scale, noise_scale]`` and touches only the
    diagram's nonzero entries. The active kernel moves a ``boost`` fraction of
    every row's low/intermediate mass onto the acceptable-adherence state.
    """
    if cluster not in CPAP_DIAGRAMS:
        raise ValueError(f"unknown CPAP cluster {cluster!r}; expected 1 or 2")
    if not 0.0 <= boost <= 0.5:
        raise ValueError(f"boost must lie in [0, 0.5], got {boost}")
    if noise_scale < 0:
        raise ValueError("noise_scale must be nonnegative")
    K = _cpap_passive(cluster)
    if noise_scale > 0:
        if rng is None:
            raise ValueError("a random generator is required when noise_scale > 0")
        mask = K > 0
        K = K + mask * rng.uniform(-noise_scale, noise_scale, size=K.shape)
        K = np.clip(K, 0.0, None)
        sums = K.sum(axis=1, keepdims=True)
        if np.any(sums <= 0):
            raise ValueError("CPAP row is not normalizable after noise")
        K = K / sums
    active = K.copy()
    if boost > 0:
        moved = boost * K[:, :-1]
        active[:, :-1] -= moved
        active[:, -1] += moved.sum(axis=1)
    r = np.zeros((3, 2))
    r[:, 1] = np.arange(1, 4) / 3.0
    return ArmModel(np.stack([K, active]), r, RewardDist.DETERMINISTIC)


def make_rte_arm(q: float, passive_stay: float = 0.0) -> ArmModel:
    """Annotation worker: state 1 means the last assigned task was done right.

    Active: next state is 1 with probability ``q`` from either state.
    Passive: state 1 survives with probability ``passive_stay`` (0 by default).
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"success probability must lie in [0, 1], got {q}")
    if not 0.0 <= passive_stay <= 1.0:
        raise ValueError("passive_stay must lie in [0, 1]")
    active = np.array([[1 - q, q], [1 - q, q]])
    passive = np.array([[1.0, 0.0], [1 - passive_stay, passive_stay]])
    r = np.array([[0.0, 0.0], [0.0, 1.0]])
    return ArmModel(np.stack([passive, active]), r, RewardDist.DETERMINISTIC)


def make_lmss_arm(elevation: int, good_reward: float = 1.0, bad_reward: float = 0.2) -> ArmModel:
    """Two-state satellite channel; the channel evolves the same under both actions."""
    if elevation not in LMSS_TABLE:
        raise ValueError(f"unknown elevation {elevation!r}; expected one of {sorted(LMSS_TABLE)}")
    p11, p12, p21, p22 = LMSS_TABLE[elevation]
    K = np.array([[p11, p12], [p21, p22]])
    r = np.array([[0.0, good_reward], [0.0, bad_reward]])
    return ArmModel(np.stack([K, K]), r, RewardDist.DETERMINISTIC)


def build_arm(spec: EnvSpec) -> ArmModel:
    if isinstance(spec, BirthDeath):
        return make_birth_death_arm(spec.lam, spec.mu, spec.S, spec.p)
    if isinstance(spec, Cpap):
        rng = np.random.default_rng(spec.seed) if spec.noise_scale > 0 else None
        return make_cpap_arm(spec.cluster, spec.boost, spec.noise_scale, rng)
    if isinstance(spec, Rte):
        return make_rte_arm(spec.q, spec.passive_stay)
    if isinstance(spec, Lmss):
        return make_lmss_arm(spec.elevation, spec.good_reward, spec.bad_reward)
    raise TypeError(f"unknown environment spec {spec!r}")


def step_arm(arm: ArmModel, s: int, a: int, rng: np.random.Generator) -> StepOutcome:
    next_state = int(rng.choice(arm.num_states, p=arm.transition[a, s]))
    if a == 0:
        return StepOutcome(next_state, 0.0)
    mean = float(arm.reward_mean[s, a])
    if arm.reward_dist is RewardDist.BERNOULLI:
        return StepOutcome(next_state, float(rng.random() < mean))
    return StepOutcome(next_state, mean)


class ArmBank:
    """All arms of an instance stacked for vectorized stepping."""

    def __init__(self, instance: RmabInstance):
        P = instance.transitions()
        cum = np.cumsum(P, axis=-1)
        cum[..., -1] = 1.0
        self.cum = cum
        self.means = instance.rewards()
        self.bernoulli = np.array([arm.reward_dist is RewardDist.BERNOULLI for arm in instance.arms])
        self.N = instance.num_arms
        self.S = instance.num_states
        self._arms = np.arange(self.N)

    def step(self, states: np.ndarray, actions: np.ndarray,
             u_next: np.ndarray, u_reward: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Advance every arm one epoch given pre-drawn uniforms.

        Arrays are shaped ``(N,)`` or ``(R, N)`` for ``R`` independent replicas.
        """
        rows = self.cum[self._arms, actions, states]
        nxt = (rows <= u_next[..., None]).sum(axis=-1)
        mean = self.means[self._arms, states, actions]
        reward = np.where(self.bernoulli, (u_reward < mean).astype(float), mean)
        reward = np.where(actions == 1, reward, 0.0)
        return nxt, reward


def synthetic_instance(arms_per_class: int = 100, budget: int = 100,
                       eta: Sequence[float] = (0.1, 0.2, 0.3), S: int = 6, mu: float = 5.0,
                       seed: int = 0) -> RmabInstance:
    """Birth-death classes with arrival rate 3n and slopes p_n ~ U[0.01, 0.1]."""
    rng = np.random.default_rng(seed)
    classes = len(eta)
    slopes = rng.uniform(0.01, 0.1, size=classes)
    arms, floors = [], []
    for c in range(classes):
        arm = make_birth_death_arm(3.0 * (c + 1), mu, S, slopes[c])
        arms.extend([arm] * arms_per_class)
        floors.extend([eta[c]] * arms_per_class)
    init = rng.integers(0, S, size=len(arms))
    return RmabInstance(tuple(arms), budget, np.array(floors), init)


def cpap_instance(per_cluster: int = 10, budget: int = 5, noise_scale: float = 0.02,
                  seed: int = 0) -> RmabInstance:
    """CPAP patients; floors are U[0.1, 0.7] fractions of the fair share B/N."""
    rng = np.random.default_rng(seed)
    arms = []
    for cluster in (1, 2):
        for _ in range(per_cluster):
            arms.append(make_cpap_arm(cluster, rng.uniform(0.05, 0.5), noise_scale, rng))
    N = len(arms)
    eta = rng.uniform(0.1, 0.7, size=N) * budget / N
    return RmabInstance(tuple(arms), budget, eta, np.zeros(N, dtype=int))


def rte_instance(budget: int = 3, eta: float = 0.05) -> RmabInstance:
    arms = tuple(make_rte_arm(q) for q in RTE_WORKERS)
    return RmabInstance(arms, budget, np.full(len(arms), eta))


def lmss_instance(budget: int = 2, eta: float = 0.03) -> RmabInstance:
    arms = tuple(make_lmss_arm(e) for e in sorted(LMSS_TABLE))
    return RmabInstance(arms, budget, np.full(len(arms), eta))
