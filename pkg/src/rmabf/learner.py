"""Online learners (Fair-UCRL, G-Fair-UCRL) and the two reference policies.

A trial is strictly sequential. Every random draw comes from the single
generator handed to the runner, so a seed fixes the whole trajectory.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .envs import ArmBank
from .errors import InfeasiblePlanError, ScheduleError
from .index_policy import IndexTable, fair_indices, top_b
from .lp import (ConfidenceModel, HighsSolver, build_elp, build_offline_lp,
                 occupancy_from_solution, solve_lp)
from .lp.solve import _pick
from .mdp import RmabInstance

A = 2


class Algorithm(str, enum.Enum):
    FAIR_UCRL = "fair-ucrl"
    G_FAIR_UCRL = "g-fair-ucrl"
    ORACLE_INDEX = "oracle-index"
    RANDOM = "random"


@dataclass(frozen=True)
class LearnerConfig:
    episodes: int
    horizon: int
    epsilon: float = 0.1
    seed: int = 0
    algorithm: Algorithm = Algorithm.FAIR_UCRL
    budget: int | None = None
    eta: tuple[float, ...] | None = None
    lp_method: str = "auto"

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if self.episodes < 1 or self.horizon < 1:
            raise ValueError("episodes and horizon must be at least 1")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.eta is not None:
            object.__setattr__(self, "eta", tuple(float(e) for e in self.eta))

    @property
    def T(self) -> int:
        return self.episodes * self.horizon

    def budget_for(self, instance: RmabInstance) -> int:
        return instance.budget if self.budget is None else self.budget

    def eta_for(self, instance: RmabInstance) -> np.ndarray:
        return np.asarray(instance.eta if self.eta is None else self.eta, dtype=float)


@dataclass
class Counts:
    visit: np.ndarray  # (N, S, A)
    trans: np.ndarray  # (N, S, A, S)
    reward_sum: np.ndarray  # (N, S, A)


@dataclass
class TrialLog:
    states: np.ndarray  # (T, N) state at the start of each epoch
    actions: np.ndarray  # (T, N)
    rewards: np.ndarray  # (T, N)
    horizon: int
    tables: list[IndexTable] = field(default_factory=list)
    objectives: list[float] = field(default_factory=list)
    exploration_epochs: int = 0
    counts: Counts | None = None

    @property
    def T(self) -> int:
        return self.actions.shape[0]

    def activation_counts(self) -> np.ndarray:
        """Cumulative activations per arm, shape (T, N)."""
        return np.cumsum(self.actions, axis=0, dtype=np.int64)

    def episode_activations(self) -> np.ndarray:
        """Activations per episode and arm, shape (K, N)."""
        K = self.T // self.horizon
        return self.actions[:K * self.horizon].reshape(K, self.horizon, -1).sum(axis=1)


def init_counts(N: int, S: int, A: int = A) -> Counts:
    return Counts(np.zeros((N, S, A), dtype=np.int64), np.zeros((N, S, A, S), dtype=np.int64),
                  np.zeros((N, S, A)))


def update_counts(counts: Counts, n, s, a, r, s_next) -> Counts:
    """Return new counts with the transition records ``(n, s, a, r, s')`` added.

    Arguments may be scalars or equal-length arrays.
    """
    n, s, a, s_next = (np.atleast_1d(np.asarray(v, dtype=np.int64)) for v in (n, s, a, s_next))
    r = np.atleast_1d(np.asarray(r, dtype=float))
    visit = counts.visit.copy()
    trans = counts.trans.copy()
    reward_sum = counts.reward_sum.copy()
    np.add.at(visit, (n, s, a), 1)
    np.add.at(trans, (n, s, a, s_next), 1)
    np.add.at(reward_sum, (n, s, a), r)
    return Counts(visit, trans, reward_sum)


def update_from_block(counts: Counts, states: np.ndarray, actions: np.ndarray,
                      rewards: np.ndarray, next_states: np.ndarray) -> Counts:
    """Fold a block of epochs (arrays shaped (h, N)) into the counts."""
    if states.shape[0] == 0:
        return counts
    n = np.broadcast_to(np.arange(states.shape[1]), states.shape)
    return update_counts(counts, n.ravel(), states.ravel(), actions.ravel(),
                         rewards.ravel(), next_states.ravel())


def empirical_estimates(counts: Counts) -> tuple[np.ndarray, np.ndarray]:
    """Empirical kernels (uniform where unvisited) and mean rewards."""
    visit = counts.visit
    S = counts.trans.shape[-1]
    denom = np.maximum(visit, 1)[..., None]
    p_hat = counts.trans / denom
    p_hat = np.where(visit[..., None] > 0, p_hat, 1.0 / S)
    r_hat = counts.reward_sum / np.maximum(visit, 1)
    return p_hat, r_hat


def confidence_radius(count, k: int, H: int, epsilon: float, S: int, A: int, N: int):
    """Hoeffding radius ``sqrt(log(S A N (k-1) H / eps) / (2 C))``.

    ``C`` and ``k - 1`` are floored at 1 so the first episode is defined.
    """
    c = np.maximum(np.asarray(count, dtype=float), 1.0)
    log_term = math.log(S * A * N * max(k - 1, 1) * H / epsilon)
    return np.sqrt(max(log_term, 0.0) / (2.0 * c))


def confidence_model(counts: Counts, k: int, H: int, epsilon: float) -> ConfidenceModel:
    p_hat, r_hat = empirical_estimates(counts)
    N, S, _ = counts.visit.shape
    delta = confidence_radius(counts.visit, k, H, epsilon, S, A, N)
    return ConfidenceModel(p_hat, r_hat, delta)


def vacuous_ball_rows(conf: ConfidenceModel, n_activation_rows: int) -> np.ndarray:
    """Mask of ``<=`` rows of an extended LP that cannot bind.

    An upper ball row with edge 1 and a lower row with edge 0 hold for every
    nonnegative ``z``.
    """
    lo, hi = conf.bounds()
    return np.concatenate([np.zeros(n_activation_rows, dtype=bool),
                           (hi >= 1.0).ravel(), (lo <= 0.0).ravel()])


def plan_episode(counts: Counts, k: int, config: LearnerConfig, budget: int, eta: np.ndarray,
                 solver: HighsSolver | None = None) -> tuple[IndexTable, float]:
    """Optimistic planning for episode ``k``: build and solve the extended LP."""
    conf = confidence_model(counts, k, config.horizon, config.epsilon)
    with_fairness = config.algorithm is not Algorithm.G_FAIR_UCRL
    lp = build_elp(conf, budget, eta, include_fairness=with_fairness)
    method = _pick(lp) if config.lp_method == "auto" else config.lp_method
    if method == "highs":
        solver = solver or HighsSolver()
        n_act = lp.ub_groups["ball_upper"].start
        sol = solver.solve(lp, free_rows=vacuous_ball_rows(conf, n_act))
    else:
        sol = solve_lp(lp, method)
    if not sol.optimal:
        raise InfeasiblePlanError(f"infeasible plan in episode {k}: extended LP is {sol.status.value}")
    occ = occupancy_from_solution(sol, lp)
    return fair_indices(occ), sol.objective_value


def fairness_quotas(eta, H: int) -> np.ndarray:
    """Per-episode pull quotas ``ceil(H * eta_n)``, robust to float noise."""
    x = np.asarray(eta, dtype=float) * H
    return np.ceil(np.round(x, 9)).astype(int)


def greedy_exploration_schedule(eta, H: int, B: int, N: int,
                                rng: np.random.Generator | None = None) -> np.ndarray:
    """Forced-activation epochs that meet every arm's per-episode quota.

    Returns a ``(L, N)`` 0/1 array with ``L = max(ceil(sum q / B), max q)``
    and exactly ``min(B, N)`` active arms per row. Quota slots are laid out
    wrap-around over epochs, so no arm occupies two slots of one epoch; spare
    slots go round-robin to arms not already active in that epoch.
    """
    q = fairness_quotas(eta, H)
    if q.shape != (N,):
        raise ValueError("eta must have one entry per arm")
    width = min(B, N)
    total = int(q.sum())
    if total > H * width:
        raise ScheduleError("fairness quota exceeds episode budget")
    if total == 0:
        return np.zeros((0, N), dtype=np.int8)
    L = max(-(-total // width), int(q.max()))
    if L > H:
        raise ScheduleError("fairness quota exceeds episode budget")
    order = rng.permutation(N) if rng is not None else np.arange(N)
    sched = np.zeros((L, N), dtype=np.int8)
    slot = 0
    for n in order:
        for _ in range(q[n]):
            sched[slot % L, n] = 1
            slot += 1
    pointer = 0
    for t in range(L):
        while sched[t].sum() < width:
            n = order[pointer % N]
            pointer += 1
            if not sched[t, n]:
                sched[t, n] = 1
    return sched


class _Episode:
    """Buffers for one episode of a trial."""

    def __init__(self, H: int, N: int, rng: np.random.Generator):
        self.states = np.empty((H, N), dtype=np.int64)
        self.actions = np.empty((H, N), dtype=np.int8)
        self.rewards = np.empty((H, N))
        self.next_states = np.empty((H, N), dtype=np.int64)
        self.uniforms = rng.random((H, 3, N))
        self.h = 0

    def step(self, bank: ArmBank, state: np.ndarray, action: np.ndarray) -> np.ndarray:
        h = self.h
        u = self.uniforms[h]
        nxt, rew = bank.step(state, action, u[1], u[2])
        self.states[h] = state
        self.actions[h] = action
        self.rewards[h] = rew
        self.next_states[h] = nxt
        self.h += 1
        return nxt

    def block(self, start: int, stop: int):
        sl = slice(start, stop)
        return self.states[sl], self.actions[sl], self.rewards[sl], self.next_states[sl]


def offline_index_table(instance: RmabInstance, method: str = "auto") -> tuple[IndexTable, float]:
    """Full-knowledge index policy: solve the relaxed LP and read off indices."""
    lp = build_offline_lp(instance)
    sol = solve_lp(lp, method)
    if not sol.optimal:
        raise InfeasiblePlanError(f"offline LP is {sol.status.value}")
    return fair_indices(occupancy_from_solution(sol, lp)), sol.objective_value


def run_trial(instance: RmabInstance, config: LearnerConfig,
              rng: np.random.Generator | None = None,
              oracle_table: IndexTable | None = None) -> TrialLog:
    """Run ``config.algorithm`` for ``K * H`` epochs and return the log."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    algo = config.algorithm
    N, S, H, K = instance.num_arms, instance.num_states, config.horizon, config.episodes
    B = config.budget_for(instance)
    eta = config.eta_for(instance)
    bank = ArmBank(instance)
    if algo is Algorithm.ORACLE_INDEX and oracle_table is None:
        oracle_table, _ = offline_index_table(instance, config.lp_method)
    learning = algo in (Algorithm.FAIR_UCRL, Algorithm.G_FAIR_UCRL)
    solver = HighsSolver(warm_start=True) if learning else None
    counts = init_counts(N, S)
    state = instance.initial_states.astype(np.int64).copy()
    log = TrialLog(np.empty((K * H, N), dtype=np.int64), np.empty((K * H, N), dtype=np.int8),
                   np.empty((K * H, N)), H)
    zeros = np.zeros(N)
    for k in range(1, K + 1):
        schedule = None
        if algo is Algorithm.G_FAIR_UCRL:
            schedule = greedy_exploration_schedule(eta, H, B, N, rng)
        ep = _Episode(H, N, rng)
        if schedule is not None:
            L = min(schedule.shape[0], H)
            for h in range(L):
                state = ep.step(bank, state, schedule[h])
            log.exploration_epochs = L
            counts = update_from_block(counts, *ep.block(0, L))
        table = oracle_table
        if learning:
            table, obj = plan_episode(counts, k, config, B, eta, solver)
            log.tables.append(table)
            log.objectives.append(obj)
        start = ep.h
        arms = np.arange(N)
        while ep.h < H:
            tie = ep.uniforms[ep.h, 0]
            if table is None:
                action = top_b(zeros, B, tie)
            else:
                action = top_b(table.omega[arms, state], B, tie)
            state = ep.step(bank, state, action)
        if learning:
            counts = update_from_block(counts, *ep.block(start, H))
        sl = slice((k - 1) * H, k * H)
        log.states[sl] = ep.states
        log.actions[sl] = ep.actions
        log.rewards[sl] = ep.rewards
    log.counts = counts
    return log


def run_fair_ucrl(instance: RmabInstance, config: LearnerConfig,
                  rng: np.random.Generator | None = None) -> TrialLog:
    return run_trial(instance, replace(config, algorithm=Algorithm.FAIR_UCRL), rng)


def run_g_fair_ucrl(instance: RmabInstance, config: LearnerConfig,
                    rng: np.random.Generator | None = None) -> TrialLog:
    return run_trial(instance, replace(config, algorithm=Algorithm.G_FAIR_UCRL), rng)
