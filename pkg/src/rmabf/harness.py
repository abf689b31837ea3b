"""Regret bookkeeping, Monte-Carlo aggregation and reference values.

Two benchmarks are used for reward regret: the offline LP optimum (an upper
bound on any feasible policy) and the simulated long-run average of the
full-knowledge index policy. Fairness violation is reported signed, so
over-service shows up as negative values.
"""

from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .envs import ArmBank
from .errors import InfeasiblePlanError
from .index_policy import fair_indices, top_b
from .learner import Algorithm, LearnerConfig, TrialLog, run_trial
from .lp import build_offline_lp, occupancy_from_solution, solve_lp
from .mdp import RmabInstance

log = logging.getLogger(__name__)


# ---------------------------------------------------------------- series

def _step_rewards(source) -> np.ndarray:
    r = source.rewards if isinstance(source, TrialLog) else np.asarray(source, dtype=float)
    return r.sum(axis=1) if r.ndim == 2 else r


def reward_regret(source, v_star: float) -> np.ndarray:
    """Cumulative ``t * v_star - collected reward``.

    ``source`` is a :class:`TrialLog`, a ``(T,)`` array of per-epoch totals
    or a ``(T, N)`` array of per-arm rewards.
    """
    if v_star < 0:
        raise ValueError(f"benchmark must be nonnegative, got {v_star}")
    r = _step_rewards(source)
    t = np.arange(1, r.shape[0] + 1)
    return t * float(v_star) - np.cumsum(r)


def fairness_violation(source, eta) -> np.ndarray:
    """Per-arm cumulative ``t * eta_n - activations_n``, shape ``(T, N)``; signed."""
    a = source.actions if isinstance(source, TrialLog) else np.asarray(source)
    t = np.arange(1, a.shape[0] + 1)[:, None]
    return t * np.asarray(eta, dtype=float) - np.cumsum(a, axis=0, dtype=np.int64)


@dataclass(frozen=True)
class Benchmark:
    lp_value: float
    index_value: float
    index_stderr: float = 0.0


@dataclass
class RegretSeries:
    cum_reward: np.ndarray  # (T,)
    reward_regret_lp: np.ndarray  # (T,)
    reward_regret_index: np.ndarray  # (T,)
    fairness_violation: np.ndarray  # (T, N)
    activation_fraction: np.ndarray  # (T, N)

    @classmethod
    def from_log(cls, trial: TrialLog, benchmark: Benchmark, eta) -> "RegretSeries":
        r = _step_rewards(trial)
        counts = trial.activation_counts()
        t = np.arange(1, trial.T + 1)
        return cls(np.cumsum(r), reward_regret(r, benchmark.lp_value),
                   reward_regret(r, benchmark.index_value),
                   fairness_violation(trial, eta), counts / t[:, None])

    @property
    def T(self) -> int:
        return self.cum_reward.shape[0]


# ------------------------------------------------------------ aggregation

@dataclass
class AggregateMetrics:
    """Mean and standard error over trials, per epoch.

    Cumulative activation statistics are kept as exact integer sums, and
    reward sums are taken over sorted values, so the result does not depend
    on the order in which trials finish.
    """

    trials: int
    eta: np.ndarray
    benchmark: Benchmark
    cum_reward_mean: np.ndarray
    cum_reward_stderr: np.ndarray
    activations_mean: np.ndarray  # (T, N) mean cumulative activation count
    activations_stderr: np.ndarray

    @property
    def T(self) -> int:
        return self.cum_reward_mean.shape[0]

    @property
    def t(self) -> np.ndarray:
        return np.arange(1, self.T + 1)

    @property
    def reward_regret_lp(self) -> np.ndarray:
        return self.t * self.benchmark.lp_value - self.cum_reward_mean

    @property
    def reward_regret_index(self) -> np.ndarray:
        return self.t * self.benchmark.index_value - self.cum_reward_mean

    @property
    def reward_regret_stderr(self) -> np.ndarray:
        # the benchmarks are constants, so regret shares the reward's spread
        return self.cum_reward_stderr

    @property
    def activation_fraction(self) -> np.ndarray:
        return self.activations_mean / self.t[:, None]

    @property
    def fairness_violation(self) -> np.ndarray:
        return self.t[:, None] * self.eta - self.activations_mean

    @property
    def fairness_violation_stderr(self) -> np.ndarray:
        return self.activations_stderr


class MetricsAccumulator:
    """Streams trial logs into :class:`AggregateMetrics`."""

    def __init__(self, eta, benchmark: Benchmark):
        self.eta = np.asarray(eta, dtype=float)
        self.benchmark = benchmark
        self._cum_rewards: list[np.ndarray] = []
        self._s1 = None
        self._s2 = None

    @property
    def trials(self) -> int:
        return len(self._cum_rewards)

    def add(self, trial: TrialLog) -> None:
        self._cum_rewards.append(np.cumsum(_step_rewards(trial)))
        c = trial.activation_counts()
        if self._s1 is None:
            self._s1 = np.zeros_like(c)
            self._s2 = np.zeros_like(c)
        self._s1 += c
        self._s2 += c * c

    def result(self) -> AggregateMetrics:
        M = self.trials
        if M < 1:
            raise ValueError("no trials to aggregate")
        R = np.sort(np.stack(self._cum_rewards), axis=0)
        mean = R.mean(axis=0)
        r_se = R.std(axis=0, ddof=1) / np.sqrt(M) if M > 1 else np.zeros_like(mean)
        s1, s2 = self._s1, self._s2
        if M > 1:
            # exact integer numerator of the sample variance
            num = M * s2 - s1 * s1
            a_se = np.sqrt(np.maximum(num, 0) / (M * (M - 1.0))) / np.sqrt(M)
        else:
            a_se = np.zeros(s1.shape)
        return AggregateMetrics(M, self.eta, self.benchmark, mean, r_se, s1 / M, a_se)


def aggregate(logs: Sequence[TrialLog], eta, benchmark: Benchmark) -> AggregateMetrics:
    acc = MetricsAccumulator(eta, benchmark)
    for trial in logs:
        acc.add(trial)
    return acc.result()


# ------------------------------------------------------------- benchmarks

def effective_instance(instance: RmabInstance, config: LearnerConfig) -> RmabInstance:
    """The instance with any budget/eta overrides of ``config`` applied."""
    if config.budget is None and config.eta is None:
        return instance
    return dataclasses.replace(instance, budget=config.budget_for(instance),
                               eta=config.eta_for(instance))


def _solve_offline(instance: RmabInstance, method: str):
    lp = build_offline_lp(instance)
    sol = solve_lp(lp, method)
    if not sol.optimal:
        raise InfeasiblePlanError(f"offline LP is {sol.status.value}")
    return occupancy_from_solution(sol, lp), sol.objective_value


def simulate_index_policy(instance: RmabInstance, omega: np.ndarray, horizon: int,
                          replicas: int, burn_in: int, rng: np.random.Generator,
                          record: Callable | None = None) -> np.ndarray:
    """Average reward per epoch after ``burn_in`` for ``replicas`` independent runs.

    All replicas advance together; ``record(t, states, actions)`` sees the
    ``(R, N)`` arrays of every epoch.
    """
    if not 0 <= burn_in < horizon:
        raise ValueError("burn_in must lie in [0, horizon)")
    bank = ArmBank(instance)
    N = instance.num_arms
    arms = np.arange(N)
    state = np.tile(instance.initial_states.astype(np.int64), (replicas, 1))
    totals = np.zeros(replicas)
    for t in range(horizon):
        u = rng.random((3, replicas, N))
        action = top_b(omega[arms, state], instance.budget, u[0])
        nxt, rew = bank.step(state, action, u[1], u[2])
        if record is not None:
            record(t, state, action)
        if t >= burn_in:
            totals += rew.sum(axis=1)
        state = nxt
    return totals / (horizon - burn_in)


def offline_benchmark(instance: RmabInstance, horizon: int = 20000, replicas: int = 32,
                      burn_in: int = 1000, seed: int = 0, method: str = "auto") -> Benchmark:
    """LP upper bound plus the simulated average of the full-knowledge index policy."""
    occ, lp_value = _solve_offline(instance, method)
    table = fair_indices(occ)
    avg = simulate_index_policy(instance, table.omega, horizon, replicas, burn_in,
                                np.random.default_rng(seed))
    se = float(avg.std(ddof=1) / np.sqrt(replicas)) if replicas > 1 else 0.0
    return Benchmark(float(lp_value), float(avg.mean()), se)


# --------------------------------------------------------------- oracle

@dataclass(frozen=True)
class BruteForceResult:
    value: float
    activation: np.ndarray  # per-state activation probability of the best policy
    grid_error: float  # improvement won by the last refinement pass
    coarse: bool


def _evaluate_policies(P0, P1, r0, r1, W):
    """Stationary reward and activation fraction of every row of ``W``."""
    M, S = W.shape
    w = W[:, :, None]
    P = w * P1 + (1.0 - w) * P0
    Amat = np.swapaxes(np.eye(S) - P, 1, 2).copy()
    Amat[:, -1, :] = 1.0
    det = np.linalg.det(Amat)
    ok = np.abs(det) > 1e-12
    Amat[~ok] = np.eye(S)
    b = np.zeros((M, S, 1))
    b[:, -1] = 1.0
    pi = np.linalg.solve(Amat, b)[..., 0]
    ok &= np.all(pi > -1e-9, axis=1)
    value = np.einsum("ms,ms->m", pi, W * r1 + (1.0 - W) * r0)
    act = np.einsum("ms,ms->m", pi, W)
    return value, act, ok


def _grid_best(arm, W, eta, cap, chunk=200_000):
    P0, P1 = arm.transition[0], arm.transition[1]
    r0, r1 = arm.reward_mean[:, 0], arm.reward_mean[:, 1]
    best_v, best_w = -np.inf, None
    for i in range(0, W.shape[0], chunk):
        Wc = W[i:i + chunk]
        v, act, ok = _evaluate_policies(P0, P1, r0, r1, Wc)
        ok &= (act >= eta - 1e-12) & (act <= cap + 1e-12)
        if ok.any():
            j = int(np.argmax(np.where(ok, v, -np.inf)))
            if v[j] > best_v:
                best_v, best_w = float(v[j]), Wc[j]
    return best_v, best_w


def _mesh(axes) -> np.ndarray:
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))


def brute_force_value(instance: RmabInstance, resolution: float = 0.01, refinements: int = 3,
                      activation_cap: float | None = None, tol: float = 1e-3) -> BruteForceResult:
    """Best stationary randomized single-arm policy by grid search.

    Per-state activation probabilities are enumerated on a grid of step
    ``resolution``; each refinement pass searches a ten times finer grid
    around the incumbent. Activation fractions must lie in
    ``[eta, activation_cap]`` (the cap defaults to ``min(B, 1)``).
    """
    if instance.num_arms != 1 or instance.num_states > 3:
        raise ValueError("brute force supports a single arm with at most 3 states")
    arm = instance.arms[0]
    S = instance.num_states
    eta = float(instance.eta[0])
    cap = min(float(instance.budget), 1.0) if activation_cap is None else float(activation_cap)
    n = int(round(1.0 / resolution))
    grid = np.linspace(0.0, 1.0, n + 1)
    best_v, best_w = _grid_best(arm, _mesh([grid] * S), eta, cap)
    if best_w is None:
        raise ValueError("no feasible policy on the grid")
    step, err = resolution, float("inf")
    for _ in range(refinements):
        fine = step / 10.0
        axes = [np.clip(w + fine * np.arange(-10, 11), 0.0, 1.0) for w in best_w]
        v, w = _grid_best(arm, _mesh(axes), eta, cap)
        err = max(v - best_v, 0.0)
        if v > best_v:
            best_v, best_w = v, w
        step = fine
    if refinements == 0:
        err = resolution
    return BruteForceResult(best_v, np.array(best_w), err, err > tol)


# ------------------------------------------------------------ Monte Carlo

def _trial_job(args):
    instance, config, seq, table = args
    return run_trial(instance, config, np.random.default_rng(seq), table)


def run_monte_carlo(instance: RmabInstance, config: LearnerConfig, trials: int = 100,
                    benchmark: Benchmark | None = None, jobs: int = 1,
                    on_trial: Callable[[int, TrialLog], None] | None = None) -> AggregateMetrics:
    """Run ``trials`` independently seeded trials and aggregate their regret series.

    Trial ``i`` draws from the ``i``-th child of ``SeedSequence(config.seed)``,
    so results do not depend on ``jobs``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    inst = effective_instance(instance, config)
    if benchmark is None:
        benchmark = offline_benchmark(inst, seed=config.seed, method=config.lp_method)
    table = None
    if config.algorithm is Algorithm.ORACLE_INDEX:
        occ, _ = _solve_offline(inst, config.lp_method)
        table = fair_indices(occ)
    seqs = np.random.SeedSequence(config.seed).spawn(trials)
    acc = MetricsAccumulator(inst.eta, benchmark)
    jobs_args = ((inst, config, s, table) for s in seqs)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            logs = pool.map(_trial_job, jobs_args)
            for i, trial in enumerate(logs):
                acc.add(trial)
                if on_trial is not None:
                    on_trial(i, trial)
    else:
        for i, args in enumerate(jobs_args):
            trial = _trial_job(args)
            acc.add(trial)
            if on_trial is not None:
                on_trial(i, trial)
            log.debug("trial %d/%d done", i + 1, trials)
    return acc.result()


# ------------------------------------------------------------------ sweep

def replicate(base: RmabInstance, rho: int) -> RmabInstance:
    """``rho`` copies of every arm (class-contiguous) with budget ``rho * B``."""
    if rho < 1:
        raise ValueError("replica count must be positive")
    arms = tuple(arm for arm in base.arms for _ in range(rho))
    return RmabInstance(arms, base.budget * rho, np.repeat(base.eta, rho),
                        np.repeat(base.initial_states, rho))


@dataclass
class SweepPoint:
    rho: int
    arms: int
    budget: int
    lp_bound: float
    index_mean: float
    index_stderr: float
    gap: float  # per arm
    gap_stderr: float
    occupancy_path: np.ndarray  # (horizon, classes, S, A), replica-averaged X / rho
    occupancy_target: np.ndarray  # (classes, S, A), the LP optimum

    def attractor_distance(self, tail: float = 0.1) -> float:
        """Largest deviation of the late-horizon mean occupancy from the LP optimum."""
        k = max(1, int(self.occupancy_path.shape[0] * tail))
        late = self.occupancy_path[-k:].mean(axis=0)
        return float(np.max(np.abs(late - self.occupancy_target)))


def optimality_gap_sweep(base: RmabInstance, rhos: Sequence[int], horizon: int = 4000,
                         burn_in: int = 200, trials: int = 50, seed: int = 0,
                         method: str = "auto") -> list[SweepPoint]:
    """Per-arm gap between the LP bound and the index policy as arms are replicated.

    Each replicated instance gets its own LP solve and index table, i.e. the
    policy one would deploy at that size. The occupancy path is averaged
    within each class so it can be compared against the class-averaged LP
    optimum.
    """
    N, S = base.num_arms, base.num_states
    out = []
    seqs = np.random.SeedSequence(seed).spawn(len(rhos))
    for rho, seq in zip(rhos, seqs):
        inst = replicate(base, rho)
        occ, lp_bound = _solve_offline(inst, method)
        target = occ.state_action().reshape(N, rho, S, 2).mean(axis=1)
        path = np.zeros((horizon, N, S, 2))
        cls = np.repeat(np.arange(N), rho)

        def record(t, states, actions, path=path, cls=cls, rho=rho):
            flat = ((cls * S + states) * 2 + actions).ravel()
            counts = np.bincount(flat, minlength=N * S * 2)
            path[t] = counts.reshape(N, S, 2) / (rho * states.shape[0])

        avg = simulate_index_policy(inst, fair_indices(occ).omega, horizon, trials, burn_in,
                                    np.random.default_rng(seq), record)
        mean = float(avg.mean())
        se = float(avg.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
        scale = rho * N
        out.append(SweepPoint(rho, inst.num_arms, inst.budget, float(lp_bound), mean, se,
                              (lp_bound - mean) / scale, se / scale, path, target))
    return out
