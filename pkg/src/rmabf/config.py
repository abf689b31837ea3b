"""JSON experiment configs.

A config names the arms (``env`` list, ``instance`` list of explicit arms,
or a ``preset``), the budget and floors, and the run parameters::

    {"env": [{"kind": "birth-death", "count": 10, "lam": 3, "p": 0.05}],
     "budget": 3, "eta": 0.1, "episodes": 60, "algorithm": "fair-ucrl"}
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import envs
from .errors import ConfigError
from .learner import Algorithm, LearnerConfig
from .mdp import ArmModel, RmabInstance, validate_instance

ENV_KINDS = {
    "birth-death": envs.BirthDeath,
    "cpap": envs.Cpap,
    "rte": envs.Rte,
    "lmss": envs.Lmss,
}

PRESETS = {
    "synthetic": envs.synthetic_instance,
    "cpap": envs.cpap_instance,
    "rte": envs.rte_instance,
    "lmss": envs.lmss_instance,
}

DEFAULT_EPISODES = 60
DEFAULT_TRIALS = 100

TOP_KEYS = {"env", "instance", "preset", "budget", "eta", "initial_states", "episodes", "horizon",
            "epsilon", "algorithm", "trials", "seed", "lp_method", "benchmark", "replicas", "sweep"}


@dataclass(frozen=True)
class BenchmarkSettings:
    horizon: int = 20000
    replicas: int = 32
    burn_in: int = 1000


@dataclass(frozen=True)
class SweepSettings:
    horizon: int = 4000
    burn_in: int = 200
    trials: int = 50


@dataclass(frozen=True)
class ExperimentConfig:
    instance: RmabInstance
    episodes: int
    horizon: int
    epsilon: float = 0.1
    algorithm: Algorithm = Algorithm.FAIR_UCRL
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    lp_method: str = "auto"
    benchmark: BenchmarkSettings = field(default_factory=BenchmarkSettings)
    replicas: tuple[int, ...] = (1, 10)
    sweep: SweepSettings = field(default_factory=SweepSettings)

    def learner(self, algorithm=None, seed=None) -> LearnerConfig:
        return LearnerConfig(self.episodes, self.horizon, self.epsilon,
                             self.seed if seed is None else seed,
                             self.algorithm if algorithm is None else algorithm,
                             lp_method=self.lp_method)


def _algorithm(value) -> Algorithm:
    try:
        return Algorithm(value)
    except ValueError:
        valid = ", ".join(a.value for a in Algorithm)
        raise ConfigError(f"algorithm: unknown value {value!r}; valid values are {valid}") from None


def _make(cls, fields: dict, where: str):
    known = {f.name for f in dataclasses.fields(cls)}
    extra = set(fields) - known
    if extra:
        raise ConfigError(f"{where}: unknown field(s) {', '.join(sorted(extra))}")
    try:
        return cls(**fields)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _env_arms(entries) -> list[ArmModel]:
    if not isinstance(entries, list) or not entries:
        raise ConfigError("env: expected a non-empty list")
    arms = []
    for i, entry in enumerate(entries):
        where = f"env[{i}]"
        if not isinstance(entry, dict) or "kind" not in entry:
            raise ConfigError(f"{where}: expected an object with a 'kind' field")
        entry = dict(entry)
        kind = entry.pop("kind")
        count = entry.pop("count", 1)
        if kind not in ENV_KINDS:
            raise ConfigError(f"{where}.kind: unknown kind {kind!r}; valid kinds are "
                              + ", ".join(ENV_KINDS))
        if not isinstance(count, int) or count < 1:
            raise ConfigError(f"{where}.count: expected a positive integer")
        spec = _make(ENV_KINDS[kind], entry, where)
        try:
            arm = envs.build_arm(spec)
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None
        arms.extend([arm] * count)
    return arms


def _inline_arms(entries) -> list[ArmModel]:
    if not isinstance(entries, list) or not entries:
        raise ConfigError("instance: expected a non-empty list of arms")
    arms = []
    for i, entry in enumerate(entries):
        try:
            arms.append(ArmModel(np.asarray(entry["transition"], dtype=float),
                                 np.asarray(entry["reward_mean"], dtype=float),
                                 entry.get("reward_dist", "bernoulli")))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"instance[{i}]: {exc}") from None
    return arms


def _instance(doc: dict) -> RmabInstance:
    sources = [k for k in ("env", "instance", "preset") if k in doc]
    if len(sources) != 1:
        raise ConfigError("exactly one of 'env', 'instance' or 'preset' is required")
    base = None
    if "preset" in doc:
        p = doc["preset"]
        name, kwargs = (p, {}) if isinstance(p, str) else (p.get("name"), dict(p))
        kwargs.pop("name", None)
        if name not in PRESETS:
            raise ConfigError(f"preset: unknown preset {name!r}; valid presets are "
                              + ", ".join(PRESETS))
        try:
            base = PRESETS[name](**kwargs)
        except TypeError as exc:
            raise ConfigError(f"preset: {exc}") from None
        arms = list(base.arms)
    elif "env" in doc:
        arms = _env_arms(doc["env"])
    else:
        arms = _inline_arms(doc["instance"])
    N = len(arms)

    if "budget" in doc:
        budget = doc["budget"]
    elif base is not None:
        budget = base.budget
    else:
        raise ConfigError("budget: required")
    if "eta" in doc:
        try:
            eta = np.asarray(doc["eta"], dtype=float)
        except (TypeError, ValueError):
            raise ConfigError("eta: expected a number or a list of numbers") from None
        if eta.ndim == 0:
            eta = np.full(N, float(eta))
    elif base is not None:
        eta = base.eta
    else:
        eta = np.zeros(N)
    if eta.shape != (N,):
        raise ConfigError(f"eta: eta/arms length mismatch ({eta.size} values for {N} arms)")
    init = doc.get("initial_states", None if base is None else base.initial_states)
    inst = RmabInstance(tuple(arms), budget, eta, init)
    report = validate_instance(inst)
    if not report.ok:
        raise ConfigError("invalid instance:\n  " + "\n  ".join(report.messages()))
    return inst


def parse_config(doc) -> ExperimentConfig:
    """Validate a decoded JSON document and apply defaults."""
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected a JSON object")
    unknown = set(doc) - TOP_KEYS
    if unknown:
        raise ConfigError(f"top level: unknown field(s) {', '.join(sorted(unknown))}")
    inst = _instance(doc)
    K, H = doc.get("episodes"), doc.get("horizon")
    if K is None and H is None:
        K = H = DEFAULT_EPISODES
    K = H if K is None else K
    H = K if H is None else H
    for name, val in (("episodes", K), ("horizon", H), ("trials", doc.get("trials", 1))):
        if not isinstance(val, int) or val < 1:
            raise ConfigError(f"{name}: expected a positive integer, got {val!r}")
    epsilon = doc.get("epsilon", 0.1)
    if not isinstance(epsilon, (int, float)) or not 0 < epsilon < 1:
        raise ConfigError(f"epsilon: expected a number in (0, 1), got {epsilon!r}")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed: expected a nonnegative integer, got {seed!r}")
    lp_method = doc.get("lp_method", "auto")
    if lp_method not in ("auto", "simplex", "highs"):
        raise ConfigError(f"lp_method: expected auto, simplex or highs, got {lp_method!r}")
    replicas = doc.get("replicas", [1, 10])
    if (not isinstance(replicas, list) or not replicas
            or not all(isinstance(r, int) and r >= 1 for r in replicas)):
        raise ConfigError("replicas: expected a non-empty list of positive integers")
    return ExperimentConfig(
        instance=inst, episodes=K, horizon=H, epsilon=float(epsilon),
        algorithm=_algorithm(doc.get("algorithm", "fair-ucrl")),
        trials=doc.get("trials", DEFAULT_TRIALS), seed=seed, lp_method=lp_method,
        benchmark=_make(BenchmarkSettings, doc.get("benchmark", {}), "benchmark"),
        replicas=tuple(replicas),
        sweep=_make(SweepSettings, doc.get("sweep", {}), "sweep"))


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return parse_config(doc)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
