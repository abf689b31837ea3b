"""``rmabf`` command-line entry point.

Subcommands: ``plan`` (offline LP and index table), ``learn`` (Monte-Carlo
learning curves), ``sweep`` (optimality gap versus replication) and
``oracle`` (brute-force cross-check of the offline LP on single arms).
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys

from .config import ExperimentConfig, load_config
from .csvout import ORACLE_HEADER, write_csv, write_rows
from .errors import RmabfError
from .harness import (brute_force_value, offline_benchmark, optimality_gap_sweep,
                      run_monte_carlo)
from .learner import Algorithm, offline_index_table
from .lp import build_offline_lp, solve_lp
from .mdp import RmabInstance


log = logging.getLogger("rmabf")


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rmabf", description="Restless bandits with fairness floors.")
    sub = p.add_subparsers(dest="command", required=True, metavar="{plan,learn,sweep,oracle}")
    helps = {
        "plan": "solve the offline LP and write the index table",
        "learn": "run Monte-Carlo learning trials and write aggregate curves",
        "sweep": "measure the index policy's optimality gap as arms are replicated",
        "oracle": "cross-check the offline LP against brute force on single arms",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text, description=text)
        sp.add_argument("--config", required=True, metavar="PATH")
        sp.add_argument("--out", required=True, metavar="PATH")
        sp.add_argument("--algo", choices=[a.value for a in Algorithm], metavar="NAME")
        sp.add_argument("--trials", type=_positive, metavar="N")
        sp.add_argument("--seed", type=_nonneg, metavar="N")
        sp.add_argument("--jobs", type=_positive, default=1, metavar="N")
    return p


def _plan(cfg: ExperimentConfig, args) -> None:
    table, value = offline_index_table(cfg.instance, cfg.lp_method)
    write_csv(table, args.out)
    print(f"lp_value={value:.9g}")


def _learn(cfg: ExperimentConfig, args) -> None:
    seed = cfg.seed if args.seed is None else args.seed
    trials = cfg.trials if args.trials is None else args.trials
    learner = cfg.learner(algorithm=args.algo, seed=seed)
    b = cfg.benchmark
    bench = offline_benchmark(cfg.instance, b.horizon, b.replicas, b.burn_in, seed, cfg.lp_method)
    log.info("benchmark: lp=%.6g index=%.6g", bench.lp_value, bench.index_value)
    metrics = run_monte_carlo(cfg.instance, learner, trials, bench, jobs=args.jobs)
    write_csv(metrics, args.out)


def _sweep(cfg: ExperimentConfig, args) -> None:
    s = cfg.sweep
    seed = cfg.seed if args.seed is None else args.seed
    trials = s.trials if args.trials is None else args.trials
    points = optimality_gap_sweep(cfg.instance, cfg.replicas, s.horizon, s.burn_in, trials,
                                  seed, cfg.lp_method)
    write_csv(points, args.out)


def _single_arm(inst: RmabInstance, n: int) -> RmabInstance:
    return RmabInstance((inst.arms[n],), 1, inst.eta[n:n + 1], inst.initial_states[n:n + 1])


def _oracle(cfg: ExperimentConfig, args) -> None:
    inst = cfg.instance
    if inst.num_states > 3:
        raise RmabfError(f"oracle needs at most 3 states, instance has {inst.num_states}")
    rows = []
    for n in range(inst.num_arms):
        single = _single_arm(inst, n)
        bf = brute_force_value(single)
        sol = solve_lp(build_offline_lp(single), cfg.lp_method)
        if not sol.optimal:
            raise RmabfError(f"arm {n}: offline LP is {sol.status.value}")
        diff = abs(sol.objective_value - bf.value)
        rows.append([n, inst.eta[n], sol.objective_value, bf.value, bf.grid_error, diff,
                     diff <= max(1e-4, bf.grid_error)])
    write_rows(args.out, ORACLE_HEADER, rows)


COMMANDS = {"plan": _plan, "learn": _learn, "sweep": _sweep, "oracle": _oracle}


def _setup_logging() -> None:
    level = os.environ.get("RMABF_LOG", "WARNING").upper()
    if not isinstance(logging.getLevelName(level), int):
        level = "WARNING"
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)  # usage errors exit with status 2
    try:
        cfg = load_config(args.config)
        if args.algo is not None:
            cfg = dataclasses.replace(cfg, algorithm=Algorithm(args.algo))
        COMMANDS[args.command](cfg, args)
    except (RmabfError, ValueError) as exc:
        print(f"rmabf: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
