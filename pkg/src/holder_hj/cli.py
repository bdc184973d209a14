"""Experiment orchestration: config parsing, runners, summary and report.

Usage:
    holder-hj run --config config.json [--out DIR] [--seed N]
    holder-hj report --dir DIR

Exit codes: 0 all checks pass, 1 at least one check failed, 2 config or
usage error.  The env var HOLDER_HJ_THREADS caps BLAS parallelism; it is
applied before the numeric modules load.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List

EXPERIMENTS = (
    "conjugates",
    "benchmark-quadratic",
    "counterexample",
    "revholder",
    "hardy",
    "bridge",
    "moments",
    "gallery",
    "full-suite",
)


class ConfigError(ValueError):
    """Invalid experiment configuration (exit code 2)."""


@dataclass
class ExperimentConfig:
    """Flat numeric configuration with defaults for every field.

    Unknown keys in the config file are rejected.  Defaults reproduce the
    desk-scale acceptance runs.
    """

    experiment: str = "full-suite"
    seed: int = 20240 + 817
    out_dir: str | None = None

    # conjugates
    conjugate_trials: int = 50
    conjugate_probes: int = 20
    oracle_samples: int = 2001

    # benchmark-quadratic
    x_nodes: int = 401
    t_nodes: int = 401

    # counterexample family
    n_list: List[int] = field(default_factory=lambda: [4, 8, 16, 32])
    gamma: float = 0.75
    G: float = 1.5
    ce_x_nodes: int = 801
    ce_t_nodes: int = 801
    ce_window: List[float] = field(default_factory=lambda: [-2.0, 2.0])
    value_x_nodes: int = 1601
    value_t_nodes: int = 801
    value_window: List[float] = field(default_factory=lambda: [-0.5, 1.5])
    functional_nodes: int = 10_000
    dump_grids: str = "max"  # max | all | none

    # reverse Holder / Hardy
    revholder_instances: int = 100
    revholder_samples: int = 400
    backoff: float = 0.95

    # bridge / moments
    p: float = 1.5
    delta: float = 1.0
    dt: float = 1e-3
    paths: int = 20_000
    horizons: List[float] = field(default_factory=lambda: [0.25, 0.5, 1.0])
    sweep_steps: int = 1000
    sweep_paths: int = 20_000
    moment_pairs: int = 30
    moment_paths: int = 8_000
    moment_r: float = 1.5

    # gallery
    residual_step: float = 1e-3
    residual_margin: float = 0.1

    # tolerance / slack overrides
    slack: float = 1.25

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"unknown experiment {self.experiment!r}; pick one of {EXPERIMENTS}"
            )
        if self.dump_grids not in ("max", "all", "none"):
            raise ConfigError("dump_grids must be one of max|all|none")
        if self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        numeric_positive = {
            "conjugate_trials": self.conjugate_trials,
            "x_nodes": self.x_nodes,
            "t_nodes": self.t_nodes,
            "ce_x_nodes": self.ce_x_nodes,
            "ce_t_nodes": self.ce_t_nodes,
            "value_x_nodes": self.value_x_nodes,
            "value_t_nodes": self.value_t_nodes,
            "functional_nodes": self.functional_nodes,
            "revholder_instances": self.revholder_instances,
            "revholder_samples": self.revholder_samples,
            "paths": self.paths,
            "sweep_paths": self.sweep_paths,
            "moment_paths": self.moment_paths,
            "dt": self.dt,
            "slack": self.slack,
        }
        for name, value in numeric_positive.items():
            if value <= 0:
                raise ConfigError(f"{name} must be positive, got {value}")
        if not 0.0 < self.backoff < 1.0:
            raise ConfigError("backoff must lie in (0, 1)")
        if not 1.0 < self.p < 2.0:
            raise ConfigError("p must lie in (1, 2) for the bridge experiments")
        if len(self.n_list) < 1 or any(n < 1 for n in self.n_list):
            raise ConfigError("n_list must hold positive integers")
        if len(self.horizons) < 2:
            raise ConfigError("horizons needs at least two entries")


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> ExperimentConfig:
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return ExperimentConfig(**raw)


def main(argv=None) -> int:
    threads = os.environ.get("HOLDER_HJ_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)

    parser = argparse.ArgumentParser(
        prog="holder-hj",
        description="Holder-regularity verification experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a named experiment pipeline")
    run_p.add_argument("--config", required=True, help="JSON config path")
    run_p.add_argument("--out", default=None, help="artifact directory override")
    run_p.add_argument("--seed", type=int, default=None, help="seed override")

    rep_p = sub.add_parser("report", help="render a text report from summary.csv")
    rep_p.add_argument("--dir", required=True, help="artifact directory")

    args = parser.parse_args(argv)

    if args.command == "run":
        try:
            config = load_config(args.config)
            if args.out is not None:
                config.out_dir = args.out
            if args.seed is not None:
                if args.seed < 0:
                    raise ConfigError("seed must be nonnegative")
                config.seed = args.seed
            if config.out_dir is None:
                raise ConfigError("no output directory (set out_dir or pass --out)")
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        from holder_hj import experiments

        failed = experiments.run_experiment(config)
        return 1 if failed else 0

    if args.command == "report":
        from holder_hj import experiments

        try:
            text = experiments.emit_report(Path(args.dir))
        except FileNotFoundError as exc:
            print(f"missing artifact: {exc}", file=sys.stderr)
            return 2
        print(text, end="")
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
