"""Command-line entry point: ``adaquant simulate | fit | diagnose | synth``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import diagnostics
from .config import ConfigError, RunConfig, load_config
from .datasets import DatasetError, ingest_csv, synthetic_quantized, write_csv
from .simulation import (fit_stream, run_sweep, write_fit_csv, write_metrics_csv,
                         write_summary_json)

logger = logging.getLogger("adaquant")

LOG_ENV = "ADAQUANT_LOG_LEVEL"


def _out_dir(args, config: RunConfig) -> Path:
    out = args.out or config.output_dir
    if out is None:
        raise ConfigError(["output_dir: pass --out or set output_dir in the config"])
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_simulate(config: RunConfig, out: Path, seeds: int | None = None, jobs: int = 1) -> int:
    """Run one trajectory per seed; write a metrics CSV per seed and ``summary.json``."""
    n_seeds = config.seeds if seeds is None else seeds
    seed_list = list(range(config.seed, config.seed + n_seeds))
    runs = run_sweep(config.scenario_spec(), seed_list, config.quantizer(), config.ada_config(),
                     config.algorithm, jobs=jobs)
    summaries = []
    for m in runs:
        write_metrics_csv(m, out / f"metrics_seed{m.seed}.csv")
        summaries.append(m.summary())
        logger.info("seed %d: %s", m.seed, summaries[-1])
    if len(summaries) == 1:
        summary = summaries[0]
    else:
        summary = {"algorithm": config.algorithm, "steps": config.steps, "seeds": seed_list,
                   "runs": summaries}
        for key in ("final_err_sq", "rate_slope", "final_avg_regret", "final_accuracy"):
            vals = [s[key] for s in summaries if s.get(key) is not None]
            if vals:
                summary[f"median_{key}"] = float(np.median(vals))
    write_summary_json(summary, out / "summary.json")
    failed = [m.seed for m in runs if m.failed]
    if failed:
        logger.error("numerical failure for seeds %s", failed)
        return 2
    return 0


def cmd_fit(config: RunConfig, data: Path, out: Path) -> int:
    """Stream a labelled CSV through the estimator prequentially."""
    q = config.quantizer()
    rows = ingest_csv(data, config.dimension, q.m)
    result = fit_stream(rows, q, config.ada_config(), config.algorithm)
    if result.steps == 0:
        print(f"error: {data}: no rows", file=sys.stderr)
        return 1
    write_fit_csv(result, out / "fit_trajectory.csv")
    write_summary_json({"final_theta": result.final_theta.tolist(),
                        "final_accuracy": float(result.accuracy[-1]),
                        "seed": config.seed, "steps": result.steps,
                        "algorithm": config.algorithm}, out / "summary.json")
    return 0


def cmd_diagnose(config: RunConfig, strict: bool = False) -> int:
    results = diagnostics.run_all(config.quantizer(), config.ada_config(), config.seed, strict)
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail}")
    return 0 if all(r.passed for r in results) else 1


def cmd_synth(config: RunConfig, out: Path, rows: int, flip: float) -> int:
    if config.theta_true is None:
        raise ConfigError(["theta_true: required to synthesize data"])
    X, y = synthetic_quantized(config.theta_true, config.quantizer(), config.noise_model(),
                               rows, config.seed, flip_fraction=flip)
    write_csv(out, X, y)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adaquant", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run simulated trajectories")
    s.add_argument("--config", required=True)
    s.add_argument("--seeds", type=int, default=None, help="number of consecutive seeds")
    s.add_argument("--jobs", type=int, default=1, help="worker processes for multi-seed runs")
    s.add_argument("--out", default=None)

    f = sub.add_parser("fit", help="prequential fit of a labelled CSV")
    f.add_argument("--config", required=True)
    f.add_argument("--data", required=True)
    f.add_argument("--out", default=None)

    d = sub.add_parser("diagnose", help="run the Monte-Carlo self-checks")
    d.add_argument("--config", required=True)
    d.add_argument("--strict", action="store_true", help="tighter tolerances")

    g = sub.add_parser("synth", help="write a synthetic f1..fd,label CSV from theta_true")
    g.add_argument("--config", required=True)
    g.add_argument("--rows", type=int, required=True)
    g.add_argument("--flip", type=float, default=0.0, help="fraction of adversarially flipped labels")
    g.add_argument("--out", required=True)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get(LOG_ENV, "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.command == "simulate":
            return cmd_simulate(config, _out_dir(args, config), args.seeds, args.jobs)
        if args.command == "fit":
            return cmd_fit(config, Path(args.data), _out_dir(args, config))
        if args.command == "diagnose":
            return cmd_diagnose(config, args.strict)
        return cmd_synth(config, Path(args.out), args.rows, args.flip)
    except (ConfigError, DatasetError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
