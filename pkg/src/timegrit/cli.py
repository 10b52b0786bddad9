"""Benchmark command line: sequential vs. time-parallel solves with CSV reports.

Exit codes: 0 success, 1 validation error, 2 solver failure, 3 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import reporting
from .config import ConfigError, ProblemSetup, RunConfig, build_problem, load_config
from .eddy import NewtonConvergenceError
from .hierarchy import HierarchyError
from .mesh import MeshError
from .mgrit import solve as mgrit_solve
from .propagators import PropagatorStepError, sequential_solve
from .runtime import estimate_speedup, speedup_crossover, write_work_model_csv
from .sparse import SingularMatrixError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SOLVER = 2
EXIT_NO_CONVERGENCE = 3


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.workers is not None:
        cfg.num_workers = args.workers
    if args.out is not None:
        cfg.out_dir = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    cfg.validate()
    return cfg


def _prepare(cfg: RunConfig) -> tuple[ProblemSetup, Path]:
    setup = build_problem(cfg)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / reporting.CONFIG_JSON).write_text(cfg.to_json() + "\n")
    return setup, out_dir


def cmd_run_sequential(args) -> int:
    cfg = _load(args)
    setup, out_dir = _prepare(cfg)
    grid = setup.hierarchy.grids[0]
    values = sequential_solve(setup.propagators[0], grid, setup.u0)
    reporting.write_sequential_csv(out_dir / reporting.SEQUENTIAL_CSV, grid.times(), values)
    print(f"sequential: {grid.num_intervals} steps, phi count = {grid.num_intervals}")
    print(f"final state norm = {np.linalg.norm(values[-1]):.6e}")
    print(f"wrote {out_dir / reporting.SEQUENTIAL_CSV}")
    return EXIT_OK


def _run_mgrit(cfg: RunConfig, setup: ProblemSetup, out_dir: Path, suffix: str = ""):
    result = mgrit_solve(setup.hierarchy, setup.propagators, setup.u0,
                         options=setup.options)
    residual_csv = out_dir / f"residual_history{suffix}.csv"
    result.record.to_csv(residual_csv)
    write_work_model_csv(out_dir / reporting.WORK_CSV, result.work, cfg.speedup_workers)
    status = "converged" if result.record.converged else "NOT converged"
    last = result.record.iterations[-1]
    print(f"mgrit: {len(result.record.iterations) - 1} iterations, {status}, "
          f"final residual = {last.residual_norm:.6e}")
    print(f"wrote {residual_csv} and {out_dir / reporting.WORK_CSV}")
    return result


def cmd_run_mgrit(args) -> int:
    cfg = _load(args)
    setup, out_dir = _prepare(cfg)
    result = _run_mgrit(cfg, setup, out_dir)
    return EXIT_OK if result.record.converged else EXIT_NO_CONVERGENCE


def cmd_compare(args) -> int:
    cfg = _load(args)
    setup, out_dir = _prepare(cfg)
    grid = setup.hierarchy.grids[0]
    seq_values = sequential_solve(setup.propagators[0], grid, setup.u0)
    reporting.write_sequential_csv(out_dir / reporting.SEQUENTIAL_CSV, grid.times(), seq_values)
    result = _run_mgrit(cfg, setup, out_dir)
    discrepancy = float(np.max(np.abs(result.solution.values - seq_values)))
    crossover = speedup_crossover(result.work)
    speedups = {int(w): estimate_speedup(result.work, int(w)) for w in cfg.speedup_workers}
    summary = {
        "max_norm_discrepancy": discrepancy,
        "iterations": len(result.record.iterations) - 1,
        "converged": result.record.converged,
        "sequential_phi_count": grid.num_intervals,
        "mgrit_phi_total": sum(result.work.level_totals()),
        "estimated_speedup": speedups,
        "speedup_crossover_workers": crossover,
    }
    (out_dir / reporting.COMPARE_JSON).write_text(json.dumps(summary, indent=2) + "\n")
    print(f"max-norm discrepancy vs sequential = {discrepancy:.6e}")
    print(f"speedup crossover at {crossover} model workers" if crossover
          else "no speedup crossover within modelled worker range")
    print(f"wrote {out_dir / reporting.COMPARE_JSON}")
    return EXIT_OK if result.record.converged else EXIT_NO_CONVERGENCE


def cmd_print_config(args) -> int:
    cfg = _load(args)
    print(cfg.to_json())
    return EXIT_OK


def cmd_report(args) -> int:
    cfg = _load(args)
    produced = reporting.render_report(cfg.out_dir)
    if not produced:
        print(f"no known CSV files under {cfg.out_dir}", file=sys.stderr)
        return EXIT_VALIDATION
    for path in produced:
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="timegrit",
        description="Time-parallel (MGRIT/Parareal) benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "run-sequential": (cmd_run_sequential, "sequential time stepping, per-step CSV"),
        "run-mgrit": (cmd_run_mgrit, "time-multigrid solve, residual-history and work CSVs"),
        "compare": (cmd_compare, "run both and report the discrepancy plus speedup model"),
        "print-config": (cmd_print_config, "echo the effective configuration as JSON"),
        "report": (cmd_report, "render figures from the CSVs in the output directory"),
    }
    for name, (func, help_text) in commands.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=str, default=None, help="JSON config path")
        p.add_argument("--workers", type=int, default=None, help="worker count override")
        p.add_argument("--out", type=str, default=None, help="output directory override")
        p.add_argument("--seed", type=int, default=None,
                       help="seed for randomized tests (solves are deterministic)")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, HierarchyError, MeshError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NewtonConvergenceError, SingularMatrixError, PropagatorStepError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
