"""Command line: ``eigenmc {binomial,diffusion,sweep} [flags] --out DIR``."""

from __future__ import annotations

import argparse
import logging
import shlex
import sys
from pathlib import Path

from . import io
from .chain import REPAIRS
from .experiments import BASELINES, run_binomial_experiment, run_diffusion_experiment, run_sweep
from .grid import StateGrid
from .simulate import DRIFT_CORRECTIONS, SimulationConfig
from .stationary import SOLVERS

log = logging.getLogger("eigenmc")

_REPAIR_FLAGS = {"restrict": "restrict", "self-loop": "self-loop", "uniform": "uniform-row", "uniform-row": "uniform-row"}
_BOOL_FLAGS = {"dump-paths", "exact-snapshots"}


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _add_common(p):
    sim = p.add_argument_group("simulation")
    sim.add_argument("--paths", type=int, help="number of paths N")
    sim.add_argument("--horizon", type=int, help="steps per path T")
    sim.add_argument("--seed", type=int, default=1, help="master seed (default 1)")
    sim.add_argument("--replications", type=int, help="independent replications R")
    sim.add_argument("--s0", type=float, help="starting value")
    sim.add_argument("--up", type=float, help="binomial up factor")
    sim.add_argument("--down", type=float, help="binomial down factor")
    sim.add_argument("--p-up", type=float, help="binomial up probability")
    sim.add_argument("--mu", type=float, help="diffusion drift per step")
    sim.add_argument("--sigma", type=float, help="diffusion volatility per sqrt(step)")
    sim.add_argument("--dt", type=float, help="time step")
    sim.add_argument("--drift-correction", choices=DRIFT_CORRECTIONS)
    sim.add_argument("--workers", type=int, default=1, help="simulation processes")
    grid = p.add_argument_group("grid and pricing")
    grid.add_argument("--grid-states", type=int, help="number of grid states")
    grid.add_argument("--grid-lower", type=float, help="value of state 0")
    grid.add_argument("--grid-increment", type=float, help="spacing between states")
    grid.add_argument("--strike", type=float)
    grid.add_argument("--discount", type=float)
    chain = p.add_argument_group("chain and solver")
    chain.add_argument("--solver", choices=SOLVERS, default="eigen")
    chain.add_argument("--repair", choices=sorted(_REPAIR_FLAGS), default="restrict")
    chain.add_argument("--metric", choices=("paper-w", "w1", "both"), default="both")
    chain.add_argument("--baseline", choices=BASELINES, default="final")
    chain.add_argument("--exact-snapshots", action="store_true", help="solve after every single path")
    out = p.add_argument_group("output")
    out.add_argument("--out", required=True, type=Path, help="output directory")
    out.add_argument("--config", type=Path, help="key=value file; command-line flags win")
    out.add_argument("--dump-paths", action="store_true", help="also write paths.csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eigenmc", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)
    _add_common(subs.add_parser("binomial", help="convergence study on the +/-10%% walk"))
    _add_common(subs.add_parser("diffusion", help="terminal distributions and call prices for the diffusion"))
    sweep = subs.add_parser("sweep", help="cross product over N, T, grid size, sigma, mu")
    _add_common(sweep)
    axes = sweep.add_argument_group("sweep axes (comma-separated values)")
    axes.add_argument("--model", choices=("binomial", "gbm"), default="binomial")
    axes.add_argument("--sweep-paths", type=_ints, metavar="N,...")
    axes.add_argument("--sweep-horizon", type=_ints, metavar="T,...")
    axes.add_argument("--sweep-grid-states", type=_ints, metavar="N,...",
                      help="state counts over the same value range")
    axes.add_argument("--sweep-sigma", type=_floats, metavar="S,...")
    axes.add_argument("--sweep-mu", type=_floats, metavar="M,...")
    return parser


def _config_args(path):
    args = []
    for key, value in io.read_config_file(path).items():
        if key == "config":
            continue
        if key in _BOOL_FLAGS:
            if value.lower() in ("1", "true", "yes", "on"):
                args.append(f"--{key}")
        else:
            args += [f"--{key}", value]
    return args


def _expand_config(argv):
    """Splice config-file flags in front of the command-line ones so the latter override."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path)
    known, _ = pre.parse_known_args(argv)
    if known.config is None or not argv:
        return argv
    return argv[:1] + _config_args(known.config) + argv[1:]


def _simulation_config(args, model):
    base = SimulationConfig.binomial_default() if model == "binomial" else SimulationConfig.diffusion_default()
    g = base.grid
    grid = StateGrid(
        g.lower_value if args.grid_lower is None else args.grid_lower,
        g.increment if args.grid_increment is None else args.grid_increment,
        g.n_states if args.grid_states is None else args.grid_states,
    )
    changes = dict(
        n_paths=args.paths, horizon=args.horizon, s0=args.s0, up_factor=args.up, down_factor=args.down,
        p_up=args.p_up, mu=args.mu, sigma=args.sigma, dt=args.dt, drift_correction=args.drift_correction,
        strike=args.strike, discount=args.discount,
    )
    changes = {k: v for k, v in changes.items() if v is not None}
    return base.replace(master_seed=args.seed, grid=grid, **changes)


def _write_common(out, result, dump_paths):
    io.write_terminal_csv(out / "terminal.csv", result)
    grid = result.config.grid
    io.write_matrix_csv(out / "transition_counts.csv", result.counts.counts, grid)
    io.write_matrix_csv(out / "transition_probs.csv", result.matrix.probs, grid, result.matrix.state_map)
    if dump_paths and result.ensemble is not None:
        io.write_paths_csv(out / "paths.csv", result.ensemble)


def _run(args, command_line):
    repair = _REPAIR_FLAGS[args.repair]
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    if args.command == "binomial":
        cfg = _simulation_config(args, "binomial")
        result = run_binomial_experiment(
            cfg, replications=args.replications or 10, solver=args.solver, repair=repair,
            baseline=args.baseline, exact_snapshots=args.exact_snapshots, workers=args.workers,
            keep_paths=args.dump_paths,
        )
        io.write_convergence_csv(out / "convergence.csv", result, args.metric)
        if result.bands:
            io.write_bands_csv(out / "bands.csv", result, args.metric)
        _write_common(out, result, args.dump_paths)
        io.write_manifest(out / "manifest.json", io.result_manifest(result), command_line)
        ok = result.converged
    elif args.command == "diffusion":
        cfg = _simulation_config(args, "gbm")
        result = run_diffusion_experiment(
            cfg, replications=args.replications or 30, solver=args.solver, repair=repair,
            workers=args.workers, keep_paths=args.dump_paths,
        )
        if result.variance:
            io.write_variance_csv(out / "variance.csv", result)
        _write_common(out, result, args.dump_paths)
        io.write_manifest(out / "manifest.json", io.result_manifest(result), command_line)
        ok = result.converged
    else:
        cfg = _simulation_config(args, args.model)
        ranges = {
            "n_paths": args.sweep_paths, "horizon": args.sweep_horizon, "n_states": args.sweep_grid_states,
            "sigma": args.sweep_sigma, "mu": args.sweep_mu,
        }
        kwargs = dict(replications=args.replications or 1, solver=args.solver, repair=repair, workers=args.workers)
        if args.model == "binomial":
            kwargs.update(baseline=args.baseline, exact_snapshots=args.exact_snapshots)
        cells = run_sweep(cfg, {k: v for k, v in ranges.items() if v}, **kwargs)
        io.write_sweep_csv(out / "sweep.csv", cells)
        body = {"model": args.model, "cells": [
            {"params": c.params, "skipped": c.skipped,
             **({} if c.result is None else {"result": io.result_manifest(c.result)})}
            for c in cells
        ]}
        io.write_manifest(out / "manifest.json", body, command_line)
        ok = all(c.result is None or c.result.converged for c in cells)
    if not ok:
        print("warning: stationary solver did not converge everywhere; see manifest.json", file=sys.stderr)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        expanded = _expand_config(argv)
    except OSError as exc:
        print(f"eigenmc: cannot read config file: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"eigenmc: bad config file: {exc}", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(expanded)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _run(args, " ".join(shlex.quote(a) for a in ["eigenmc", *argv]))
    except OSError as exc:
        print(f"eigenmc: I/O failure: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"eigenmc: invalid configuration: {exc}", file=sys.stderr)
        return 2
    return 0


cli_main = main

if __name__ == "__main__":
    sys.exit(main())
