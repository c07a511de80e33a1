"""Command-line front end: run flood simulations and placement searches.

Exit codes: 0 success, 2 usage or validation problems, 3 solver failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from .grid import ScalarField
from .objective import flood_volume
from .optimizer import DEConfig, Mode, SearchBudget, solve_ofmp, solve_sequential
from .scenario_io import (
    FIXTURE_COUNT,
    ScenarioError,
    builtin_scenario,
    load_scenario,
    write_configuration_csv,
    write_convergence_csv,
    write_raster,
    write_region_exteriors,
    write_snapshot_summary,
)
from .swe import SolverDivergenceError, simulate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SOLVER = 3


def _add_scenario_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--builtin", type=int, metavar="N", help=f"built-in scenario 1..{FIXTURE_COUNT}")
    group.add_argument("--scenario", metavar="PATH", help="scenario manifest to load")
    parser.add_argument("--out", required=True, metavar="DIR", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="floodopt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one structure-free simulation")
    _add_scenario_flags(sim)

    opt = sub.add_parser("optimize", help="search for wall placements")
    _add_scenario_flags(opt)
    opt.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.DIRECT.value)
    opt.add_argument("--sequential", action="store_true", help="place walls one at a time")
    opt.add_argument("--walls", type=int, required=True, metavar="N")
    opt.add_argument("--seed", type=int, default=0)
    opt.add_argument("--max-evals", type=int, default=None, metavar="E")
    opt.add_argument("--time-limit", type=float, default=None, metavar="SECONDS")
    opt.add_argument("--alpha", type=float, default=None, help="alpha-shape radius (default 5 cell sizes)")
    opt.add_argument(
        "--workers",
        type=int,
        default=None,
        help="parallel simulation threads (default $FLOODOPT_WORKERS or 1)",
    )
    return parser


def _load(args) -> "Scenario":
    if args.builtin is not None:
        if not 1 <= args.builtin <= FIXTURE_COUNT:
            raise ScenarioError(f"--builtin must be in 1..{FIXTURE_COUNT}, got {args.builtin}")
        return builtin_scenario(args.builtin)
    if not os.path.exists(args.scenario):
        raise ScenarioError(f"scenario file not found: {args.scenario}")
    return load_scenario(args.scenario)


def _cmd_simulate(args) -> int:
    scenario = _load(args)
    record = simulate(
        scenario.terrain,
        ScalarField.zeros(scenario.grid),
        scenario.initial_depth,
        scenario.sources,
        scenario.boundary,
        scenario.duration,
        scenario.report_interval,
    )
    os.makedirs(args.out, exist_ok=True)
    write_raster(record.max_depth, os.path.join(args.out, "max_depth.asc"))
    write_snapshot_summary(record, os.path.join(args.out, "snapshots.csv"))
    volume = flood_volume(record.max_depth, scenario.assets)
    print(f"simulated {scenario.name or 'scenario'}: asset flood volume {volume:.6g} m^3")
    return EXIT_OK


def _cmd_optimize(args) -> int:
    scenario = _load(args)
    if args.walls < 1:
        raise ScenarioError("--walls must be at least 1")
    if args.max_evals is None and args.time_limit is None:
        raise ScenarioError("set --max-evals, --time-limit, or both")
    if args.sequential and args.walls < 2:
        print("warning: --sequential with a single wall is just the plain solver", file=sys.stderr)
    workers = args.workers
    if workers is None:
        workers = int(os.environ.get("FLOODOPT_WORKERS", "1"))
    budget = SearchBudget(wall_time_limit=args.time_limit, max_evaluations=args.max_evals)
    de = DEConfig(rng_seed=args.seed)
    solver = solve_sequential if args.sequential else solve_ofmp
    result = solver(
        scenario,
        args.walls,
        budget,
        mode=Mode(args.mode),
        de=de,
        alpha=args.alpha,
        workers=workers,
    )
    os.makedirs(args.out, exist_ok=True)
    write_convergence_csv(result, os.path.join(args.out, "convergence.csv"))
    write_raster(result.best_elevation, os.path.join(args.out, "best_elevation.asc"))
    write_configuration_csv(result.best_config, os.path.join(args.out, "best_configuration.csv"))
    write_region_exteriors(result.restriction_trace[-1], os.path.join(args.out, "region_exteriors.csv"))
    print(
        f"best objective {result.best_objective.total:.6g} m^3 "
        f"({len(result.best_config)} walls, {result.evaluations} evaluations, "
        f"{result.pde_solves} flow solves)"
    )
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        return _cmd_optimize(args)
    except (ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverDivergenceError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
