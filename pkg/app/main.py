"""
Command-Line Entry Point

Run with ``python -m app.main <subcommand>``:

- solve: run one algorithm on an instance file and validate the result
- generate: write a seeded benchmark instance
- validate: check a solution file against its instance
- oracle: exhaustive optimum of a tiny instance, or a non-monotone witness search
- reduce: turn a graph into an EVSP instance
- bench: batch runs, CSV reports, performance profiles and the settings study

Exit codes: 0 success, 2 invalid input or failed validation, 3 solver error.
Results go to stdout, logs to stderr.
"""

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from app.algorithms import AlgorithmName, Solver, get_strategy
from app.config import get_settings, validate_settings
from app.core.instance_io import load_instance, load_solution, save_instance, save_solution
from app.core.replay import extract_assignment_plans
from app.errors import BackendError, EvspError, InstanceFormatError, InstanceValidationError, SizeCapExceededError
from app.formulation.evsp3 import build_model
from app.generators import generate_grid, generate_tiny, generate_vamo, misp_to_evsp, read_edge_list
from app.oracle import find_nonmonotone_witness, solve_exhaustive
from app.orchestration.bench import bound_gap_table, run_batch, run_settings_study, write_csv, write_profile
from app.schemas.reports import RunStatus
from app.services.milp_backend import CutSetting, FocusSetting, SolverParams
from app.utils.logger import logger, setup_logger
from app.validation import validate

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SOLVER = 3

GENERATOR_FAMILIES = ("grid", "vamo1", "vamo2", "vamo3", "vamo4", "tiny")


# ===========================================
# Subcommands
# ===========================================

def _solver_params(args: argparse.Namespace, time_limit: Optional[float] = None) -> SolverParams:
    return SolverParams.from_settings(
        time_limit_seconds=time_limit if time_limit is not None else args.time_limit,
        threads=args.threads,
        cuts=CutSetting(args.cuts),
        focus=FocusSetting(args.focus),
    )


def cmd_solve(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    params = _solver_params(args)

    if args.write_lp:
        handle, _ = build_model(inst)
        handle.backend.write_lp(args.write_lp)
        logger.info(f"wrote model of {inst.name} to {args.write_lp}")

    options = {"maxrun_seconds": args.maxrun_seconds}
    if args.no_warm_start:
        options["warm_start"] = False
    result = Solver(get_strategy(args.algo, **options), params).solve(inst)

    print(f"instance:   {inst.name}")
    print(f"algorithm:  {result.algorithm}")
    print(f"status:     {result.status.value}")
    if result.status == RunStatus.ERROR:
        print(f"error:      {result.error}")
        return EXIT_SOLVER
    print(f"objective:  {result.objective}")
    print(f"best bound: {result.best_bound}")
    print(f"solve time: {result.solve_seconds:.3f}s (total {result.total_seconds:.3f}s), {result.node_count} node(s)")
    if result.stats is not None:
        s = result.stats
        print(f"model:      {s.n_binary} binary, {s.n_implicit} implicit binary, {s.n_continuous} continuous, {s.n_rows} rows")
    for key, value in result.diagnostics.items():
        print(f"  {key}: {value}")

    sol = result.solution
    if sol is None:
        return EXIT_OK

    print(f"served:     {' '.join(sol.served) or '-'}")
    if args.dump_fixings and result.ledger_text:
        print(result.ledger_text)
    if args.plans:
        for plan in extract_assignment_plans(inst, sol):
            print(plan.to_text())
    if args.out:
        save_solution(sol, args.out)
        logger.info(f"wrote solution to {args.out}")

    report = validate(inst, sol)
    print(report.to_text())
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_generate(args: argparse.Namespace) -> int:
    if args.family == "grid":
        inst = generate_grid(args.customers, args.seed)
    elif args.family == "tiny":
        inst = generate_tiny(args.customers, args.seed)
    else:
        inst = generate_vamo(int(args.family[-1]), args.customers, args.seed)
    out = args.out or f"{inst.name}.json"
    save_instance(inst, out)
    print(out)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    report = validate(inst, load_solution(args.solution))
    print(report.to_text())
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_oracle_solve(args: argparse.Namespace) -> int:
    result = solve_exhaustive(load_instance(args.instance))
    print(f"objective: {result.objective}")
    print(f"served:    {' '.join(result.served) or '-'}")
    print(f"subsets:   {result.subsets_checked}")
    return EXIT_OK


def cmd_oracle_witness(args: argparse.Namespace) -> int:
    instances = (generate_tiny(args.customers, seed) for seed in range(args.seeds))
    witness = find_nonmonotone_witness(instances, strict=args.strict)
    if witness is None:
        print(f"no witness in {args.seeds} instance(s)")
        return EXIT_OK
    print(f"instance:   {witness.instance.name}")
    print(f"infeasible: {' '.join(witness.infeasible) or '-'} (k={witness.k})")
    print(f"feasible:   {' '.join(witness.feasible)}")
    if args.out:
        save_instance(witness.instance, args.out)
        print(args.out)
    return EXIT_OK


def cmd_reduce(args: argparse.Namespace) -> int:
    graph = read_edge_list(args.graph)
    inst, k = misp_to_evsp(graph, name=Path(args.graph).stem)
    out = args.out or f"{inst.name}.json"
    save_instance(inst, out)
    print(f"{out} K={k}")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    algos = args.algo or [AlgorithmName.EVSP3.value]
    limits = args.time_limit or [get_settings().time_limit_seconds]
    options = {"maxrun_seconds": args.maxrun_seconds}

    if args.settings_study:
        for algo in algos:
            run_settings_study(
                args.instances, algo, _solver_params(args, limits[0]),
                out_prefix=f"{args.settings_study}_{algo}", workers=args.workers, **options,
            )
        return EXIT_OK

    reports = []
    for algo in algos:
        for limit in limits:
            reports.extend(run_batch(args.instances, algo, _solver_params(args, limit), args.workers, **options))

    if args.out:
        write_csv(reports, args.out)
    if args.profile:
        write_profile(reports, args.profile)
    if args.compare:
        bound_gap_table(reports).to_csv(args.compare, index=False)
    for r in reports:
        print(f"{r.instance}\t{r.algorithm}\t{r.time_limit_seconds:g}s\t{r.status.value}\t{r.objective}\t{r.best_bound}\t{r.gap_percent}")
    return EXIT_OK


# ===========================================
# Parser
# ===========================================

def _add_solver_flags(p: argparse.ArgumentParser, repeat_limit: bool = False) -> None:
    if repeat_limit:
        p.add_argument("--time-limit", type=float, action="append", help="Time limit in seconds (repeatable)")
    else:
        p.add_argument("--time-limit", type=float, help="Time limit in seconds")
    p.add_argument("--threads", type=int, help="Solver threads")
    p.add_argument("--maxrun-seconds", type=float, help="RCBVF bounded solve budget")
    p.add_argument("--cuts", choices=[c.value for c in CutSetting], default=CutSetting.DEFAULT.value)
    p.add_argument("--focus", choices=[f.value for f in FocusSetting], default=FocusSetting.DEFAULT.value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m app.main", description="EVSP solver toolkit")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Console log level (overrides EVSP_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="Solve one instance")
    p.add_argument("instance")
    p.add_argument("--algo", choices=[a.value for a in AlgorithmName], default=AlgorithmName.EVSP3.value)
    _add_solver_flags(p)
    p.add_argument("--no-warm-start", action="store_true", help="Plain EVSP3 without the greedy warm start")
    p.add_argument("--out", help="Write the solution file")
    p.add_argument("--plans", action="store_true", help="Print per-vehicle assignment plans")
    p.add_argument("--dump-fixings", action="store_true", help="Print the RCBVF fixing ledger")
    p.add_argument("--write-lp", help="Export the model in LP format")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("generate", help="Generate a benchmark instance")
    p.add_argument("family", choices=GENERATOR_FAMILIES)
    p.add_argument("--customers", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("validate", help="Validate a solution file")
    p.add_argument("instance")
    p.add_argument("solution")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("oracle", help="Exhaustive solver for tiny instances")
    oracle = p.add_subparsers(dest="oracle_command", required=True)
    q = oracle.add_parser("solve")
    q.add_argument("instance")
    q.set_defaults(func=cmd_oracle_solve)
    q = oracle.add_parser("witness", help="Search seeded tiny instances for a non-monotone witness")
    q.add_argument("--seeds", type=int, default=200)
    q.add_argument("--customers", type=int, default=4)
    q.add_argument("--strict", action="store_true")
    q.add_argument("--out", help="Write the witness instance")
    q.set_defaults(func=cmd_oracle_witness)

    p = sub.add_parser("reduce", help="Reduce a problem to EVSP")
    reduce = p.add_subparsers(dest="reduce_command", required=True)
    q = reduce.add_parser("misp", help="Maximum independent set from an edge list")
    q.add_argument("graph")
    q.add_argument("--out")
    q.set_defaults(func=cmd_reduce)

    p = sub.add_parser("bench", help="Batch runs and CSV reports")
    p.add_argument("instances", nargs="+")
    p.add_argument("--algo", choices=[a.value for a in AlgorithmName], action="append")
    _add_solver_flags(p, repeat_limit=True)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="Run CSV with summary row")
    p.add_argument("--profile", help="Performance profile CSV")
    p.add_argument("--compare", help="Objective versus best bound CSV")
    p.add_argument("--settings-study", metavar="PREFIX", help="Run default and new settings, one CSV pair per profile")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.log_level:
        setup_logger(args.log_level)

    check = validate_settings()
    for issue in check["issues"]:
        logger.warning(f"settings: {issue}")

    try:
        return args.func(args)
    except (InstanceFormatError, InstanceValidationError, SizeCapExceededError, ValueError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_INVALID
    except BackendError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_SOLVER
    except EvspError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
