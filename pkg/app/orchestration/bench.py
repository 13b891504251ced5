"""
Benchmark Harness

Runs one algorithm over a batch of instance files and turns the results
into CSV tables: one row per run plus a summary row (% optimal, average
solve time), performance profiles, heuristic-versus-best-bound gaps and
the default/new settings study.

Instances are independent; with more than one worker they run in separate
processes, each solve staying single-threaded.
"""

from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import pandas as pd
from tqdm import tqdm

from app.algorithms import Solver, get_strategy
from app.config import get_settings
from app.core.instance_io import load_instance
from app.errors import EvspError
from app.schemas.reports import CSV_COLUMNS, RunReport, RunStatus, compute_gap
from app.services.milp_backend import CutSetting, FocusSetting, SolverParams
from app.utils.logger import logger
from app.validation.validator import validate

SUMMARY_COLUMNS = ["pct_optimal", "avg_solve_seconds"]
PROFILES = ("default", "new")

PathLike = Union[str, Path]


def run_instance(path: str, algo: str, params: SolverParams, options: Dict) -> RunReport:
    """Solve one instance file and report; never raises toolkit errors"""
    echo = {
        "algorithm": algo,
        "time_limit_seconds": params.time_limit_seconds,
        "threads": params.threads,
        "cuts": params.cuts.value,
        "focus": params.focus.value,
    }
    try:
        inst = load_instance(path)
    except EvspError as e:
        logger.error(f"bench: cannot load {path}: {e}")
        return RunReport(instance=Path(path).stem, status=RunStatus.ERROR, error=f"{type(e).__name__}: {e}", **echo)

    result = Solver(get_strategy(algo, **options), params).solve(inst)
    valid = validate(inst, result.solution).ok if result.solution is not None else None
    stats = result.stats
    return RunReport.from_bounds(
        instance=inst.name,
        status=result.status,
        objective=result.objective,
        best_bound=result.best_bound,
        solve_seconds=result.solve_seconds,
        total_seconds=result.total_seconds,
        node_count=result.node_count,
        n_binary=stats.n_binary if stats else 0,
        n_implicit=stats.n_implicit if stats else 0,
        n_continuous=stats.n_continuous if stats else 0,
        n_rows=stats.n_rows if stats else 0,
        valid=valid,
        error=result.error,
        **echo,
    )


def run_batch(
    paths: Sequence[PathLike],
    algo: str,
    params: Optional[SolverParams] = None,
    workers: Optional[int] = None,
    **options,
) -> List[RunReport]:
    """
    Run an algorithm on every instance file.

    Args:
        paths: Instance files
        algo: Algorithm name
        params: Solver parameters (settings defaults)
        workers: Worker processes (settings default)
        **options: Strategy options such as maxrun_seconds or warm_start

    Returns:
        One RunReport per path, in input order; failures are recorded,
        the batch continues
    """
    params = params or SolverParams.from_settings()
    workers = workers or get_settings().bench_workers
    paths = [str(p) for p in paths]

    logger.info("=" * 80)
    logger.info(f"[bench] {algo} on {len(paths)} instance(s), limit {params.time_limit_seconds}s, {params.profile} settings, {workers} worker(s)")
    logger.info("=" * 80)

    reports: Dict[int, RunReport] = {}
    progress = tqdm(total=len(paths), desc=f"{algo}", unit="inst")
    if workers <= 1:
        for i, path in enumerate(paths):
            reports[i] = run_instance(path, algo, params, options)
            progress.update(1)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(run_instance, path, algo, params, options): i for i, path in enumerate(paths)}
            for future in as_completed(futures):
                reports[futures[future]] = future.result()
                progress.update(1)
    progress.close()

    ordered = [reports[i] for i in range(len(paths))]
    s = summarize(ordered)
    logger.info(f"[bench] {algo}: {s['pct_optimal']:.1f}% optimal, average solve time {s['avg_solve_seconds']:.2f}s")
    return ordered


def summarize(reports: Sequence[RunReport]) -> Dict[str, float]:
    """Percentage of optimal runs and their average solve time over all runs"""
    if not reports:
        return {"pct_optimal": 0.0, "avg_solve_seconds": 0.0}
    optimal = sum(1 for r in reports if r.status == RunStatus.OPTIMAL)
    return {
        "pct_optimal": 100.0 * optimal / len(reports),
        "avg_solve_seconds": sum(r.solve_seconds for r in reports) / len(reports),
    }


def reports_frame(reports: Sequence[RunReport], with_summary: bool = True) -> pd.DataFrame:
    """One row per run in CSV column order, plus a summary row"""
    rows = [r.to_row() for r in reports]
    frame = pd.DataFrame(rows, columns=CSV_COLUMNS)
    for column in SUMMARY_COLUMNS:
        frame[column] = None
    if with_summary:
        summary = {column: None for column in frame.columns}
        summary.update({"instance": "SUMMARY", "algorithm": ",".join(sorted({r.algorithm for r in reports}))})
        summary.update(summarize(reports))
        frame = pd.concat([frame, pd.DataFrame([summary])], ignore_index=True)
    return frame


def write_csv(reports: Sequence[RunReport], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    reports_frame(reports).to_csv(path, index=False)
    logger.info(f"[bench] wrote {len(reports)} row(s) to {path}")
    return path


def performance_profile(reports: Sequence[RunReport]) -> pd.DataFrame:
    """
    Cumulative percentage of instances solved to optimality against solve time.

    The curve starts at (0, 0) and steps up at each optimal run's solve
    time; unsolved runs never count.
    """
    total = len(reports)
    times = sorted(r.solve_seconds for r in reports if r.status == RunStatus.OPTIMAL)
    points = [{"seconds": 0.0, "percent_solved": 0.0}]
    for k, seconds in enumerate(times, start=1):
        points.append({"seconds": seconds, "percent_solved": 100.0 * k / total})
    return pd.DataFrame(points, columns=["seconds", "percent_solved"])


def write_profile(reports: Sequence[RunReport], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    performance_profile(reports).to_csv(path, index=False)
    return path


def bound_gap_table(reports: Iterable[RunReport]) -> pd.DataFrame:
    """
    Gap of every run's objective to the best upper bound any run found on
    the same instance.
    """
    reports = list(reports)
    best: Dict[str, float] = {}
    for r in reports:
        if r.best_bound is not None and r.status in (RunStatus.OPTIMAL, RunStatus.FEASIBLE):
            best[r.instance] = min(best.get(r.instance, r.best_bound), r.best_bound)
    rows = []
    for r in reports:
        bound = best.get(r.instance)
        rows.append({
            "instance": r.instance,
            "algorithm": r.algorithm,
            "time_limit_seconds": r.time_limit_seconds,
            "objective": r.objective,
            "best_bound": bound,
            "gap_percent": compute_gap(bound, r.objective),
        })
    return pd.DataFrame(rows, columns=["instance", "algorithm", "time_limit_seconds", "objective", "best_bound", "gap_percent"])


def profile_params(base: SolverParams, profile: str) -> SolverParams:
    """The default profile keeps solver defaults; new turns cuts off and focuses on feasibility"""
    if profile == "new":
        return base.model_copy(update={"cuts": CutSetting.OFF, "focus": FocusSetting.FEASIBILITY})
    return base.model_copy(update={"cuts": CutSetting.DEFAULT, "focus": FocusSetting.DEFAULT})


def run_settings_study(
    paths: Sequence[PathLike],
    algo: str,
    params: Optional[SolverParams] = None,
    out_prefix: Optional[PathLike] = None,
    workers: Optional[int] = None,
    **options,
) -> Dict[str, List[RunReport]]:
    """
    Run the batch under the default and the new settings profile.

    When out_prefix is given, writes <prefix>_<profile>.csv (runs) and
    <prefix>_<profile>_profile.csv (performance profile) per profile.
    """
    base = params or SolverParams.from_settings()
    results: Dict[str, List[RunReport]] = {}
    for profile in PROFILES:
        reports = run_batch(paths, algo, profile_params(base, profile), workers, **options)
        results[profile] = reports
        if out_prefix is not None:
            write_csv(reports, f"{out_prefix}_{profile}.csv")
            write_profile(reports, f"{out_prefix}_{profile}_profile.csv")
    return results
