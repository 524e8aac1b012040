"""
Experiment Runner - benchmark table, inner-loop study and grid search over
seeded synthetic instances, with optional process-parallel realizations.
"""
import itertools
import logging
import math
import multiprocessing
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from constants import APP_VERSION, METHOD_BASELINE, METHOD_SOOT, METHODS
from models import ExperimentConfig
from .baseline_solver import baseline_solve
from .errors import ConfigurationError, DeconvolutionError
from .result_saver import ResultSaver
from .seismic_bench import (
    SyntheticInstance,
    error_metrics,
    make_instance,
    observed_instance,
    optimal_scale_alignment,
    raw_error_norms,
    realization_seed,
    ricker_wavelet,
)
from .solve_trace import SolveResult, SolveTrace, Termination
from .soot_solver import soot_solve

logger = logging.getLogger(__name__)

METRIC_KEYS = ["l2_signal", "l1_signal", "l2_kernel", "l1_kernel", "l2_obs", "l1_obs", "time_s"]
SOOT_GRID_KEYS = ("lambda_scale", "alpha", "beta", "eta")
BASELINE_GRID_KEYS = ("lambda_b",)
GRID_CSV_COLUMNS = ["mean_l1_signal", "mean_l2_signal", "failures", "selected"]

# Grid keys -> ExperimentConfig fields
GRID_CONFIG_FIELDS = {
    "lambda_scale": "soot_lambda_scale",
    "alpha": "soot_alpha",
    "beta": "soot_beta",
    "eta": "soot_eta",
    "lambda_b": "baseline_lambda",
}


# ============================================================================
# SINGLE RUNS
# ============================================================================

def solve_instance(
    instance: SyntheticInstance,
    method: str,
    cfg: ExperimentConfig,
    soot_overrides: Optional[Dict[str, float]] = None,
    inner_x: Optional[int] = None,
    lambda_b: Optional[float] = None,
) -> SolveResult:
    """Run one method on one instance from its seeded initialization"""
    params = cfg.soot_params_for(instance.observation_energy, **(soot_overrides or {}))
    if method == METHOD_SOOT:
        return soot_solve(
            instance.y, instance.x0, instance.h0, params, instance.g1, instance.g2,
            cfg=cfg.solver_config(inner_x),
        )
    if method == METHOD_BASELINE:
        return baseline_solve(
            instance.y, instance.x0, instance.h0, cfg.baseline_config(lambda_b),
            instance.g1, instance.g2, report_params=params,
        )
    raise ConfigurationError(f"unknown method '{method}' (expected one of {METHODS})")


@dataclass
class RunRecord:
    """Errors and timing of one (sigma, method, realization) run"""
    sigma: float
    sigma_index: int
    method: str
    realization: int
    seed: int
    termination: str = ""
    iterations: int = 0
    metrics: Dict[str, float] = field(default_factory=dict)
    raw: Dict[str, float] = field(default_factory=dict)
    error: Optional[str] = None
    trace: Optional[SolveTrace] = None

    @property
    def failed(self) -> bool:
        return self.error is not None or Termination(self.termination).failed

    def sort_key(self) -> Tuple[int, int, int]:
        return self.sigma_index, METHODS.index(self.method), self.realization

    def to_row(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {
            "sigma": self.sigma,
            "method": self.method,
            "realization": self.realization,
            "seed": self.seed,
            "termination": self.termination if self.error is None else "error",
            "iterations": self.iterations,
        }
        row.update(self.metrics)
        row.update({f"raw_{key}": value for key, value in self.raw.items()})
        return row


def evaluate_run(
    instance: SyntheticInstance,
    method: str,
    result: SolveResult,
    elapsed: float,
    sigma_index: int = 0,
    align_scale: bool = False,
) -> RunRecord:
    """Normalized (RMS/MAE) and raw (l2/l1) errors of a finished run"""
    x_hat, h_hat = result.x_hat, result.h_hat
    if align_scale:
        x_hat, _ = optimal_scale_alignment(instance.x_true, x_hat)
        h_hat, _ = optimal_scale_alignment(instance.h_true, h_hat)

    l2_signal, l1_signal = error_metrics(instance.x_true, x_hat)
    l2_kernel, l1_kernel = error_metrics(instance.h_true, h_hat)
    l2_obs, l1_obs = instance.observation_error()
    raw_l2_signal, raw_l1_signal = raw_error_norms(instance.x_true, x_hat)
    raw_l2_kernel, raw_l1_kernel = raw_error_norms(instance.h_true, h_hat)

    return RunRecord(
        sigma=instance.sigma,
        sigma_index=sigma_index,
        method=method,
        realization=instance.realization,
        seed=instance.seed,
        termination=result.termination.value,
        iterations=result.iterations,
        metrics={
            "l2_signal": l2_signal,
            "l1_signal": l1_signal,
            "l2_kernel": l2_kernel,
            "l1_kernel": l1_kernel,
            "l2_obs": l2_obs,
            "l1_obs": l1_obs,
            "time_s": elapsed,
        },
        raw={
            "l2_signal": raw_l2_signal,
            "l1_signal": raw_l1_signal,
            "l2_kernel": raw_l2_kernel,
            "l1_kernel": raw_l1_kernel,
        },
        trace=result.trace,
    )


@dataclass
class SingleRun:
    instance: SyntheticInstance
    result: SolveResult
    elapsed: float
    record: Optional[RunRecord] = None


def run_single(
    cfg: ExperimentConfig,
    method: str,
    sigma: Optional[float] = None,
    realization: int = 0,
    y=None,
    kernel_reference=None,
    x_true=None,
) -> SingleRun:
    """
    Solve one instance: a seeded synthetic one, or the supplied trace y.

    For a supplied trace the constraints come from kernel_reference (default:
    the configured Ricker wavelet) and metrics are only computed when x_true
    is given. Solver errors propagate.
    """
    if y is None:
        sigma = cfg.sigma_list[0] if sigma is None else sigma
        instance = make_instance(cfg, sigma, realization)
    else:
        if kernel_reference is None:
            kernel_reference = ricker_wavelet(cfg.s, cfg.ricker_peak_hz, cfg.sample_interval_s)
        instance = observed_instance(cfg, y, kernel_reference, x_true)

    start = time.perf_counter()
    result = solve_instance(instance, method, cfg)
    elapsed = time.perf_counter() - start
    record = None
    if instance.x_true is not None:
        record = evaluate_run(instance, method, result, elapsed, align_scale=cfg.align_scale)
    return SingleRun(instance, result, elapsed, record)


class RealizationTask(NamedTuple):
    cfg: ExperimentConfig
    sigma_index: int
    sigma: float
    realization: int
    methods: Tuple[str, ...] = tuple(METHODS)
    inner_x: Optional[int] = None
    soot_overrides: Optional[Dict[str, float]] = None
    lambda_b: Optional[float] = None
    keep_trace: bool = False
    tag: Any = None


def run_realization(task: RealizationTask) -> List[RunRecord]:
    """
    Generate one instance and run each requested method on it.

    Solver errors are caught per method and recorded on the RunRecord so the
    remaining runs of the study go on.
    """
    cfg = task.cfg
    seed = realization_seed(cfg.seed, task.realization)
    try:
        instance = make_instance(cfg, task.sigma, task.realization, task.sigma_index)
    except DeconvolutionError as e:
        logger.error(f"❌ Instance generation failed (sigma={task.sigma}, r={task.realization}): {e}")
        return [
            RunRecord(task.sigma, task.sigma_index, method, task.realization, seed, error=str(e))
            for method in task.methods
        ]

    records = []
    for method in task.methods:
        start = time.perf_counter()
        try:
            result = solve_instance(
                instance, method, cfg,
                soot_overrides=task.soot_overrides,
                inner_x=task.inner_x,
                lambda_b=task.lambda_b,
            )
            record = evaluate_run(instance, method, result, time.perf_counter() - start,
                                  task.sigma_index, cfg.align_scale)
        except (DeconvolutionError, ArithmeticError, ValueError) as e:
            logger.error(f"❌ {method} failed (sigma={task.sigma}, r={task.realization}): {e}")
            records.append(RunRecord(task.sigma, task.sigma_index, method, task.realization, seed, error=str(e)))
            continue
        if record.failed:
            logger.error(f"❌ {method} stopped on {record.termination} (sigma={task.sigma}, r={task.realization})")
        if not task.keep_trace:
            record.trace = None
        records.append(record)
    return records


def run_tasks(tasks: Sequence[RealizationTask], workers: int = 1) -> List[Tuple[Any, List[RunRecord]]]:
    """
    Execute realization tasks, in a spawn-context process pool when workers > 1.

    Returns (tag, records) pairs in task order regardless of completion order.
    """
    if workers > 1 and len(tasks) > 1:
        logger.info(f"🚀 Running {len(tasks)} realizations on {workers} worker processes")
        ctx = multiprocessing.get_context("spawn")
        with ctx.Pool(min(workers, len(tasks))) as pool:
            results = pool.map(run_realization, tasks)
    else:
        results = [run_realization(task) for task in tasks]
    return [(task.tag, records) for task, records in zip(tasks, results)]


def _mean_std(values: Sequence[float]) -> Tuple[float, float]:
    if not values:
        return math.nan, math.nan
    arr = np.asarray(values, dtype=np.float64)
    std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return float(np.mean(arr)), std


# ============================================================================
# BENCHMARK TABLE
# ============================================================================

@dataclass
class MetricsRow:
    """Per-(sigma, method) means and standard deviations over realizations"""
    sigma: float
    method: str
    means: Dict[str, float]
    stds: Dict[str, float]
    failures: int
    runs: int

    def mean(self, key: str) -> float:
        return self.means[key]

    def to_row(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {"sigma": self.sigma, "method": self.method}
        row.update(self.means)
        row["failures"] = self.failures
        return row


def aggregate_records(
    records: Sequence[RunRecord],
    sigma_list: Sequence[float],
    methods: Sequence[str],
) -> List[MetricsRow]:
    rows = []
    for sigma_index, sigma in enumerate(sigma_list):
        for method in methods:
            cell = [r for r in records if r.sigma_index == sigma_index and r.method == method]
            ok = [r for r in cell if not r.failed]
            means, stds = {}, {}
            for key in METRIC_KEYS:
                means[key], stds[key] = _mean_std([r.metrics[key] for r in ok])
            rows.append(MetricsRow(sigma, method, means, stds, failures=len(cell) - len(ok), runs=len(cell)))
            if not ok:
                logger.error(f"❌ Every run failed for sigma={sigma} method={method}")
    return rows


@dataclass
class TableResult:
    rows: List[MetricsRow]
    records: List[RunRecord]
    files: Dict[str, str] = field(default_factory=dict)

    @property
    def failures(self) -> int:
        return sum(row.failures for row in self.rows)

    @property
    def all_failed_cells(self) -> List[Tuple[float, str]]:
        return [(row.sigma, row.method) for row in self.rows if row.runs and row.failures == row.runs]


def _seed_table(cfg: ExperimentConfig, realizations: int) -> List[Dict[str, Any]]:
    return [
        {"realization": r, "seed": realization_seed(cfg.seed, r)}
        for r in range(realizations)
    ]


def run_table(
    cfg: ExperimentConfig,
    saver: Optional[ResultSaver] = None,
    methods: Sequence[str] = tuple(METHODS),
) -> TableResult:
    """
    Benchmark both methods on every (sigma, realization) pair.

    Writes metrics.csv (means), runs.csv (one row per run, normalized and raw
    errors), manifest.json (resolved config, seeds, standard deviations) and,
    with cfg.verbose, one trace CSV per run under traces/.
    """
    for method in methods:
        if method not in METHODS:
            raise ConfigurationError(f"unknown method '{method}' (expected one of {METHODS})")

    logger.info(f"📊 Benchmark: sigmas={cfg.sigma_list} realizations={cfg.realizations} "
                f"N={cfg.n} S={cfg.s} methods={list(methods)}")
    tasks = [
        RealizationTask(cfg, sigma_index, sigma, r, tuple(methods), keep_trace=cfg.verbose)
        for sigma_index, sigma in enumerate(cfg.sigma_list)
        for r in range(cfg.realizations)
    ]
    start = time.perf_counter()
    records = [record for _, batch in run_tasks(tasks, cfg.workers) for record in batch]
    records.sort(key=RunRecord.sort_key)
    rows = aggregate_records(records, cfg.sigma_list, methods)
    result = TableResult(rows=rows, records=records)

    for row in rows:
        logger.info(f"   sigma={row.sigma:<6} {row.method:<8} l2={row.mean('l2_signal'):.4e} l1={row.mean('l1_signal'):.4e} "
                    f"obs_l2={row.mean('l2_obs'):.4e} failures={row.failures}")

    if saver is not None:
        result.files["metrics"] = saver.save_metrics(row.to_row() for row in rows)
        result.files["runs"] = saver.save_runs(record.to_row() for record in records)
        if cfg.verbose:
            saver._ensure_results_directory("traces")
            for record in records:
                if record.trace is not None:
                    name = f"traces/{record.method}_sigma{record.sigma_index}_r{record.realization}.csv"
                    saver.save_trace(name, record.trace)
        result.files["manifest"] = saver.save_manifest({
            "study": "bench",
            "version": APP_VERSION,
            "config": cfg.model_dump(mode="json"),
            "methods": list(methods),
            "seeds": _seed_table(cfg, cfg.realizations),
            "noise_seed_rule": "default_rng([seed ^ realization, sigma_index + 1])",
            "std": [{"sigma": row.sigma, "method": row.method, **row.stds} for row in rows],
            "failures": [
                {"sigma": r.sigma, "method": r.method, "realization": r.realization,
                 "error": r.error or r.termination}
                for r in records if r.failed
            ],
            "elapsed_s": time.perf_counter() - start,
        })

    logger.info(f"✅ Benchmark finished in {time.perf_counter() - start:.1f}s ({result.failures} failed runs)")
    return result


# ============================================================================
# INNER-LOOP STUDY
# ============================================================================

@dataclass
class InnerLoopRow:
    J: int
    mean_time_s: float
    std_time_s: float
    mean_l1_err: float
    runs: int
    failures: int
    terminations: Dict[str, int] = field(default_factory=dict)

    def to_row(self) -> Dict[str, Any]:
        return {
            "J": self.J,
            "mean_time_s": self.mean_time_s,
            "std_time_s": self.std_time_s,
            "mean_l1_err": self.mean_l1_err,
        }


def run_innerloop_study(
    cfg: ExperimentConfig,
    j_values: Optional[Sequence[int]] = None,
    saver: Optional[ResultSaver] = None,
) -> List[InnerLoopRow]:
    """SOOT wall time and l1 signal error against the number of inner x-steps J"""
    j_values = list(j_values or cfg.j_values)
    if not j_values or any(j < 1 for j in j_values):
        raise ConfigurationError(f"inner-loop counts must be a non-empty list of integers >= 1, got {j_values}")

    sigma = cfg.innerloop_sigma
    logger.info(f"⏱️ Inner-loop study: J={j_values} sigma={sigma} realizations={cfg.realizations}")
    tasks = [
        RealizationTask(cfg, 0, sigma, r, (METHOD_SOOT,), inner_x=j, tag=j)
        for j in j_values
        for r in range(cfg.realizations)
    ]
    by_j: Dict[int, List[RunRecord]] = {j: [] for j in j_values}
    for j, batch in run_tasks(tasks, cfg.workers):
        by_j[j].extend(batch)

    rows = []
    for j in j_values:
        records = sorted(by_j[j], key=RunRecord.sort_key)
        ok = [r for r in records if not r.failed]
        mean_time, std_time = _mean_std([r.metrics["time_s"] for r in ok])
        mean_l1, _ = _mean_std([r.metrics["l1_signal"] for r in ok])
        terminations: Dict[str, int] = {}
        for r in records:
            label = r.termination if r.error is None else "error"
            terminations[label] = terminations.get(label, 0) + 1
        rows.append(InnerLoopRow(j, mean_time, std_time, mean_l1, len(records), len(records) - len(ok), terminations))
        logger.info(f"   J={j:<4} time={mean_time:.3f}s ±{std_time:.3f} l1={mean_l1:.4e} {terminations}")

    if saver is not None:
        saver.save_innerloop(row.to_row() for row in rows)
        saver.save_manifest({
            "study": "innerloops",
            "version": APP_VERSION,
            "config": cfg.model_dump(mode="json"),
            "j_values": j_values,
            "sigma": sigma,
            "seeds": _seed_table(cfg, cfg.realizations),
            "terminations": {str(row.J): row.terminations for row in rows},
            "failures": {str(row.J): row.failures for row in rows},
        }, filename="innerloops_manifest.json")
    return rows


# ============================================================================
# GRID SEARCH
# ============================================================================

@dataclass
class GridCell:
    params: Dict[str, float]
    mean_l1_signal: float
    mean_l2_signal: float
    failures: int
    runs: int

    def selection_key(self, keys: Sequence[str]) -> Tuple:
        l1 = self.mean_l1_signal if math.isfinite(self.mean_l1_signal) else math.inf
        l2 = self.mean_l2_signal if math.isfinite(self.mean_l2_signal) else math.inf
        return (l1, l2) + tuple(self.params[k] for k in keys)


@dataclass
class GridSearchResult:
    method: str
    keys: List[str]
    cells: List[GridCell]
    best: GridCell
    files: Dict[str, str] = field(default_factory=dict)

    def config_overrides(self) -> Dict[str, float]:
        """The selected cell as ExperimentConfig field values"""
        return {GRID_CONFIG_FIELDS[key]: value for key, value in self.best.params.items()}


def _validate_grid(grid: Dict[str, Sequence[float]], method: str) -> List[str]:
    allowed = SOOT_GRID_KEYS if method == METHOD_SOOT else BASELINE_GRID_KEYS
    unknown = sorted(set(grid) - set(allowed))
    if unknown:
        raise ConfigurationError(f"unknown {method} grid parameters {unknown} (allowed: {list(allowed)})")
    if not grid:
        raise ConfigurationError("grid must name at least one parameter")
    for key, values in grid.items():
        if not values:
            raise ConfigurationError(f"grid parameter '{key}' has no values")
        if any(not v > 0 and not (key == "lambda_b" and v == 0) for v in values):
            raise ConfigurationError(f"grid parameter '{key}' must be positive, got {list(values)}")
    return [key for key in allowed if key in grid]


def grid_search(
    cfg: ExperimentConfig,
    grid: Optional[Dict[str, Sequence[float]]] = None,
    method: str = METHOD_SOOT,
    saver: Optional[ResultSaver] = None,
) -> GridSearchResult:
    """
    Exhaustive search minimizing the mean l1 signal error.

    Every cell runs on the same grid_realizations seeded instances at
    grid_sigma. Ties fall back to the mean l2 signal error, then to the
    parameter values in key order.
    """
    if method not in METHODS:
        raise ConfigurationError(f"unknown method '{method}' (expected one of {METHODS})")
    if grid is None:
        grid = cfg.soot_grid if method == METHOD_SOOT else cfg.baseline_grid
    keys = _validate_grid(grid, method)
    combos = [dict(zip(keys, values)) for values in itertools.product(*(grid[k] for k in keys))]
    logger.info(f"🔍 Grid search ({method}): {len(combos)} cells x {cfg.grid_realizations} realizations "
                f"at sigma={cfg.grid_sigma}")

    tasks = []
    for index, params in enumerate(combos):
        for r in range(cfg.grid_realizations):
            if method == METHOD_SOOT:
                task = RealizationTask(cfg, 0, cfg.grid_sigma, r, (METHOD_SOOT,), soot_overrides=params, tag=index)
            else:
                task = RealizationTask(cfg, 0, cfg.grid_sigma, r, (METHOD_BASELINE,),
                                       lambda_b=params["lambda_b"], tag=index)
            tasks.append(task)

    by_cell: Dict[int, List[RunRecord]] = {i: [] for i in range(len(combos))}
    for index, batch in run_tasks(tasks, cfg.workers):
        by_cell[index].extend(batch)

    cells = []
    for index, params in enumerate(combos):
        records = by_cell[index]
        ok = [r for r in records if not r.failed]
        mean_l1, _ = _mean_std([r.metrics["l1_signal"] for r in ok])
        mean_l2, _ = _mean_std([r.metrics["l2_signal"] for r in ok])
        cells.append(GridCell(params, mean_l1, mean_l2, len(records) - len(ok), len(records)))
        logger.debug(f"   {params} l1={mean_l1:.4e} l2={mean_l2:.4e}")

    best = min(cells, key=lambda cell: cell.selection_key(keys))
    result = GridSearchResult(method=method, keys=keys, cells=cells, best=best)
    logger.info(f"🏆 Best {method} cell: {best.params} (l1={best.mean_l1_signal:.4e}, l2={best.mean_l2_signal:.4e})")

    if saver is not None:
        rows = []
        for cell in cells:
            row = dict(cell.params)
            row.update({
                "mean_l1_signal": cell.mean_l1_signal,
                "mean_l2_signal": cell.mean_l2_signal,
                "failures": cell.failures,
                "selected": int(cell is best),
            })
            rows.append(row)
        result.files["grid"] = saver.save_grid(keys + GRID_CSV_COLUMNS, rows, f"grid_{method}.csv")
        result.files["manifest"] = saver.save_manifest({
            "study": "gridsearch",
            "version": APP_VERSION,
            "method": method,
            "config": cfg.model_dump(mode="json"),
            "grid": {k: list(grid[k]) for k in keys},
            "sigma": cfg.grid_sigma,
            "seeds": _seed_table(cfg, cfg.grid_realizations),
            "best": best.params,
            "config_overrides": result.config_overrides(),
        }, filename=f"grid_{method}_manifest.json")
    return result
