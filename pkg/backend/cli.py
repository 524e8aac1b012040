"""
Command-line entry point.

    python cli.py generate --sigma 0.02 --out results/generate
    python cli.py solve --method soot --sigma 0.03 --inner-x 71
    python cli.py compare --sigma 0.01
    python cli.py bench --config study.json --workers 4 --record
    python cli.py innerloops --j-values 1 5 71
    python cli.py gridsearch --method baseline
    python cli.py serve --port 8000

Exit codes: 0 success, 1 usage error, 2 solver failure, 3 I/O error.
"""
import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from config import ConfigFileError, build_experiment_config, settings, setup_logging
from constants import (
    EXIT_IO_ERROR,
    EXIT_OK,
    EXIT_SOLVER_FAILURE,
    EXIT_USAGE,
    METHOD_SOOT,
    METHODS,
)
from models import ExperimentConfig
from services.errors import ConfigurationError, DataFormatError, DeconvolutionError
from services.experiment_runner import (
    SingleRun,
    grid_search,
    run_innerloop_study,
    run_single,
    run_table,
)
from services.result_saver import ResultSaver, read_signal
from services.seismic_bench import make_instance

logger = logging.getLogger("cli")

# Flags whose dest is an ExperimentConfig field
CONFIG_FIELDS = tuple(ExperimentConfig.model_fields)
SIGNAL_FORMATS = ("csv", "json")


class CLIArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with EXIT_USAGE"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file whose keys mirror ExperimentConfig fields")
    parser.add_argument("--out", help="Output directory (default: $SOOT_RESULTS_DIR/<command>)")
    parser.add_argument("--seed", dest="seed", type=int, help="Master seed")
    parser.add_argument("--n", dest="n", type=int, help="Signal length N")
    parser.add_argument("--s", dest="s", type=int, help="Kernel length S")
    parser.add_argument("--workers", dest="workers", type=int, help="Worker processes for realizations")
    parser.add_argument("--verbose", dest="verbose", action="store_true", default=None,
                        help="Write per-run trace CSVs")
    parser.add_argument("--align-scale", dest="align_scale", action="store_true", default=None,
                        help="Rescale estimates optimally before computing errors (diagnostics)")
    parser.add_argument("--record", action="store_true", help="Store the run in the SQL run registry")
    parser.add_argument("--log-level", default=None, help="Console log level (default: $SOOT_LOG_LEVEL)")
    parser.add_argument("--no-log-file", action="store_true", help="Do not write logs/soot_YYYYMMDD.log")


def _add_solver_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("solver parameters")
    group.add_argument("--lambda", dest="soot_lambda", type=float, help="Absolute lambda (overrides --lambda-scale)")
    group.add_argument("--lambda-scale", dest="soot_lambda_scale", type=float, help="lambda = scale * ||y||^2")
    group.add_argument("--alpha", dest="soot_alpha", type=float)
    group.add_argument("--beta", dest="soot_beta", type=float)
    group.add_argument("--eta", dest="soot_eta", type=float)
    group.add_argument("--inner-x", dest="inner_x", type=int, help="Inner signal steps J")
    group.add_argument("--inner-h", dest="inner_h", type=int, help="Inner kernel steps I")
    group.add_argument("--max-outer", dest="max_outer", type=int)
    group.add_argument("--stop-tol", dest="stop_tol", type=float, help="Stop when ||dx|| <= tol * sqrt(N)")
    group.add_argument("--lambda-b", dest="baseline_lambda", type=float, help="Baseline l1 weight")
    group.add_argument("--ista-iters", dest="baseline_ista_iters", type=int)


def _add_instance_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--sigma", type=float, help="Noise level (default: first of sigma_list)")
    parser.add_argument("--realization", type=int, default=0, help="Realization index i (seed = master ^ i)")
    parser.add_argument("--format", dest="signal_format", choices=SIGNAL_FORMATS, default="csv",
                        help="File format of written signals")


def build_parser() -> CLIArgumentParser:
    parser = CLIArgumentParser(prog="soot", description="SOOT sparse blind deconvolution toolkit")
    subparsers = parser.add_subparsers(dest="command", metavar="command", parser_class=CLIArgumentParser)
    subparsers.required = True

    generate = subparsers.add_parser("generate", help="Write truth and observation CSVs")
    _add_common_options(generate)
    _add_instance_options(generate)

    solve = subparsers.add_parser("solve", help="Solve one instance with one method")
    _add_common_options(solve)
    _add_solver_options(solve)
    _add_instance_options(solve)
    solve.add_argument("--method", choices=METHODS, default=METHOD_SOOT)
    solve.add_argument("--observation", help="Solve this trace (CSV/JSON) instead of a generated one")
    solve.add_argument("--kernel-reference", help="Kernel whose bounds define the constraint set")
    solve.add_argument("--truth", help="Ground-truth signal for error metrics of --observation")

    compare = subparsers.add_parser("compare", help="Run both methods on one instance")
    _add_common_options(compare)
    _add_solver_options(compare)
    _add_instance_options(compare)

    bench = subparsers.add_parser("bench", help="Benchmark table over noise levels and realizations")
    _add_common_options(bench)
    _add_solver_options(bench)
    bench.add_argument("--sigmas", dest="sigma_list", type=float, nargs="+")
    bench.add_argument("--realizations", dest="realizations", type=int)
    bench.add_argument("--methods", nargs="+", choices=METHODS, default=list(METHODS))

    innerloops = subparsers.add_parser("innerloops", help="Wall time against the inner-loop count J")
    _add_common_options(innerloops)
    _add_solver_options(innerloops)
    innerloops.add_argument("--j-values", dest="j_values", type=int, nargs="+")
    innerloops.add_argument("--sigma", dest="innerloop_sigma", type=float)
    innerloops.add_argument("--realizations", dest="realizations", type=int)

    gridsearch = subparsers.add_parser("gridsearch", help="Exhaustive parameter search on the l1 signal error")
    _add_common_options(gridsearch)
    _add_solver_options(gridsearch)
    gridsearch.add_argument("--method", choices=METHODS, default=METHOD_SOOT)
    gridsearch.add_argument("--grid", help="JSON object or file mapping parameter names to value lists")
    gridsearch.add_argument("--sigma", dest="grid_sigma", type=float)
    gridsearch.add_argument("--realizations", dest="grid_realizations", type=int)

    serve = subparsers.add_parser("serve", help="Serve the HTTP API with uvicorn")
    serve.add_argument("--host", default=settings.API_HOST)
    serve.add_argument("--port", type=int, default=settings.API_PORT)
    serve.add_argument("--log-level", default=None)
    serve.add_argument("--no-log-file", action="store_true")

    return parser


# ============================================================================
# HELPERS
# ============================================================================

def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {name: getattr(args, name) for name in CONFIG_FIELDS if getattr(args, name, None) is not None}
    if getattr(args, "sigma", None) is not None:
        overrides["sigma_list"] = [args.sigma]
    return build_experiment_config(args.config, overrides)


def _output_dir(args: argparse.Namespace) -> str:
    return args.out or os.path.join(settings.RESULTS_DIR, args.command)


def _emit(payload: Dict[str, Any]) -> None:
    print(json.dumps(payload, indent=2, default=str))


def _record(study: str, cfg: ExperimentConfig, summary: Dict[str, Any], out_dir: str,
            metrics_rows: Optional[List[Dict[str, Any]]] = None, status: str = "completed") -> Optional[int]:
    """Store the run in the registry; failures are logged, never fatal"""
    try:
        from database.db import SessionLocal, init_db
        from database import crud

        init_db()
        db = SessionLocal()
        try:
            run = crud.create_run(db, study, cfg.seed, cfg.model_dump(mode="json"),
                                  summary=summary, output_dir=os.path.abspath(out_dir), status=status)
            if metrics_rows:
                crud.add_metrics(db, run.id, metrics_rows)
            logger.info(f"💾 Recorded {study} run with registry ID {run.id}")
            return run.id
        finally:
            db.close()
    except Exception as e:
        logger.error(f"⚠️ Failed to record run: {str(e)}")
        return None


def _single_summary(run: SingleRun) -> Dict[str, Any]:
    summary = run.result.summary()
    summary["wall_time_s"] = run.elapsed
    if run.record is not None:
        summary["metrics"] = run.record.metrics
    if run.result.message:
        summary["message"] = run.result.message
    return summary


def _save_signal(saver: ResultSaver, stem: str, values, fmt: str) -> str:
    if fmt == "json":
        return saver.save_signal_json(f"{stem}.json", values)
    return saver.save_signal(f"{stem}.csv", values)


def _save_single(saver: ResultSaver, run: SingleRun, fmt: str = "csv") -> None:
    method = run.result.method
    _save_signal(saver, f"x_hat_{method}", run.result.x_hat, fmt)
    _save_signal(saver, f"h_hat_{method}", run.result.h_hat, fmt)
    saver.save_trace(f"trace_{method}.csv", run.result.trace)


# ============================================================================
# COMMANDS
# ============================================================================

def cmd_generate(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    out_dir = _output_dir(args)
    saver = ResultSaver(out_dir)
    sigma = cfg.sigma_list[0]
    instance = make_instance(cfg, sigma, args.realization)
    files = {
        "truth_signal": _save_signal(saver, "truth_signal", instance.x_true, args.signal_format),
        "truth_kernel": _save_signal(saver, "truth_kernel", instance.h_true, args.signal_format),
        "observation": _save_signal(saver, "observation", instance.y, args.signal_format),
    }
    files["manifest"] = saver.save_manifest({
        "study": "generate",
        "config": cfg.model_dump(mode="json"),
        "sigma": sigma,
        "realization": args.realization,
        "seed": instance.seed,
        "noise_seed": list(instance.noise_seed),
        "kernel_bounds": {"lo": instance.g2.lo, "hi": instance.g2.hi, "radius": instance.g2.radius},
    })
    _emit({"files": files, "seed": instance.seed})
    return EXIT_OK


def cmd_solve(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    y = kernel_reference = x_true = None
    if args.observation:
        y = read_signal(args.observation)
        kernel_reference = read_signal(args.kernel_reference) if args.kernel_reference else None
        x_true = read_signal(args.truth) if args.truth else None
        cfg = ExperimentConfig.model_validate({
            **cfg.model_dump(),
            "n": y.size,
            "s": kernel_reference.size if kernel_reference is not None else cfg.s,
        })
    elif args.kernel_reference or args.truth:
        raise ConfigurationError("--kernel-reference and --truth require --observation")

    run = run_single(cfg, args.method, sigma=cfg.sigma_list[0], realization=args.realization,
                     y=y, kernel_reference=kernel_reference, x_true=x_true)

    out_dir = _output_dir(args)
    saver = ResultSaver(out_dir)
    _save_single(saver, run, args.signal_format)
    summary = _single_summary(run)
    saver.save_manifest({
        "study": "solve",
        "config": cfg.model_dump(mode="json"),
        "seed": run.instance.seed,
        "noise_seed": list(run.instance.noise_seed),
        "observation_file": args.observation,
        "result": summary,
    })
    failed = run.result.failed
    if args.record:
        summary["id"] = _record("solve", cfg, summary, out_dir, status="failed" if failed else "completed")
    _emit(summary)
    return EXIT_SOLVER_FAILURE if failed else EXIT_OK


def cmd_compare(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    out_dir = _output_dir(args)
    saver = ResultSaver(out_dir)
    sigma = cfg.sigma_list[0]
    runs = {method: run_single(cfg, method, sigma=sigma, realization=args.realization) for method in METHODS}

    instance = runs[METHOD_SOOT].instance
    _save_signal(saver, "x_true", instance.x_true, args.signal_format)
    _save_signal(saver, "h_true", instance.h_true, args.signal_format)
    rows = []
    for method, run in runs.items():
        _save_single(saver, run, args.signal_format)
        _save_signal(saver, f"residual_{method}", instance.x_true - run.result.x_hat, args.signal_format)
        rows.append({"sigma": sigma, "method": method, **run.record.metrics, "failures": int(run.result.failed)})
    saver.save_metrics(rows, filename="comparison.csv")
    saver.save_kernel_overlay({"h_true": instance.h_true,
                               **{f"h_{method}": run.result.h_hat for method, run in runs.items()}})
    summaries = {method: _single_summary(run) for method, run in runs.items()}
    saver.save_manifest({
        "study": "compare",
        "config": cfg.model_dump(mode="json"),
        "sigma": sigma,
        "realization": args.realization,
        "seed": instance.seed,
        "results": summaries,
        "files": saver.list_saved_results(),
    })
    failed = any(run.result.failed for run in runs.values())
    if args.record:
        _record("compare", cfg, summaries, out_dir, metrics_rows=rows, status="failed" if failed else "completed")
    _emit(summaries)
    return EXIT_SOLVER_FAILURE if failed else EXIT_OK


def cmd_bench(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    out_dir = _output_dir(args)
    result = run_table(cfg, ResultSaver(out_dir), methods=args.methods)
    rows = [row.to_row() for row in result.rows]
    dead_cells = result.all_failed_cells
    if args.record:
        _record("bench", cfg, {"failures": result.failures, "files": result.files}, out_dir,
                metrics_rows=rows, status="failed" if dead_cells else "completed")
    _emit({"files": result.files, "failures": result.failures, "rows": rows})
    if dead_cells:
        logger.error(f"❌ Cells with no successful run: {dead_cells}")
        return EXIT_SOLVER_FAILURE
    return EXIT_OK


def cmd_innerloops(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    out_dir = _output_dir(args)
    rows = run_innerloop_study(cfg, saver=ResultSaver(out_dir))
    payload = [dict(row.to_row(), failures=row.failures, terminations=row.terminations) for row in rows]
    if args.record:
        _record("innerloops", cfg, {"rows": payload}, out_dir)
    _emit({"rows": payload})
    return EXIT_SOLVER_FAILURE if any(row.failures == row.runs for row in rows) else EXIT_OK


def _parse_grid(value: Optional[str]) -> Optional[Dict[str, List[float]]]:
    if value is None:
        return None
    text = value
    if os.path.exists(value):
        with open(value, "r", encoding="utf-8") as f:
            text = f.read()
    try:
        grid = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"--grid is neither a JSON object nor a readable file ({e})")
    if not isinstance(grid, dict) or not all(isinstance(v, list) for v in grid.values()):
        raise ConfigurationError("--grid must map parameter names to lists of values")
    try:
        return {str(k): [float(v) for v in values] for k, values in grid.items()}
    except (TypeError, ValueError):
        raise ConfigurationError("--grid values must be numbers")


def cmd_gridsearch(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    out_dir = _output_dir(args)
    grid = _parse_grid(args.grid)
    result = grid_search(cfg, grid=grid, method=args.method, saver=ResultSaver(out_dir))
    payload = {
        "method": result.method,
        "best": result.best.params,
        "mean_l1_signal": result.best.mean_l1_signal,
        "mean_l2_signal": result.best.mean_l2_signal,
        "config_overrides": result.config_overrides(),
        "files": result.files,
    }
    if args.record:
        _record("gridsearch", cfg, payload, out_dir)
    _emit(payload)
    return EXIT_SOLVER_FAILURE if result.best.failures == result.best.runs else EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    logger.info(f"🚀 Serving API on {args.host}:{args.port}")
    uvicorn.run("main:app", host=args.host, port=args.port)
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "compare": cmd_compare,
    "bench": cmd_bench,
    "innerloops": cmd_innerloops,
    "gridsearch": cmd_gridsearch,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    setup_logging(level=args.log_level, log_to_file=not args.no_log_file and settings.LOG_TO_FILE)

    if args.command == "serve":
        return cmd_serve(args)

    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](args, cfg)
    except (ConfigFileError, ConfigurationError, ValidationError) as e:
        logger.error(f"❌ {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, DataFormatError) as e:
        logger.error(f"❌ I/O error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO_ERROR
    except DeconvolutionError as e:
        logger.error(f"💥 Solver failure: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SOLVER_FAILURE


if __name__ == "__main__":
    sys.exit(main())
