from fastapi import FastAPI, HTTPException, Request, Depends
from fastapi.middleware.cors import CORSMiddleware
from contextlib import asynccontextmanager
from sqlalchemy.orm import Session
from typing import Optional
import logging
import math
import time
import uuid

from config import ConfigFileError, build_experiment_config, settings, setup_logging
from constants import APP_TITLE, APP_DESCRIPTION, APP_VERSION, ALLOWED_ORIGINS, METHODS
from database.db import get_db, init_db
from database import crud
from models import GenerateRequest, GenerateResponse, SolveRequest, SolveResponse
from services.errors import ConfigurationError, DeconvolutionError, PreconditionError
from services.experiment_runner import run_single
from services.seismic_bench import make_instance

# Initialize logging first
setup_logging()

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """FastAPI lifespan event handler"""
    logger.info("🚀 SOOT DECONVOLUTION API STARTUP")

    logger.info("⚡ Initializing run registry...")
    try:
        init_db()
    except Exception as db_error:
        logger.error(f"❌ Database initialization failed: {str(db_error)}", exc_info=True)
        logger.warning("⚠️ API will continue but /runs and /stats may not work")

    settings.validate_config()
    logger.info(f"🎯 Application ready (methods: {METHODS}, results dir: {settings.RESULTS_DIR})")

    yield

    logger.info("👋 Application shutdown complete")

app = FastAPI(
    title=APP_TITLE,
    description=APP_DESCRIPTION,
    version=APP_VERSION,
    lifespan=lifespan
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=ALLOWED_ORIGINS,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.middleware("http")
async def log_requests(request: Request, call_next):
    """Middleware to log all HTTP requests with essential info"""
    request_id = str(uuid.uuid4())[:8]
    start_time = time.time()

    if request.url.path not in ["/health"]:
        logger.info(f"📥 {request.method} {request.url.path} [ID: {request_id}]")

    request.state.request_id = request_id
    request.state.start_time = start_time

    try:
        response = await call_next(request)
        process_time = time.time() - start_time
        if request.url.path not in ["/health"] or response.status_code >= 400:
            logger.info(f"📤 {response.status_code} in {process_time:.2f}s [ID: {request_id}]")
        response.headers["X-Process-Time"] = str(process_time)
        response.headers["X-Request-ID"] = request_id
        return response
    except Exception as e:
        logger.error(f"💥 Request failed: {str(e)} [ID: {request_id}]")
        raise


def _finite(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return float(value)


@app.get("/")
async def root():
    return {"message": "SOOT sparse blind deconvolution API", "version": APP_VERSION}


@app.get("/health")
async def health_check(request: Request):
    """Health check endpoint"""
    request_id = getattr(request.state, 'request_id', 'unknown')
    db_status = "unknown"
    try:
        from database.db import engine
        from sqlalchemy import inspect
        tables = inspect(engine).get_table_names()
        db_status = f"connected ({len(tables)} tables)"
    except Exception as db_err:
        db_status = f"error: {str(db_err)[:50]}"
        logger.warning(f"⚠️ Health check database query failed [ID: {request_id}]: {db_err}")

    return {
        "status": "healthy",
        "database": db_status,
        "version": APP_VERSION,
        "methods": METHODS,
        "workers": settings.WORKERS,
    }


@app.post("/generate", response_model=GenerateResponse)
async def generate(request: GenerateRequest, http_request: Request):
    """Seeded synthetic reflectivity, Ricker wavelet and noisy trace"""
    request_id = getattr(http_request.state, 'request_id', 'unknown')
    overrides = {
        "n": request.n,
        "s": request.s,
        "seed": request.seed,
        "sigma_list": [request.sigma],
        "spike_prob": request.spike_prob,
        "amp_range": request.amp_range,
        "workers": 1,
    }
    try:
        cfg = build_experiment_config(overrides=overrides)
        instance = make_instance(cfg, request.sigma, request.realization)
    except (ConfigFileError, DeconvolutionError) as e:
        logger.warning(f"❌ Invalid generate request [ID: {request_id}]: {e}")
        raise HTTPException(status_code=400, detail=str(e))

    logger.info(f"🌊 Generated N={cfg.n} S={cfg.s} sigma={request.sigma} seed={instance.seed} [ID: {request_id}]")
    return GenerateResponse(
        seed=instance.seed,
        noise_seed=list(instance.noise_seed),
        x_true=instance.x_true.tolist(),
        h_true=instance.h_true.tolist(),
        y=instance.y.tolist(),
        kernel_bounds={"lo": instance.g2.lo, "hi": instance.g2.hi, "radius": instance.g2.radius},
    )


@app.post("/solve", response_model=SolveResponse)
def solve(request: SolveRequest, http_request: Request, record: bool = False, db: Session = Depends(get_db)):
    """Run SOOT or the baseline on a generated instance or an uploaded trace"""
    request_id = getattr(http_request.state, 'request_id', 'unknown')
    try:
        cfg = build_experiment_config(overrides={**request.config_overrides(), "workers": 1})
        run = run_single(
            cfg, request.method,
            sigma=request.sigma,
            realization=request.realization,
            y=request.y,
            kernel_reference=request.kernel_reference,
        )
    except (ConfigFileError, ConfigurationError, PreconditionError) as e:
        logger.warning(f"❌ Invalid solve request [ID: {request_id}]: {e}")
        raise HTTPException(status_code=400, detail=str(e))
    except DeconvolutionError as e:
        logger.error(f"💥 Solver failed [ID: {request_id}]: {e}")
        raise HTTPException(status_code=500, detail=f"Solver failed: {str(e)}")

    summary = run.result.summary()
    response = SolveResponse(
        method=request.method,
        termination=summary["termination"],
        iterations=summary["iterations"],
        final_F=_finite(summary["final_F"]),
        wall_time_s=run.elapsed,
        x_hat=run.result.x_hat.tolist(),
        h_hat=run.result.h_hat.tolist(),
        metrics=run.record.metrics if run.record else None,
        trace=[{k: _finite(v) for k, v in row.to_dict().items()} for row in run.result.trace.rows]
        if request.include_trace else None,
    )
    logger.info(f"✅ {request.method} {summary['termination']} after {summary['iterations']} iterations "
                f"in {run.elapsed:.2f}s [ID: {request_id}]")

    if record:
        try:
            saved = crud.create_run(
                db, "solve", cfg.seed, cfg.model_dump(mode="json"),
                summary={**summary, "final_F": _finite(summary["final_F"]), "metrics": response.metrics},
                status="failed" if run.result.failed else "completed",
            )
            response.id = saved.id
            logger.info(f"💾 Recorded run ID {saved.id} [ID: {request_id}]")
        except Exception as e:
            logger.error(f"⚠️ Failed to record run: {str(e)} [ID: {request_id}]")

    return response


# ==================== Run Registry Endpoints ====================

def _run_to_dict(run, include_metrics: bool = False):
    data = {
        "id": run.id,
        "study": run.study,
        "seed": run.seed,
        "status": run.status,
        "output_dir": run.output_dir,
        "created_at": run.created_at.isoformat() if run.created_at else None,
        "summary": run.get_summary(),
    }
    if include_metrics:
        data["config"] = run.get_config()
        data["metrics"] = [m.to_dict() for m in run.metrics]
    return data


@app.get("/runs")
async def list_runs(study: Optional[str] = None, skip: int = 0, limit: int = 100, db: Session = Depends(get_db)):
    """Registered runs, most recent first."""
    try:
        runs = crud.get_runs(db, study=study, skip=skip, limit=limit)
        logger.info(f"📚 Retrieved {len(runs)} runs")
        return [_run_to_dict(run) for run in runs]
    except Exception as e:
        logger.error(f"❌ Failed to retrieve runs: {str(e)}")
        raise HTTPException(status_code=500, detail=str(e))


@app.get("/runs/{run_id}")
async def get_run(run_id: int, db: Session = Depends(get_db)):
    """A registered run with its config and metrics."""
    try:
        run = crud.get_run(db, run_id)
        if not run:
            raise HTTPException(status_code=404, detail="Run not found")
        return _run_to_dict(run, include_metrics=True)
    except HTTPException:
        raise
    except Exception as e:
        logger.error(f"❌ Failed to retrieve run {run_id}: {str(e)}")
        raise HTTPException(status_code=500, detail=str(e))


@app.delete("/runs/{run_id}")
async def delete_run(run_id: int, db: Session = Depends(get_db)):
    """Remove a registered run and its metrics."""
    try:
        if not crud.delete_run(db, run_id):
            raise HTTPException(status_code=404, detail="Run not found")
        logger.info(f"🗑️ Deleted run {run_id}")
        return {"message": "Run deleted", "id": run_id}
    except HTTPException:
        raise
    except Exception as e:
        logger.error(f"❌ Failed to delete run {run_id}: {str(e)}")
        raise HTTPException(status_code=500, detail=str(e))


@app.get("/stats")
async def get_statistics(db: Session = Depends(get_db)):
    """Registry statistics."""
    try:
        return crud.get_statistics(db)
    except Exception as e:
        logger.error(f"❌ Failed to retrieve statistics: {str(e)}")
        raise HTTPException(status_code=500, detail=str(e))


if __name__ == "__main__":
    import uvicorn
    logger.info("🚀 Starting SOOT API server directly...")
    uvicorn.run(app, host=settings.API_HOST, port=settings.API_PORT)
