"""CRUD operations for the run registry."""
import math
from typing import Any, Dict, Iterable, List, Optional

from sqlalchemy import desc, func
from sqlalchemy.orm import Session

from .models import BenchmarkRun, MetricsRecord


def _finite_or_none(value: Optional[float]) -> Optional[float]:
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


# ==================== Benchmark Run CRUD ====================

def create_run(
    db: Session,
    study: str,
    seed: int,
    config: Dict[str, Any],
    summary: Optional[Dict[str, Any]] = None,
    output_dir: Optional[str] = None,
    status: str = "completed",
) -> BenchmarkRun:
    """Register a finished study."""
    run = BenchmarkRun(study=study, seed=seed, status=status, output_dir=output_dir)
    run.set_config(config)
    if summary is not None:
        run.set_summary(summary)
    db.add(run)
    db.commit()
    db.refresh(run)
    return run


def add_metrics(db: Session, run_id: int, rows: Iterable[Dict[str, Any]]) -> List[MetricsRecord]:
    """Attach per-(sigma, method) mean errors to a run."""
    records = []
    for row in rows:
        record = MetricsRecord(
            run_id=run_id,
            sigma=float(row["sigma"]),
            method=str(row["method"]),
            l2_signal=_finite_or_none(row.get("l2_signal")),
            l1_signal=_finite_or_none(row.get("l1_signal")),
            l2_kernel=_finite_or_none(row.get("l2_kernel")),
            l1_kernel=_finite_or_none(row.get("l1_kernel")),
            l2_obs=_finite_or_none(row.get("l2_obs")),
            l1_obs=_finite_or_none(row.get("l1_obs")),
            time_s=_finite_or_none(row.get("time_s")),
            failures=int(row.get("failures", 0)),
        )
        db.add(record)
        records.append(record)
    db.commit()
    return records


def get_run(db: Session, run_id: int) -> Optional[BenchmarkRun]:
    """Get a run by ID."""
    return db.query(BenchmarkRun).filter(BenchmarkRun.id == run_id).first()


def get_runs(db: Session, study: Optional[str] = None, skip: int = 0, limit: int = 100) -> List[BenchmarkRun]:
    """Runs ordered by most recent first, optionally filtered by study."""
    query = db.query(BenchmarkRun)
    if study:
        query = query.filter(BenchmarkRun.study == study)
    return query.order_by(desc(BenchmarkRun.created_at), desc(BenchmarkRun.id)).offset(skip).limit(limit).all()


def delete_run(db: Session, run_id: int) -> bool:
    """Delete a run and its metrics."""
    run = get_run(db, run_id)
    if run:
        db.delete(run)
        db.commit()
        return True
    return False


# ==================== Statistics ====================

def get_statistics(db: Session) -> Dict[str, Any]:
    """Run counts per study and method-level mean l1 signal error."""
    total_runs = db.query(func.count(BenchmarkRun.id)).scalar()
    per_study = db.query(
        BenchmarkRun.study,
        func.count(BenchmarkRun.id).label("count")
    ).group_by(BenchmarkRun.study).all()
    per_method = db.query(
        MetricsRecord.method,
        func.avg(MetricsRecord.l1_signal).label("mean_l1_signal"),
        func.sum(MetricsRecord.failures).label("failures"),
    ).group_by(MetricsRecord.method).all()

    return {
        "total_runs": total_runs or 0,
        "runs_per_study": {study: count for study, count in per_study},
        "methods": [
            {"method": method, "mean_l1_signal": mean_l1, "failures": int(failures or 0)}
            for method, mean_l1, failures in per_method
        ],
    }
