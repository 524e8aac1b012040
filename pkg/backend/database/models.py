"""SQLAlchemy models of the run registry."""
import json

from sqlalchemy import Column, DateTime, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import relationship
from sqlalchemy.sql import func

from .db import Base


class BenchmarkRun(Base):
    """One CLI or API invocation (bench, innerloops, gridsearch, solve, compare)."""

    __tablename__ = "benchmark_runs"

    id = Column(Integer, primary_key=True, index=True, autoincrement=True)
    study = Column(String(50), nullable=False, index=True)
    seed = Column(Integer, nullable=False)
    status = Column(String(20), nullable=False, default="completed")  # "completed", "failed"
    config = Column(Text, nullable=False)  # JSON of the resolved ExperimentConfig
    summary = Column(Text, nullable=True)  # JSON of study-specific results
    output_dir = Column(String(512), nullable=True)
    created_at = Column(DateTime(timezone=True), server_default=func.now())

    metrics = relationship("MetricsRecord", back_populates="run", cascade="all, delete-orphan")

    def set_config(self, config_dict):
        self.config = json.dumps(config_dict)

    def get_config(self):
        return json.loads(self.config)

    def set_summary(self, summary_dict):
        self.summary = json.dumps(summary_dict)

    def get_summary(self):
        return json.loads(self.summary) if self.summary else {}

    def __repr__(self):
        return f"<BenchmarkRun(id={self.id}, study='{self.study}', seed={self.seed})>"


class MetricsRecord(Base):
    """Mean errors of one (sigma, method) cell of a benchmark run."""

    __tablename__ = "metrics_records"

    id = Column(Integer, primary_key=True, index=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey("benchmark_runs.id"), nullable=False)
    sigma = Column(Float, nullable=False)
    method = Column(String(20), nullable=False)  # "soot", "baseline"
    l2_signal = Column(Float, nullable=True)
    l1_signal = Column(Float, nullable=True)
    l2_kernel = Column(Float, nullable=True)
    l1_kernel = Column(Float, nullable=True)
    l2_obs = Column(Float, nullable=True)
    l1_obs = Column(Float, nullable=True)
    time_s = Column(Float, nullable=True)
    failures = Column(Integer, nullable=False, default=0)

    run = relationship("BenchmarkRun", back_populates="metrics")

    def to_dict(self):
        return {
            "sigma": self.sigma,
            "method": self.method,
            "l2_signal": self.l2_signal,
            "l1_signal": self.l1_signal,
            "l2_kernel": self.l2_kernel,
            "l1_kernel": self.l1_kernel,
            "l2_obs": self.l2_obs,
            "l1_obs": self.l1_obs,
            "time_s": self.time_s,
            "failures": self.failures,
        }

    def __repr__(self):
        return f"<MetricsRecord(run_id={self.run_id}, sigma={self.sigma}, method='{self.method}')>"
