"""
Result Saver Service - writes signals, traces, metrics tables and run manifests
"""
import csv
import json
import logging
import math
import os
from datetime import datetime
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from constants import (
    INNERLOOP_CSV_HEADER,
    METRICS_CSV_HEADER,
    RUNS_CSV_HEADER,
    TRACE_CSV_HEADER,
)
from .errors import DataFormatError
from .solve_trace import SolveTrace

logger = logging.getLogger(__name__)

def format_value(value: Any) -> str:
    """Shortest round-trip text for floats, plain str() for everything else"""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def write_signal_csv(path: str, values: Sequence[float]) -> None:
    """One sample per line, no header"""
    values = np.asarray(values, dtype=np.float64)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        for value in values:
            writer.writerow([format_value(value)])


def _parse_samples(tokens: Iterable[Tuple[int, str]], path: str) -> np.ndarray:
    values = []
    for lineno, token in tokens:
        try:
            values.append(float(token))
        except ValueError:
            raise DataFormatError(f"{path}:{lineno}: '{token}' is not a number")
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise DataFormatError(f"{path}: no samples found")
    if not np.all(np.isfinite(arr)):
        raise DataFormatError(f"{path}: contains NaN or Inf samples")
    return arr


def read_signal_csv(path: str) -> np.ndarray:
    """
    Read a 1-D signal written by write_signal_csv: one number per line.

    Multi-column rows use their last column, so index,value files load too.

    Raises:
        OSError: the file cannot be opened
        DataFormatError: non-numeric, empty or non-finite content
    """
    tokens = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        for lineno, row in enumerate(csv.reader(f), start=1):
            if not row or not "".join(row).strip():
                continue
            token = row[-1].strip()
            tokens.append((lineno, token))
    return _parse_samples(tokens, path)


def write_signal_json(path: str, values: Sequence[float]) -> None:
    """A bare JSON array of samples"""
    values = np.asarray(values, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as f:
        json.dump([float(v) for v in values], f)


def read_signal_json(path: str) -> np.ndarray:
    """Accepts a bare list or an object with a 'values' list"""
    with open(path, "r", encoding="utf-8") as f:
        try:
            payload = json.load(f)
        except json.JSONDecodeError as e:
            raise DataFormatError(f"{path}: invalid JSON ({e})")
    if isinstance(payload, dict):
        payload = payload.get("values")
    if not isinstance(payload, list):
        raise DataFormatError(f"{path}: expected a list of samples or an object with 'values'")
    return _parse_samples(((i, str(v)) for i, v in enumerate(payload, start=1)), path)


def read_signal(path: str) -> np.ndarray:
    if path.lower().endswith(".json"):
        return read_signal_json(path)
    return read_signal_csv(path)


def _json_safe(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_json_safe(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


class ResultSaver:
    """Handles writing study outputs into a results directory"""

    def __init__(self, results_dir: str = "results"):
        self.results_dir = results_dir
        self._ensure_results_directory()
        logger.debug(f"💾 Result Saver writing to {os.path.abspath(self.results_dir)}")

    def _ensure_results_directory(self, subdir: Optional[str] = None) -> str:
        """Ensure the results directory (or one of its subdirectories) exists"""
        path = self.results_dir if subdir is None else os.path.join(self.results_dir, subdir)
        if not os.path.exists(path):
            os.makedirs(path)
            logger.info(f"📁 Created results directory: {path}")
        return path

    def path(self, filename: str) -> str:
        return os.path.join(self.results_dir, filename)

    def _write_rows(self, filename: str, header: List[str], rows: Iterable[Dict[str, Any]]) -> str:
        """
        Write dict rows under a fixed header

        Args:
            filename: Path relative to the results directory
            header: Column order; keys outside it are ignored
            rows: Row dictionaries

        Returns:
            str: Path of the written file
        """
        filepath = self.path(filename)
        parent = os.path.dirname(filepath)
        if parent and not os.path.exists(parent):
            os.makedirs(parent)
        count = 0
        with open(filepath, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(row.get(column, "")) for column in header])
                count += 1
        logger.info(f"✅ Saved {filename}: {count} rows")
        return filepath

    def save_signal(self, filename: str, values: Sequence[float]) -> str:
        filepath = self.path(filename)
        write_signal_csv(filepath, values)
        logger.info(f"✅ Saved signal {filename} ({len(values)} samples)")
        return filepath

    def save_signal_json(self, filename: str, values: Sequence[float]) -> str:
        filepath = self.path(filename)
        write_signal_json(filepath, values)
        logger.info(f"✅ Saved signal {filename} ({len(values)} samples)")
        return filepath

    def save_trace(self, filename: str, trace: SolveTrace) -> str:
        return self._write_rows(filename, TRACE_CSV_HEADER, (row.to_dict() for row in trace.rows))

    def save_metrics(self, rows: Iterable[Dict[str, Any]], filename: str = "metrics.csv") -> str:
        return self._write_rows(filename, METRICS_CSV_HEADER, rows)

    def save_runs(self, rows: Iterable[Dict[str, Any]], filename: str = "runs.csv") -> str:
        return self._write_rows(filename, RUNS_CSV_HEADER, rows)

    def save_innerloop(self, rows: Iterable[Dict[str, Any]], filename: str = "innerloops.csv") -> str:
        return self._write_rows(filename, INNERLOOP_CSV_HEADER, rows)

    def save_kernel_overlay(self, kernels: Dict[str, Sequence[float]], filename: str = "kernel_overlay.csv") -> str:
        """One row per tap k, one column per kernel (truth and estimates side by side)"""
        columns = {name: np.asarray(values, dtype=np.float64) for name, values in kernels.items()}
        sizes = {values.size for values in columns.values()}
        if len(sizes) != 1:
            raise DataFormatError(f"kernels of different lengths cannot be overlaid: {sorted(sizes)}")
        rows = ({"k": k, **{name: values[k] for name, values in columns.items()}} for k in range(sizes.pop()))
        return self._write_rows(filename, ["k", *columns], rows)

    def save_grid(self, header: List[str], rows: Iterable[Dict[str, Any]], filename: str) -> str:
        return self._write_rows(filename, header, rows)

    def save_manifest(self, manifest: Dict[str, Any], filename: str = "manifest.json") -> str:
        """
        Save the resolved configuration, seeds and summary of a run

        Args:
            manifest: JSON-compatible content (numpy values are converted, non-finite floats become null)
            filename: Target file name

        Returns:
            str: Path of the written file
        """
        payload = dict(_json_safe(manifest))
        payload.setdefault("created_at", datetime.now().isoformat(timespec="seconds"))
        filepath = self.path(filename)
        with open(filepath, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=4, ensure_ascii=False)
        logger.info(f"✅ Saved manifest {filename} ({os.path.getsize(filepath)} bytes)")
        return filepath

    def list_saved_results(self) -> List[str]:
        """CSV and JSON files at the top of the results directory, in reverse name order"""
        if not os.path.exists(self.results_dir):
            return []
        files = [f for f in os.listdir(self.results_dir) if f.endswith((".csv", ".json"))]
        files.sort(reverse=True)
        return files
