#!/usr/bin/env python3
"""
Tests for signal I/O and the study output writers
"""
import csv
import json
import math
import sys
import os
import logging
import tempfile
import unittest

import numpy as np

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from constants import METRICS_CSV_HEADER, TRACE_CSV_HEADER
from services.errors import DataFormatError
from services.result_saver import (
    ResultSaver,
    read_signal,
    read_signal_csv,
    read_signal_json,
    write_signal_csv,
    write_signal_json,
)
from services.solve_trace import SolveTrace, TraceRow

logging.basicConfig(level=logging.INFO, format='%(levelname)s - %(message)s')
logger = logging.getLogger(__name__)


class TestSignalFiles(unittest.TestCase):
    """Single-column CSV and JSON signals"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def _write(self, name, text):
        path = os.path.join(self.dir, name)
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        return path

    def test_written_signal_reads_back_exactly(self):
        values = np.random.default_rng(0).standard_normal(17)
        path = os.path.join(self.dir, "x.csv")
        write_signal_csv(path, values)
        np.testing.assert_array_equal(read_signal(path), values)

    def test_csv_has_one_number_per_line(self):
        path = os.path.join(self.dir, "x.csv")
        write_signal_csv(path, [1.0, 2.5])
        with open(path, encoding="utf-8") as f:
            self.assertEqual(f.read(), "1.0\n2.5\n")

    def test_written_json_signal_reads_back_exactly(self):
        values = np.random.default_rng(1).standard_normal(9)
        path = os.path.join(self.dir, "x.json")
        write_signal_json(path, values)
        with open(path, encoding="utf-8") as f:
            self.assertEqual(len(json.load(f)), 9)
        np.testing.assert_array_equal(read_signal(path), values)

    def test_headerless_and_two_column_csv(self):
        np.testing.assert_array_equal(read_signal_csv(self._write("a.csv", "1.5\n-2\n\n3e-1\n")), [1.5, -2.0, 0.3])
        np.testing.assert_array_equal(read_signal_csv(self._write("b.csv", "0,1.0\n1,2.0\n")), [1.0, 2.0])

    def test_rejects_bad_csv(self):
        for name, text in (("nan.csv", "1.0\nnan\n"), ("inf.csv", "inf\n"), ("word.csv", "1.0\nabc\n"), ("header.csv", "value\n1.0\n"), ("empty.csv", "")):
            with self.assertRaises(DataFormatError, msg=name):
                read_signal_csv(self._write(name, text))

    def test_json_forms(self):
        np.testing.assert_array_equal(read_signal_json(self._write("a.json", "[1, 2.5]")), [1.0, 2.5])
        np.testing.assert_array_equal(read_signal(self._write("b.json", '{"values": [0.5]}')), [0.5])
        with self.assertRaises(DataFormatError):
            read_signal_json(self._write("c.json", '{"samples": [1]}'))
        with self.assertRaises(DataFormatError):
            read_signal_json(self._write("d.json", "[1, NaN]"))
        with self.assertRaises(DataFormatError):
            read_signal_json(self._write("e.json", "[1,"))

    def test_missing_file(self):
        with self.assertRaises(OSError):
            read_signal(os.path.join(self.dir, "absent.csv"))


class TestResultSaver(unittest.TestCase):
    """Tables and manifests"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.saver = ResultSaver(os.path.join(self.tmp.name, "out"))

    def tearDown(self):
        self.tmp.cleanup()

    def test_metrics_header(self):
        path = self.saver.save_metrics([{"sigma": 0.01, "method": "soot", "l2_signal": 0.1, "failures": 0}])
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        self.assertEqual(rows[0], METRICS_CSV_HEADER)
        self.assertEqual(rows[1][0], "0.01")
        self.assertEqual(rows[1][1], "soot")
        self.assertEqual(rows[1][-1], "0")

    def test_trace_csv(self):
        trace = SolveTrace()
        trace.append(TraceRow(0, 2.0, 0.0, 0.0, 0.0, 1.0, 3.0))
        trace.append(TraceRow(1, 1.5, 0.2, 0.1, 0.01, 1.0, 3.0))
        path = self.saver.save_trace("traces/t.csv", trace)
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        self.assertEqual(rows[0], TRACE_CSV_HEADER)
        self.assertEqual(len(rows), 3)
        self.assertEqual(float(rows[2][1]), 1.5)

    def test_manifest_is_strict_json(self):
        path = self.saver.save_manifest({"seed": np.int64(3), "value": float("nan"), "list": np.array([1.0, np.inf])})
        with open(path) as f:
            payload = json.load(f)
        self.assertEqual(payload["seed"], 3)
        self.assertIsNone(payload["value"])
        self.assertEqual(payload["list"], [1.0, None])
        self.assertIn("created_at", payload)
        self.assertIn("manifest.json", self.saver.list_saved_results())
        logger.info("✅ Result saver tests passed")

    def test_signal_file(self):
        path = self.saver.save_signal("y.csv", [1.0, math.pi])
        np.testing.assert_array_equal(read_signal(path), [1.0, math.pi])

    def test_json_signal_file(self):
        path = self.saver.save_signal_json("y.json", np.array([1.0, -math.pi, 1e-300]))
        self.assertTrue(path.endswith("y.json"))
        np.testing.assert_array_equal(read_signal(path), [1.0, -math.pi, 1e-300])

    def test_kernel_overlay(self):
        path = self.saver.save_kernel_overlay({"h_true": [0.5, 1.0], "h_soot": np.array([0.4, 0.9])})
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        self.assertEqual(rows, [["k", "h_true", "h_soot"], ["0", "0.5", "0.4"], ["1", "1.0", "0.9"]])
        with self.assertRaises(DataFormatError):
            self.saver.save_kernel_overlay({"a": [1.0], "b": [1.0, 2.0]})
        self.assertEqual(self.saver.list_saved_results(), ["kernel_overlay.csv"])


if __name__ == "__main__":
    unittest.main(verbosity=2)
