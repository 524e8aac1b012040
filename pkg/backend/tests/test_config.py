#!/usr/bin/env python3
"""
Tests for study configuration loading and resolution
"""
import json
import sys
import os
import tempfile
import unittest

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config import ConfigFileError, build_experiment_config, load_config_file
from models import ExperimentConfig


class TestConfigFile(unittest.TestCase):
    """File values, then overrides, then validation"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def _write(self, payload, name="cfg.json"):
        path = os.path.join(self.tmp.name, name)
        with open(path, "w", encoding="utf-8") as f:
            f.write(payload if isinstance(payload, str) else json.dumps(payload))
        return path

    def test_defaults(self):
        cfg = build_experiment_config()
        self.assertIsInstance(cfg, ExperimentConfig)
        self.assertEqual((cfg.n, cfg.s), (784, 41))
        self.assertEqual(cfg.sigma_list, [0.01, 0.02, 0.03])
        self.assertEqual(cfg.inner_x, 71)

    def test_overrides_beat_file(self):
        path = self._write({"n": 200, "s": 21, "seed": 5})
        cfg = build_experiment_config(path, {"seed": 9, "s": None})
        self.assertEqual(cfg.n, 200)
        self.assertEqual(cfg.s, 21)
        self.assertEqual(cfg.seed, 9)

    def test_unknown_keys_rejected(self):
        with self.assertRaises(ConfigFileError):
            load_config_file(self._write({"n": 10, "bogus": 1}))

    def test_invalid_content(self):
        with self.assertRaises(ConfigFileError):
            load_config_file(self._write("[1, 2]"))
        with self.assertRaises(ConfigFileError):
            load_config_file(self._write("{not json"))
        with self.assertRaises(ConfigFileError):
            build_experiment_config(self._write({"n": 10, "s": 20}))
        with self.assertRaises(OSError):
            load_config_file(os.path.join(self.tmp.name, "missing.json"))

    def test_solver_and_baseline_views(self):
        cfg = build_experiment_config(overrides={"inner_x": 5, "max_outer": 40, "baseline_lambda": 0.2})
        self.assertEqual(cfg.solver_config().inner_x, 5)
        self.assertEqual(cfg.solver_config(inner_x=15).inner_x, 15)
        self.assertEqual(cfg.baseline_config().outer_iters, 40)
        self.assertEqual(cfg.baseline_config(lambda_b=0.0).lambda_b, 0.0)

    def test_soot_params_resolution(self):
        cfg = build_experiment_config(overrides={"soot_lambda_scale": 0.01})
        self.assertAlmostEqual(cfg.soot_params_for(200.0).lam, 2.0)
        self.assertAlmostEqual(cfg.soot_params_for(200.0, lambda_scale=0.1).lam, 20.0)
        fixed = build_experiment_config(overrides={"soot_lambda": 0.3})
        self.assertEqual(fixed.soot_params_for(200.0).lam, 0.3)
        self.assertEqual(fixed.soot_params_for(200.0, alpha=0.5).alpha, 0.5)


if __name__ == "__main__":
    unittest.main(verbosity=2)
