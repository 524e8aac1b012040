#!/usr/bin/env python3
"""
Tests for the synthetic seismic data, error metrics and initialization
"""
import math
import sys
import os
import logging
import unittest

import numpy as np

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from models import ExperimentConfig
from services.errors import ConfigurationError, PreconditionError
from services.seismic_bench import (
    error_metrics,
    gen_observation,
    gen_reflectivity,
    init_strategy,
    kernel_constraint_from_truth,
    make_instance,
    observed_instance,
    optimal_scale_alignment,
    raw_error_norms,
    realization_seed,
    ricker_wavelet,
)
from services.signal_core import convolve

logging.basicConfig(level=logging.INFO, format='%(levelname)s - %(message)s')
logger = logging.getLogger(__name__)


class TestRickerWavelet(unittest.TestCase):
    """Mexican-hat source pulse"""

    def setUp(self):
        self.wavelet = ricker_wavelet(41, 24.0, 0.004)

    def test_center_and_symmetry(self):
        self.assertEqual(self.wavelet[20], 1.0)
        np.testing.assert_array_equal(self.wavelet, self.wavelet[::-1])

    def test_spectrum_band(self):
        spectrum = np.abs(np.fft.rfft(self.wavelet, 4096))
        freqs = np.fft.rfftfreq(4096, 0.004)
        band = freqs[spectrum >= 0.5 * spectrum.max()]
        self.assertGreaterEqual(band.min(), 8.0)
        self.assertLessEqual(band.max(), 45.0)
        logger.info(f"✅ Ricker -6 dB band {band.min():.1f}-{band.max():.1f} Hz")

    def test_rejects_bad_parameters(self):
        with self.assertRaises(ConfigurationError):
            ricker_wavelet(0, 24.0, 0.004)
        with self.assertRaises(ConfigurationError):
            ricker_wavelet(41, -1.0, 0.004)


class TestReflectivity(unittest.TestCase):
    """Bernoulli-uniform spike trains"""

    def test_spike_count_statistics(self):
        n, p, draws = 784, 0.05, 1000
        counts = np.array([np.count_nonzero(gen_reflectivity(n, p, (-1.0, 1.0), seed)) for seed in range(draws)])
        standard_error = math.sqrt(n * p * (1 - p) / draws)
        self.assertLessEqual(abs(counts.mean() - n * p), 3 * standard_error)

    def test_amplitudes_in_range_and_above_floor(self):
        x = gen_reflectivity(5000, 0.3, (-1.0, 0.5), 7)
        spikes = x[x != 0]
        self.assertTrue(np.all(spikes >= -1.0) and np.all(spikes <= 0.5))
        self.assertTrue(np.all(np.abs(spikes) >= 0.1))
        self.assertTrue(np.any(spikes > 0) and np.any(spikes < 0))

    def test_deterministic(self):
        np.testing.assert_array_equal(
            gen_reflectivity(300, 0.05, (-1.0, 1.0), 42),
            gen_reflectivity(300, 0.05, (-1.0, 1.0), 42),
        )

    def test_invalid_arguments(self):
        with self.assertRaises(ConfigurationError):
            gen_reflectivity(10, 1.5, (-1.0, 1.0), 0)
        with self.assertRaises(ConfigurationError):
            gen_reflectivity(10, 0.1, (1.0, -1.0), 0)


class TestObservation(unittest.TestCase):

    def setUp(self):
        self.x = gen_reflectivity(784, 0.05, (-1.0, 1.0), 3)
        self.h = ricker_wavelet(41, 24.0, 0.004)

    def test_noiseless_is_convolution(self):
        np.testing.assert_array_equal(gen_observation(self.x, self.h, 0.0, 1), convolve(self.h, self.x))

    def test_noise_variance(self):
        y = gen_observation(self.x, self.h, 0.03, [5, 1])
        noise = y - convolve(self.h, self.x)
        self.assertLess(abs(np.var(noise) / 0.03 ** 2 - 1.0), 0.2)
        np.testing.assert_array_equal(y, gen_observation(self.x, self.h, 0.03, [5, 1]))

    def test_negative_sigma(self):
        with self.assertRaises(ConfigurationError):
            gen_observation(self.x, self.h, -0.1, 0)


class TestErrorMetrics(unittest.TestCase):

    def test_examples(self):
        self.assertEqual(error_metrics([0.3, -0.2], [0.3, -0.2]), (0.0, 0.0))
        rms, mae = error_metrics([1.0, 0.0], [0.0, 0.0])
        self.assertAlmostEqual(rms, 1.0 / math.sqrt(2.0), places=15)
        self.assertAlmostEqual(mae, 0.5, places=15)
        l2, l1 = raw_error_norms([3.0, 0.0], [0.0, 4.0])
        self.assertAlmostEqual(l2, 5.0)
        self.assertAlmostEqual(l1, 7.0)

    def test_length_mismatch(self):
        with self.assertRaises(ConfigurationError):
            error_metrics([1.0, 2.0], [1.0])

    def test_scale_alignment(self):
        truth = np.array([1.0, -2.0, 0.5])
        aligned, scale = optimal_scale_alignment(truth, 0.5 * truth)
        self.assertAlmostEqual(scale, 2.0)
        np.testing.assert_allclose(aligned, truth)
        _, unit = optimal_scale_alignment(truth, np.zeros(3))
        self.assertEqual(unit, 1.0)


class TestInitialization(unittest.TestCase):
    """Constant signal and projected Gaussian kernel"""

    def setUp(self):
        self.cfg = ExperimentConfig()
        self.h_true = ricker_wavelet(self.cfg.s, self.cfg.ricker_peak_hz, self.cfg.sample_interval_s)

    def test_initial_point(self):
        x0, h0 = init_strategy(self.cfg, self.h_true)
        self.assertAlmostEqual(float(np.linalg.norm(x0)), 1.0, places=12)
        self.assertTrue(np.all(x0 == x0[0]))
        g2 = kernel_constraint_from_truth(self.h_true, self.cfg.radius_factor)
        self.assertTrue(g2.contains(h0, 1e-9))
        np.testing.assert_allclose(h0, h0[::-1], atol=1e-12)
        self.assertEqual(int(np.argmax(h0)), self.cfg.s // 2)

    def test_kernel_constraint_from_truth(self):
        g2 = kernel_constraint_from_truth(self.h_true, 1.05)
        self.assertEqual(g2.hi, 1.0)
        self.assertAlmostEqual(g2.lo, float(self.h_true.min()))
        self.assertAlmostEqual(g2.radius, 1.05 * float(np.linalg.norm(self.h_true)))
        with self.assertRaises(ConfigurationError):
            kernel_constraint_from_truth(np.zeros(5), 1.05)


class TestInstances(unittest.TestCase):
    """Seeded realizations shared across noise levels"""

    def setUp(self):
        self.cfg = ExperimentConfig(n=128, s=21, seed=12)

    def test_seed_derivation(self):
        self.assertEqual(realization_seed(12, 3), 12 ^ 3)
        first = make_instance(self.cfg, 0.01, 3, sigma_index=0)
        second = make_instance(self.cfg, 0.03, 3, sigma_index=2)
        self.assertEqual(first.seed, 15)
        self.assertEqual(second.noise_seed, (15, 3))
        np.testing.assert_array_equal(first.x_true, second.x_true)
        self.assertFalse(np.array_equal(first.y, second.y))

    def test_instance_is_reproducible_and_feasible(self):
        a = make_instance(self.cfg, 0.02, 1)
        b = make_instance(self.cfg, 0.02, 1)
        np.testing.assert_array_equal(a.y, b.y)
        self.assertTrue(a.g1.contains(a.x0))
        self.assertTrue(a.g2.contains(a.h0, 1e-9))
        self.assertEqual(a.observation_energy, float(np.dot(a.y, a.y)))
        rms, mae = a.observation_error()
        self.assertGreater(rms, 0.0)
        self.assertGreater(mae, 0.0)

    def test_observed_instance(self):
        y = make_instance(self.cfg, 0.01, 0).y
        h_ref = ricker_wavelet(self.cfg.s, self.cfg.ricker_peak_hz, self.cfg.sample_interval_s)
        inst = observed_instance(self.cfg, y, h_ref)
        self.assertTrue(math.isnan(inst.sigma))
        with self.assertRaises(PreconditionError):
            inst.observation_error()
        with self.assertRaises(ConfigurationError):
            observed_instance(self.cfg, y, h_ref, x_true=np.zeros(5))
        logger.info("✅ Instance construction tests passed")


if __name__ == "__main__":
    unittest.main(verbosity=2)
