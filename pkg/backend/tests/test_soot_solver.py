#!/usr/bin/env python3
"""
Tests for the block-alternating SOOT solver and the objective F
"""
import math
import sys
import os
import logging
import unittest

import numpy as np

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from models import BoxConstraint, KernelConstraint, SolverConfig, SootParams
from services.errors import PreconditionError
from services.prox_geometry import project_box_ball
from services.signal_core import convolution_matrix, convolve
from services.soot_penalty import phi
from services.solve_trace import Termination
from services.soot_solver import objective_F, soot_solve

logging.basicConfig(level=logging.INFO, format='%(levelname)s - %(message)s')
logger = logging.getLogger(__name__)


def small_instance(n=16, s=3, seed=0, noise=0.01):
    rng = np.random.default_rng(seed)
    x_true = np.where(rng.random(n) < 0.25, rng.uniform(-1.0, 1.0, n), 0.0)
    h_true = np.array([0.3, 1.0, -0.4, 0.2, 0.1][:s])
    y = convolve(h_true, x_true) + noise * rng.standard_normal(n)
    g1 = BoxConstraint(lo=-1.5, hi=1.5)
    g2 = KernelConstraint(lo=-0.6, hi=1.1, radius=1.05 * float(np.linalg.norm(h_true)))
    x0 = np.full(n, 0.1)
    h0 = project_box_ball(np.array([0.0, 0.5, 0.0, 0.0, 0.0][:s]) + 0.1, g2)
    return x_true, h_true, y, g1, g2, x0, h0


def dense_signal_operator(h, n):
    """Matrix of x -> same-size convolution with h, entry by entry"""
    s, c = len(h), len(h) // 2
    H = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if 0 <= i + c - j < s:
                H[i, j] = h[i + c - j]
    return H


def dense_kernel_operator(x, s):
    """Matrix of h -> same-size convolution of a length-s kernel with x"""
    n, c = len(x), s // 2
    X = np.zeros((n, s))
    for i in range(n):
        for k in range(s):
            if 0 <= i + c - k < n:
                X[i, k] = x[i + c - k]
    return X


def dense_norm_sq_bound(M, tol=1e-6, max_iter=500):
    """1.01 times the power-iteration estimate of the largest eigenvalue of M^T M"""
    if not np.any(M):
        return 0.0
    v = np.random.default_rng(0).standard_normal(M.shape[1])
    v /= np.linalg.norm(v)
    value = 0.0
    for _ in range(max_iter):
        w = M.T @ (M @ v)
        new_value = float(v @ w)
        v = w / np.linalg.norm(w)
        converged = value > 0.0 and abs(new_value - value) <= tol * value
        value = new_value
        if converged:
            break
    return 1.01 * max(value, float(np.sum((M @ v) ** 2)))


def dense_grad_phi(x, p):
    roots = np.sqrt(x * x + p.alpha ** 2)
    l1 = float(np.sum(roots - p.alpha))
    return p.lam * x / ((l1 + p.beta) * roots) - p.lam * x / (float(x @ x) + p.eta ** 2)


class TestObjective(unittest.TestCase):
    """F = rho + phi on the feasible set, +inf elsewhere"""

    def setUp(self):
        self.p = SootParams(lam=0.5, alpha=0.1, beta=0.2, eta=0.3)
        self.x_true, self.h_true, self.y, self.g1, self.g2, _, _ = small_instance()

    def test_zero_residual_gives_phi(self):
        y = convolve(self.h_true, self.x_true)
        value = objective_F(self.x_true, self.h_true, y, self.p, self.g1, self.g2)
        self.assertAlmostEqual(value, phi(self.x_true, self.p), places=12)

    def test_infeasible_is_infinite(self):
        x = self.x_true.copy()
        x[0] = 10.0
        self.assertEqual(objective_F(x, self.h_true, self.y, self.p, self.g1, self.g2), math.inf)
        self.assertEqual(objective_F(self.x_true, 5 * self.h_true, self.y, self.p, self.g1, self.g2), math.inf)

    def test_compositional_evaluation(self):
        residual = convolve(self.h_true, self.x_true) - self.y
        expected = 0.5 * float(np.dot(residual, residual)) + phi(self.x_true, self.p)
        value = objective_F(self.x_true, self.h_true, self.y, self.p, self.g1, self.g2)
        self.assertLessEqual(abs(value - expected), 1e-12 * max(1.0, abs(expected)))


class TestSootSolve(unittest.TestCase):
    """End-to-end behaviour of soot_solve on tiny instances"""

    def setUp(self):
        self.p = SootParams(lam=0.05, alpha=0.01, beta=0.05, eta=0.1)

    def test_monotone_descent(self):
        _, _, y, g1, g2, x0, h0 = small_instance(n=8, s=3, seed=1)
        cfg = SolverConfig(inner_x=1, inner_h=1, max_outer=200, stop_tol=0.0)
        result = soot_solve(y, x0, h0, self.p, g1, g2, cfg)
        self.assertNotEqual(result.termination, Termination.DESCENT_VIOLATION)
        self.assertTrue(result.trace.is_nonincreasing(1e-9))
        logger.info(f"✅ Descent test passed (max increase {result.trace.max_increase():.3e})")

    def test_iterates_feasible_and_metric_bounds(self):
        _, _, y, g1, g2, x0, h0 = small_instance(seed=2)
        seen = []

        def check(k, x, h):
            self.assertTrue(g1.contains(x))
            self.assertTrue(g2.contains(h, 1e-8))
            seen.append(k)

        result = soot_solve(y, x0, h0, self.p, g1, g2, SolverConfig(inner_x=5, max_outer=30), callback=check)
        self.assertEqual(seen, list(range(1, result.iterations + 1)))
        for row in result.trace.rows[1:]:
            self.assertGreater(row.nu_low, 0.0)
            self.assertLessEqual(row.nu_low, row.nu_high)

    def test_truth_initialisation_converges(self):
        x_true, h_true, _, g1, g2, _, _ = small_instance(seed=3)
        y = convolve(h_true, x_true)
        tiny = SootParams(lam=1e-30, alpha=0.01, beta=0.05, eta=0.1)
        result = soot_solve(y, x_true, h_true, tiny, g1, g2, SolverConfig(max_outer=10))
        self.assertEqual(result.termination, Termination.CONVERGED)
        self.assertLessEqual(result.iterations, 10)
        f = result.trace.f_values
        self.assertLessEqual(float(np.max(np.abs(f - f[0]))), 1e-9)

    def test_infeasible_initialisation(self):
        _, _, y, g1, g2, x0, h0 = small_instance()
        bad_x = x0.copy()
        bad_x[3] = 5.0
        with self.assertRaises(PreconditionError):
            soot_solve(y, bad_x, h0, self.p, g1, g2)
        with self.assertRaises(PreconditionError):
            soot_solve(y, x0, h0 * 10.0, self.p, g1, g2)

    def test_deterministic(self):
        _, _, y, g1, g2, x0, h0 = small_instance(seed=4)
        cfg = SolverConfig(inner_x=3, max_outer=25)
        first = soot_solve(y, x0, h0, self.p, g1, g2, cfg)
        second = soot_solve(y, x0, h0, self.p, g1, g2, cfg)
        np.testing.assert_array_equal(first.trace.f_values, second.trace.f_values)
        np.testing.assert_array_equal(first.x_hat, second.x_hat)
        np.testing.assert_array_equal(first.h_hat, second.h_hat)

    def test_palm_reduction(self):
        """J = I = 1 with the scalar A1 bound is a plain proximal-gradient alternation"""
        _, h_true, y, g1, _, x0, _ = small_instance(seed=5)
        g2 = KernelConstraint(lo=-0.6, hi=1.1, radius=10.0)
        h0 = np.array([0.1, 0.6, 0.1])
        p = self.p
        n, s = y.size, h0.size
        cfg = SolverConfig(inner_x=1, inner_h=1, max_outer=10, stop_tol=0.0,
                           scalar_metric=True, warm_start_norms=False, check_descent=False)
        iterates = []
        soot_solve(y, x0, h0, p, g1, g2, cfg, callback=lambda k, x, h: iterates.append((x.copy(), h.copy())))
        self.assertEqual(len(iterates), 10)
        np.testing.assert_array_equal(dense_signal_operator(h_true, n), convolution_matrix(h_true, n))

        x, h = x0.copy(), h0.copy()
        for x_solver, h_solver in iterates:
            H = dense_signal_operator(h, n)
            value = dense_norm_sq_bound(H) + 9.0 * p.lam / (8.0 * p.eta ** 2) + p.lam / (p.beta * p.alpha)
            x = np.clip(x - cfg.step_x * (H.T @ (H @ x - y) + dense_grad_phi(x, p)) / value, g1.lo, g1.hi)

            X = dense_kernel_operator(x, s)
            l2 = max(dense_norm_sq_bound(X), 1e-10)
            h = np.clip(h - cfg.step_h * (X.T @ (X @ h - y)) / l2, g2.lo, g2.hi)
            self.assertLessEqual(float(np.linalg.norm(h)), g2.radius)

            np.testing.assert_allclose(x_solver, x, rtol=0, atol=1e-10)
            np.testing.assert_allclose(h_solver, h, rtol=0, atol=1e-10)
        logger.info("✅ PALM reduction test passed")

    def test_solver_config_rejects_bad_steps(self):
        with self.assertRaises(ValueError):
            SolverConfig(step_x=1.995)
        with self.assertRaises(ValueError):
            SolverConfig(step_h=0.001)


if __name__ == "__main__":
    unittest.main(verbosity=2)
