import math
import unittest

import numpy as np

from hqcp.loss import *
from hqcp.tensor import DenseTensor


class TestLoss(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(7)

    def tearDown(self):
        pass

    def test_values(self):
        self.assertEqual(phi(0.0, 0.05), 0.0)
        self.assertAlmostEqual(phi(1.0, 1.0), 0.5 * math.log(2.0), places=15)
        self.assertEqual(hq_weight(0.0, 0.05), 1.0)
        self.assertAlmostEqual(hq_weight(0.05, 0.05), 0.5, places=15)
        self.assertAlmostEqual(phi_prime(0.05, 0.05), 0.025, places=15)
        self.assertEqual(rho(1.0), 0.0)
        self.assertAlmostEqual(rho(math.e), math.e - 2.0, places=14)

    def test_domain(self):
        self.assertRaises(LossException, rho, 0.0)
        self.assertRaises(LossException, rho, np.array([1.0, -0.5]))
        self.assertRaises(LossException, check_delta, 0)
        self.assertRaises(LossException, check_delta, -1.0)
        self.assertRaises(LossException, check_delta, float('inf'))
        self.assertRaises(LossException, CauchyLoss, 0.0)
        self.assertRaises(LossException, loss_table, [0.0], [-1.0])

    def test_small_argument(self):
        # no cancellation for t much less than delta
        t = 1e-9
        self.assertAlmostEqual(phi(t, 0.05) / (0.5 * t * t), 1.0, places=12)

    def test_quadratic_limit(self):
        t = np.linspace(-1, 1, 11)
        self.assertLess(np.max(np.abs(phi(t, 1e4) - 0.5 * t * t)), 1e-8)

    def test_redescending(self):
        delta = 0.05
        t = np.linspace(delta, 100 * delta, 1000)
        d = phi_prime(t, delta)
        self.assertTrue(np.all(np.diff(d) <= 0))
        self.assertLess(phi_prime(1e6, delta), 1e-8)
        w = hq_weight(t, delta)
        self.assertTrue(np.all(np.diff(w) < 0))
        self.assertTrue(np.all(w > 0))
        self.assertTrue(np.all(w <= 1))

    def test_huge_argument(self):
        delta = 0.05
        v = phi(1e200, delta)
        self.assertTrue(math.isfinite(v))
        self.assertAlmostEqual(v, delta * delta * math.log(1e200 / delta),
                               places=12)
        self.assertAlmostEqual(v, 1.159, places=3)
        self.assertEqual(phi(-1e200, delta), v)
        # both branches agree around the switch
        edge = 1e150 * delta
        below = phi(edge * (1 - 1e-12), delta)
        above = phi(edge * (1 + 1e-12), delta)
        self.assertAlmostEqual(below, above, places=12)
        t = np.array([0.0, 0.05, 1e300, -1e305])
        p = phi(t, delta)
        self.assertTrue(np.all(np.isfinite(p)))
        self.assertEqual(p[0], 0.0)
        self.assertAlmostEqual(p[1], 0.5 * delta * delta * math.log(2.0),
                               places=15)
        self.assertTrue(p[3] > p[2] > p[1])

    def test_hq_identity(self):
        t = self.rng.uniform(-10, 10, 10000)
        delta = self.rng.uniform(0.01, 10, 10000)
        w = hq_weight(t, delta)
        e = np.abs(hq_value(t, w, delta) - phi(t, delta))
        self.assertTrue(np.all(e <= 1e-12 * np.maximum(1.0, delta ** 2)))

    def test_hq_minimum(self):
        grid = np.linspace(1e-4, 2.0, 10000)
        for _ in range(200):
            t = self.rng.uniform(-10, 10)
            delta = self.rng.uniform(0.01, 10)
            best = phi(t, delta)
            values = hq_value(t, grid, delta)
            self.assertGreaterEqual(np.min(values) + 1e-12 * max(1.0,
                                                                 delta ** 2),
                                    best)

    def test_lipschitz(self):
        t1 = self.rng.uniform(-10, 10, 100000)
        t2 = self.rng.uniform(-10, 10, 100000)
        delta = self.rng.uniform(0.01, 10, 100000)
        diff = np.abs(t1 - t2)
        lhs = np.abs(phi_prime(t1, delta) - phi_prime(t2, delta))
        self.assertTrue(np.all(lhs <= diff + 1e-12))
        d2 = delta * delta
        lhs = np.abs(d2 * t1 * (1.0 / (d2 + t1 * t1) - 1.0 / (d2 + t2 * t2)))
        self.assertTrue(np.all(lhs <= diff + 1e-12))

    def test_derivative(self):
        h = 1e-6
        t = self.rng.uniform(-5, 5, 1000)
        delta = self.rng.uniform(0.05, 5, 1000)
        numeric = (phi(t + h, delta) - phi(t - h, delta)) / (2 * h)
        self.assertLess(np.max(np.abs(numeric - phi_prime(t, delta))), 1e-6)

    def test_total_loss(self):
        r = DenseTensor((2, 2), [0.0, 0.05, -0.05, 0.0])
        self.assertAlmostEqual(total_loss(r, 0.05), 0.0025 * math.log(2.0),
                               places=15)
        self.assertEqual(total_loss(DenseTensor((3, 3)), 1.0), 0.0)

    def test_cauchy_loss(self):
        loss = CauchyLoss(0.5)
        self.assertEqual(loss.delta, 0.5)
        self.assertEqual(loss.phi(0.5), phi(0.5, 0.5))
        self.assertEqual(loss.phi_prime(0.5), phi_prime(0.5, 0.5))
        self.assertEqual(loss.weight(0.25), 0.8)
        self.assertEqual(loss.hq_value(1.0, 1.0), 0.5)
        r = DenseTensor((2, 2), [0.0, 0.5, -0.5, 1.0])
        self.assertAlmostEqual(loss.total(r), 2 * phi(0.5, 0.5)
                               + phi(1.0, 0.5), places=14)
        self.assertEqual(loss.penalty(DenseTensor.from_array(np.ones((2, 3)))),
                         0.0)
        self.assertRaises(LossException, loss.penalty,
                          DenseTensor.from_array(np.zeros((2, 2))))
        self.assertEqual(CauchyLoss().delta, 0.05)

    def test_table(self):
        rows = loss_table([0.0, 1.0], [0.05, 1.0])
        self.assertEqual(len(rows), 4)
        self.assertEqual(rows[0], (0.05, 0.0, 0.0, 0.0, 1.0))
        delta, t, p, d, w = rows[3]
        self.assertEqual((delta, t), (1.0, 1.0))
        self.assertAlmostEqual(p, 0.5 * math.log(2.0), places=15)
        self.assertEqual(d, 0.5)
        self.assertEqual(w, 0.5)


if __name__ == "__main__":
    unittest.main()
