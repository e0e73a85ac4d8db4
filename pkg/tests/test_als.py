import unittest

import numpy as np

from hqcp.als import *
from hqcp.synth import gen_ground_truth, add_noise, CauchyNoise
from hqcp.tensor import DenseTensor


class TestALS(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(2)

    def tearDown(self):
        pass

    def test_exact(self):
        model, A = gen_ground_truth((8, 9, 10), 2, 3, self.rng)
        res = als_solve(A, 3, 2, initial=model)
        self.assertTrue(res.converged)
        self.assertEqual(res.iterations, 1)
        self.assertLess(res.final_fit, 1e-10)

    def test_monotone(self):
        for t in (1, 2, 3):
            _, A0 = gen_ground_truth((10, 11, 12), t, 4, self.rng)
            A = add_noise(A0, CauchyNoise(), self.rng)
            res = als_solve(A, 4, t, max_iter=100, tol=1e-300, seed=t)
            fits = [r.fit for r in res.trace]
            for a, b in zip(fits, fits[1:]):
                self.assertLessEqual(b, a + 1e-9)
            self.assertLess(res.model.constraint_error(), 1e-10)
            self.assertLessEqual(res.iterations, 100)

    def test_order4(self):
        _, A0 = gen_ground_truth((5, 6, 7, 8), 2, 3, self.rng)
        res = als_solve(A0, 3, 2, seed=4)
        self.assertLess(res.model.constraint_error(), 1e-10)
        self.assertLessEqual(res.final_fit, res.trace[0].fit + 1e-9)

    def test_zero_direction(self):
        # a zero tensor gives zero directions in every unit-columns mode
        A = DenseTensor((4, 5, 6))
        m = random_model((4, 5, 6), 2, 1, self.rng)
        before = m.factors[0].copy()
        als_sweep(A, m)
        self.assertTrue(np.array_equal(m.factors[0], before))
        self.assertTrue(np.all(m.sigma == 0))

    def test_errors(self):
        _, A = gen_ground_truth((4, 5, 6), 1, 2, self.rng)
        self.assertRaises(TensorException, als_solve, A, 6, 2)
        self.assertRaises(SolverException, als_solve, A, 2, 1, 0)
        self.assertRaises(SolverException, als_solve, A, 2, 1, 10, 0.0)

    def test_overflow(self):
        data = 1e305 * np.random.default_rng(0).standard_normal((6, 6, 6))
        A = DenseTensor.from_array(data)
        with self.assertRaises(SolverException) as cm:
            als_solve(A, 2, 1, max_iter=5)
        self.assertEqual(cm.exception.iteration, 1)

    def test_determinism(self):
        _, A0 = gen_ground_truth((6, 7, 8), 1, 3, self.rng)
        A = add_noise(A0, CauchyNoise(), self.rng)
        r1 = als_solve(A, 3, 1, max_iter=20, seed=9)
        r2 = als_solve(A, 3, 1, max_iter=20, seed=9)
        self.assertTrue(np.array_equal(r1.model.sigma, r2.model.sigma))


if __name__ == "__main__":
    unittest.main()
