
import math
import unittest

import numpy as np

from mojo.receptorchannel.entropyrates import (
    MiRate,
    RateBasis,
    partial_entropy,
    triple_entropy
)
from mojo.receptorchannel.exceptions import ChannelValidationError, ConsistencyError, EntropyDomainError

class TestPartialEntropy(unittest.TestCase):

    def test_examples(self):

        self.assertEqual(partial_entropy(0.0), 0.0)
        self.assertEqual(partial_entropy(1.0), 0.0)
        self.assertTrue(math.isclose(partial_entropy(10.0), -10.0 * math.log(10.0), rel_tol=1e-15),
                        "phi(10) should be -10 ln 10.")

        return

    def test_negative_argument(self):

        with self.assertRaises(EntropyDomainError):
            partial_entropy(-1e-3)

        with self.assertRaises(EntropyDomainError):
            partial_entropy(np.array([0.5, float("nan")]))

        return

    def test_product_rule(self):

        rng = np.random.default_rng(5)
        k = rng.uniform(0.0, 50.0, 10_000)
        p = rng.uniform(0.0, 1.0, 10_000)

        lhs = partial_entropy(k * p)
        rhs = k * partial_entropy(p) + p * partial_entropy(k)

        scale = np.maximum(np.abs(lhs), np.abs(k * partial_entropy(p)) + np.abs(p * partial_entropy(k)))
        self.assertTrue(np.all(np.abs(lhs - rhs) <= 1e-12 * scale + 1e-300),
                        "phi(kp) = k phi(p) + p phi(k) should hold to 1e-12 relative.")

        return


class TestTripleEntropy(unittest.TestCase):

    def test_examples(self):

        self.assertTrue(math.isclose(triple_entropy(1.0 / 3.0, 1.0 / 3.0), math.log(3.0), rel_tol=1e-14),
                        "The uniform three outcome entropy should be ln 3.")

        expected = -0.02 * math.log(0.02) - 0.98 * math.log(0.98)
        self.assertTrue(math.isclose(triple_entropy(0.02, 0.0), expected, rel_tol=1e-14),
                        "H3(0.02, 0) should equal phi(0.02) + phi(0.98).")
        self.assertTrue(abs(triple_entropy(0.02, 0.0) - 0.0980) < 1e-4, "H3(0.02, 0) should be 0.0980...")

        self.assertEqual(triple_entropy(0.0, 0.0), 0.0)
        self.assertEqual(triple_entropy(1.0, 0.0), 0.0)

        return

    def test_reduces_to_binary_entropy(self):

        rng = np.random.default_rng(6)
        p = rng.uniform(1e-9, 1.0 - 1e-9, 10_000)

        binary = -p * np.log(p) - (1.0 - p) * np.log1p(-p)
        np.testing.assert_allclose(triple_entropy(p, np.zeros_like(p)), binary, rtol=1e-12)

        return

    def test_symmetric(self):

        self.assertTrue(math.isclose(triple_entropy(0.1, 0.3), triple_entropy(0.3, 0.1), rel_tol=1e-15),
                        "H3 should be symmetric in its arguments.")

        return

    def test_domain(self):

        with self.assertRaises(EntropyDomainError):
            triple_entropy(0.6, 0.5)

        with self.assertRaises(EntropyDomainError):
            triple_entropy(-0.1, 0.5)

        self.assertTrue(triple_entropy(0.5, 0.5 + 1e-13) >= 0.0, "Round-off above one is tolerated.")

        return


class TestMiRate(unittest.TestCase):

    def test_basis_and_tau(self):

        with self.assertRaises(ChannelValidationError):
            MiRate(1.0, RateBasis.PER_STEP)

        with self.assertRaises(ChannelValidationError):
            MiRate(1.0, RateBasis.PER_SECOND, tau=1e-3)

        rate = MiRate(2e-3, RateBasis.PER_STEP, tau=1e-3)
        self.assertTrue(math.isclose(rate.per_second(), 2.0, rel_tol=1e-15), "2e-3 nats per 1e-3 s is 2 nats/s.")

        rate = MiRate(math.log(2.0), "per_second")
        self.assertTrue(rate.basis == RateBasis.PER_SECOND, "The basis should be coerced to the enum.")
        self.assertTrue(math.isclose(rate.to_bits(), 1.0, rel_tol=1e-15), "ln 2 nats is one bit.")

        return

    def test_round_off_clamp(self):

        rate = MiRate(-5e-13, RateBasis.PER_SECOND)
        self.assertEqual(rate.value, 0.0)

        with self.assertRaises(ConsistencyError):
            MiRate(-1e-9, RateBasis.PER_SECOND)

        with self.assertRaises(ConsistencyError):
            MiRate(float("nan"), RateBasis.PER_SECOND)

        return


if __name__ == '__main__':
    unittest.main()
