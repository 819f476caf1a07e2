
import unittest

import numpy as np

from mojo.receptorchannel.channelmodel import (
    ChannelKind,
    FeedbackPolicy,
    ReceptorKinetics,
    build_cooperative_channel,
    build_custom_channel,
    build_independent_channel,
    discretize,
    output_chain
)
from mojo.receptorchannel.exceptions import ChannelValidationError, StepSizeError

REFERENCE_KINETICS = ReceptorKinetics(alpha_L=1.0, alpha_H=10.0, beta=20.0)

class TestChannelConstruction(unittest.TestCase):

    def test_independent_rates(self):

        ch = build_independent_channel(2, REFERENCE_KINETICS)

        self.assertEqual(ch.up_H.tolist(), [20.0, 10.0])
        self.assertEqual(ch.up_L.tolist(), [2.0, 1.0])
        self.assertEqual(ch.down.tolist(), [20.0, 40.0])
        self.assertTrue(ch.kind == ChannelKind.INDEPENDENT, "The channel should be of kind independent.")

        single = build_independent_channel(1, REFERENCE_KINETICS)
        self.assertEqual(single.up_H.tolist(), [10.0])
        self.assertEqual(single.up_L.tolist(), [1.0])
        self.assertEqual(single.down.tolist(), [20.0])

        three = build_independent_channel(3, ReceptorKinetics(2.0, 4.0, 5.0))
        self.assertEqual(three.up_H.tolist(), [12.0, 8.0, 4.0])
        self.assertEqual(three.down.tolist(), [5.0, 10.0, 15.0])

        return

    def test_cooperative_rates(self):

        ch = build_cooperative_channel(2, REFERENCE_KINETICS)

        self.assertEqual(ch.up_H.tolist(), [10.0, 10.0])
        self.assertEqual(ch.up_L.tolist(), [1.0, 1.0])
        self.assertEqual(ch.down.tolist(), [20.0, 20.0])

        four = build_cooperative_channel(4, ReceptorKinetics(1.0, 2.0, 3.0))
        self.assertEqual(four.up_H.tolist(), [2.0] * 4)
        self.assertEqual(four.down.tolist(), [3.0] * 4)

        return

    def test_single_receptor_kinds_coincide(self):

        independent = build_independent_channel(1, REFERENCE_KINETICS)
        cooperative = build_cooperative_channel(1, REFERENCE_KINETICS)

        for name in ("up_H", "up_L", "down"):
            self.assertTrue(np.array_equal(getattr(independent, name), getattr(cooperative, name)),
                            f"The '{name}' rates of one receptor should not depend on the kind.")

        return

    def test_invalid_kinetics(self):

        with self.assertRaises(ChannelValidationError):
            ReceptorKinetics(alpha_L=-1.0, alpha_H=10.0, beta=20.0)

        with self.assertRaises(ChannelValidationError):
            ReceptorKinetics(alpha_L=10.0, alpha_H=1.0, beta=20.0)

        with self.assertRaises(ChannelValidationError):
            ReceptorKinetics(alpha_L=1.0, alpha_H=10.0, beta=0.0)

        with self.assertRaises(ChannelValidationError):
            build_independent_channel(0, REFERENCE_KINETICS)

        return

    def test_custom_channel(self):

        ch = build_custom_channel([3.0, 2.0, 1.0], [1.0, 0.5, 0.0], [4.0, 5.0, 6.0])

        self.assertEqual(ch.n, 3)
        self.assertTrue(ch.kind == ChannelKind.CUSTOM, "The channel should be of kind custom.")
        self.assertIsNone(ch.kinetics)

        with self.assertRaises(ChannelValidationError):
            build_custom_channel([1.0, 2.0], [1.0], [1.0, 1.0])

        with self.assertRaises(ChannelValidationError):
            build_custom_channel([1.0], [1.0], [0.0])

        with self.assertRaises(ChannelValidationError):
            build_custom_channel([1.0], [-1.0], [1.0])

        return

    def test_unreachable_state(self):

        with self.assertRaises(ChannelValidationError) as ctx:
            build_custom_channel([2.0, 0.0], [1.0, 0.0], [1.0, 1.0])
        self.assertTrue("State 2" in str(ctx.exception), f"The error should name the unreachable state: {ctx.exception}")

        # one input alone keeps the state reachable
        ch = build_custom_channel([2.0, 1.0], [1.0, 0.0], [1.0, 1.0])
        self.assertEqual(ch.n, 2)

        return

    def test_rates_are_read_only(self):

        ch = build_independent_channel(2, REFERENCE_KINETICS)

        with self.assertRaises(ValueError):
            ch.up_H[0] = 1.0

        return

    def test_document_round_trip_fields(self):

        doc = build_independent_channel(2, REFERENCE_KINETICS).to_document()
        self.assertEqual(doc, {"kind": "independent", "n": 2, "alpha_L": 1.0, "alpha_H": 10.0, "beta": 20.0})

        doc = build_custom_channel([2.0], [1.0], [3.0]).to_document()
        self.assertEqual(doc, {"kind": "custom", "n": 1, "up_H": [2.0], "up_L": [1.0], "down": [3.0]})

        return


class TestFeedbackPolicy(unittest.TestCase):

    def test_from_values_broadcasts(self):

        pol = FeedbackPolicy.from_values(3, [0.25])
        self.assertEqual(pol.p.tolist(), [0.25, 0.25, 0.25])
        self.assertTrue(pol.is_iid(), "A broadcast policy should be IID.")

        pol = FeedbackPolicy.from_values(2, [0.2, 0.8])
        self.assertTrue(not pol.is_iid(), "The policy should not be IID.")

        with self.assertRaises(ChannelValidationError):
            FeedbackPolicy.from_values(3, [0.1, 0.2])

        return

    def test_probability_range(self):

        with self.assertRaises(ChannelValidationError):
            FeedbackPolicy([0.5, 1.5])

        with self.assertRaises(ChannelValidationError):
            FeedbackPolicy([])

        return

    def test_fully_bound_state_reuses_last_probability(self):

        pol = FeedbackPolicy([0.2, 0.8])
        self.assertEqual(pol.input_probabilities().tolist(), [0.2, 0.8, 0.8])

        return


class TestDiscretize(unittest.TestCase):

    def test_reference_row_zero(self):

        ch = build_independent_channel(2, REFERENCE_KINETICS)
        matrices = discretize(ch, 1e-3)

        np.testing.assert_allclose(matrices.P_H[0], [0.98, 0.02, 0.0], rtol=0, atol=1e-15)
        np.testing.assert_allclose(matrices.P_L[0], [0.998, 0.002, 0.0], rtol=0, atol=1e-15)
        self.assertTrue(matrices.for_input(True) is matrices.P_H, "The high input should select P_H.")

        return

    def test_row_stochastic(self):

        rng = np.random.default_rng(7)

        for _ in range(50):
            n = int(rng.integers(1, 8))
            ch = build_custom_channel(rng.uniform(0.0, 30.0, n), rng.uniform(0.0, 5.0, n), rng.uniform(0.1, 30.0, n))
            _, rate = ch.max_exit_rate()
            matrices = discretize(ch, 0.9 / rate)

            for matrix in (matrices.P_H, matrices.P_L):
                np.testing.assert_allclose(matrix.sum(axis=1), 1.0, rtol=0, atol=1e-12)
                self.assertTrue(np.all(matrix >= 0), "Transition probabilities must be nonnegative.")
                self.assertTrue(np.count_nonzero(np.triu(matrix, 2)) == 0, "The matrix must be tridiagonal.")
                self.assertTrue(np.count_nonzero(np.tril(matrix, -2)) == 0, "The matrix must be tridiagonal.")

        return

    def test_step_size_bound(self):

        ch = build_independent_channel(2, REFERENCE_KINETICS)

        with self.assertRaises(StepSizeError) as ctx:
            discretize(ch, 0.05)

        self.assertEqual(ctx.exception.row, 2)

        with self.assertRaises(ChannelValidationError):
            discretize(ch, 0.0)

        return


class TestOutputChain(unittest.TestCase):

    def test_degenerate_policies(self):

        ch = build_independent_channel(3, REFERENCE_KINETICS)
        matrices = discretize(ch, 1e-3)

        np.testing.assert_array_equal(output_chain(ch, FeedbackPolicy.iid(3, 1.0), 1e-3), matrices.P_H)
        np.testing.assert_array_equal(output_chain(ch, FeedbackPolicy.iid(3, 0.0), 1e-3), matrices.P_L)

        return

    def test_reference_up_probabilities(self):

        ch = build_independent_channel(2, REFERENCE_KINETICS)
        P_Y = output_chain(ch, FeedbackPolicy([0.5, 0.5]), 1e-3)

        np.testing.assert_allclose([P_Y[0, 1], P_Y[1, 2]], [0.011, 0.0055], rtol=1e-12)

        return

    def test_policy_length_mismatch(self):

        ch = build_independent_channel(2, REFERENCE_KINETICS)

        with self.assertRaises(ChannelValidationError):
            output_chain(ch, FeedbackPolicy([0.5, 0.5, 0.5]), 1e-3)

        return


if __name__ == '__main__':
    unittest.main()
