
import math
import unittest

from types import SimpleNamespace
from unittest import mock

import numpy as np

from mojo.receptorchannel.capacity import (
    OptimizerConfig,
    capacity_feedback,
    capacity_iid,
    iid_diagonal_gap,
    verify_proposition_2
)
from mojo.receptorchannel.channelmodel import (
    FeedbackPolicy,
    ReceptorKinetics,
    build_cooperative_channel,
    build_custom_channel,
    build_independent_channel,
    stationary
)
from mojo.receptorchannel.entropyrates import mi_rate_continuous
from mojo.receptorchannel.exceptions import ChannelValidationError, ConsistencyError, OptimizerConfigurationError

REFERENCE_KINETICS = ReceptorKinetics(alpha_L=1.0, alpha_H=10.0, beta=20.0)

INDEPENDENT_PAIR_CAPACITY = 3.57367
INDEPENDENT_PAIR_ARGMAX = 0.371696
COOPERATIVE_PAIR_CAPACITY = 2.1026
COOPERATIVE_PAIR_ARGMAX = (0.407, 0.364)

class TestIidCapacity(unittest.TestCase):

    def test_independent_pair(self):

        result = capacity_iid(build_independent_channel(2, REFERENCE_KINETICS))

        self.assertTrue(abs(result.capacity - INDEPENDENT_PAIR_CAPACITY) <= 1e-3,
                        f"The IID capacity should be {INDEPENDENT_PAIR_CAPACITY}, got {result.capacity!r}.")
        self.assertTrue(abs(result.p - INDEPENDENT_PAIR_ARGMAX) <= 1e-3, f"The argmax should be {INDEPENDENT_PAIR_ARGMAX}, got {result.p!r}.")
        self.assertTrue(result.converged, "The golden section search should converge.")
        self.assertTrue(result.final_step <= 1e-9, "The final bracket should meet the tolerance.")
        self.assertEqual(result.policy.p.tolist(), [result.p, result.p])

        return

    def test_single_receptor(self):

        result = capacity_iid(build_independent_channel(1, REFERENCE_KINETICS))

        self.assertTrue(abs(result.capacity - INDEPENDENT_PAIR_CAPACITY / 2.0) <= 1e-3,
                        f"One receptor should carry half the capacity of the pair, got {result.capacity!r}.")

        return

    def test_capacity_equals_rate_at_argmax(self):

        for ch in (build_independent_channel(3, REFERENCE_KINETICS), build_cooperative_channel(3, REFERENCE_KINETICS)):
            result = capacity_iid(ch)
            rate = mi_rate_continuous(ch, result.policy).value
            self.assertTrue(math.isclose(result.capacity, rate, rel_tol=1e-12),
                            f"The capacity {result.capacity!r} should equal the rate at its argmax {rate!r}.")

        return

    def test_flat_channel(self):

        flat = ReceptorKinetics(5.0, 5.0, 20.0)

        for builder in (build_independent_channel, build_cooperative_channel):
            result = capacity_iid(builder(2, flat))
            self.assertEqual(result.capacity, 0.0)
            self.assertEqual(result.p, 0.5)

        return

    def test_custom_channel(self):

        ch = build_custom_channel([20.0, 10.0], [2.0, 1.0], [20.0, 40.0])
        custom = capacity_iid(ch)
        independent = capacity_iid(build_independent_channel(2, REFERENCE_KINETICS))

        self.assertTrue(math.isclose(custom.capacity, independent.capacity, rel_tol=1e-9),
                        "A custom channel with independent rates should have the same IID capacity.")

        return

    def test_unreachable_state(self):

        with self.assertRaises(ChannelValidationError):
            capacity_iid(build_custom_channel([2.0, 0.0], [1.0, 0.0], [1.0, 1.0]))

        return

    def test_non_finite_rate(self):

        ch = build_cooperative_channel(2, REFERENCE_KINETICS)
        rate = SimpleNamespace(value=-math.inf)

        with mock.patch("mojo.receptorchannel.capacity.mi_rate_continuous", return_value=rate):
            with self.assertRaises(ConsistencyError):
                capacity_iid(ch)

        return


class TestFeedbackCapacity(unittest.TestCase):

    def test_non_finite_rate(self):

        ch = build_cooperative_channel(2, REFERENCE_KINETICS)
        rate = SimpleNamespace(value=-math.inf)

        with mock.patch("mojo.receptorchannel.capacity.mi_rate_continuous", return_value=rate):
            with self.assertRaises(ConsistencyError):
                capacity_feedback(ch)

        return

    def test_independent_pair_on_diagonal(self):

        ch = build_independent_channel(2, REFERENCE_KINETICS)
        result = capacity_feedback(ch)
        p0, p1 = result.policy.p.tolist()

        self.assertTrue(abs(result.capacity - INDEPENDENT_PAIR_CAPACITY) <= 1e-3,
                        f"The feedback capacity should be {INDEPENDENT_PAIR_CAPACITY}, got {result.capacity!r}.")
        self.assertTrue(abs(p0 - p1) <= 1e-4, f"The optimum should lie on the diagonal, got ({p0}, {p1}).")
        self.assertTrue(abs(p0 - INDEPENDENT_PAIR_ARGMAX) <= 1e-3, f"The optimum should be near {INDEPENDENT_PAIR_ARGMAX}, got {p0}.")

        iid = capacity_iid(ch)
        self.assertTrue(abs(result.capacity - iid.capacity) <= 1e-6,
                        "Feedback and IID capacities of independent receptors should agree.")

        return

    def test_independent_three_receptors(self):

        ch = build_independent_channel(3, REFERENCE_KINETICS)
        result = capacity_feedback(ch)
        iid = capacity_iid(ch)

        self.assertTrue(abs(result.capacity - iid.capacity) <= 1e-6,
                        "Feedback and IID capacities of independent receptors should agree.")

        pi = stationary(ch, result.policy).pi
        for k, p_k in enumerate(result.policy.p.tolist()):
            if pi[k] > 1e-9:
                self.assertTrue(abs(p_k - iid.p) <= 1e-3, f"p_{k}={p_k} should match the IID optimum {iid.p}.")

        return

    def test_cooperative_pair_off_diagonal(self):

        ch = build_cooperative_channel(2, REFERENCE_KINETICS)
        result = capacity_feedback(ch)
        p0, p1 = result.policy.p.tolist()

        self.assertTrue(abs(result.capacity - COOPERATIVE_PAIR_CAPACITY) <= 1e-3,
                        f"The feedback capacity should be {COOPERATIVE_PAIR_CAPACITY}, got {result.capacity!r}.")
        self.assertTrue(abs(p0 - COOPERATIVE_PAIR_ARGMAX[0]) <= 5e-3 and abs(p1 - COOPERATIVE_PAIR_ARGMAX[1]) <= 5e-3,
                        f"The optimum should be near {COOPERATIVE_PAIR_ARGMAX}, got ({p0}, {p1}).")

        gap = iid_diagonal_gap(ch, result)
        self.assertTrue(gap > 0.0, f"Feedback should beat the best IID policy, got a gap of {gap!r}.")

        return

    def test_feedback_never_below_iid(self):

        rng = np.random.default_rng(12)

        for _ in range(5):
            up_L = rng.uniform(0.5, 5.0, 2)
            ch = build_custom_channel(up_L + rng.uniform(1.0, 20.0, 2), up_L, rng.uniform(1.0, 30.0, 2))
            self.assertTrue(capacity_feedback(ch).capacity >= capacity_iid(ch).capacity,
                            "The feedback search starts from the IID optimum and cannot end below it.")

        return

    def test_flat_channel(self):

        ch = build_cooperative_channel(3, ReceptorKinetics(5.0, 5.0, 20.0))
        result = capacity_feedback(ch)

        self.assertEqual(result.capacity, 0.0)

        return

    def test_dimension_limit(self):

        ch = build_independent_channel(5, REFERENCE_KINETICS)

        with self.assertRaises(OptimizerConfigurationError):
            capacity_feedback(ch, OptimizerConfig(max_dimension=4))

        return

    def test_deterministic(self):

        ch = build_cooperative_channel(2, REFERENCE_KINETICS)

        first = capacity_feedback(ch)
        second = capacity_feedback(ch)

        self.assertEqual(first.capacity, second.capacity)
        self.assertEqual(first.policy.p.tolist(), second.policy.p.tolist())
        self.assertEqual(first.iterations, second.iterations)

        return

    def test_latin_hypercube_stage(self):

        ch = build_cooperative_channel(2, REFERENCE_KINETICS)
        config = OptimizerConfig(grid_max_dimension=1, lhs_samples=256)
        result = capacity_feedback(ch, config)

        self.assertTrue(abs(result.capacity - COOPERATIVE_PAIR_CAPACITY) <= 1e-3,
                        f"The sampled coarse stage should reach the same optimum, got {result.capacity!r}.")

        return


class TestScaling(unittest.TestCase):

    def test_reference_table(self):

        report = verify_proposition_2(REFERENCE_KINETICS, 10)

        self.assertEqual([row.n for row in report.rows], list(range(1, 11)))
        for row in report.rows:
            self.assertTrue(abs(row.ratio_to_n_times_c1 - 1.0) <= 1e-10, f"Ratio off at n={row.n}.")
            self.assertTrue(abs(row.argmax - report.rows[0].argmax) <= 1e-9, f"Argmax moved at n={row.n}.")

        self.assertTrue(abs(report.rows[1].capacity - INDEPENDENT_PAIR_CAPACITY) <= 1e-3, "C(2) should be the capacity of the independent pair.")

        return

    def test_random_kinetics(self):

        rng = np.random.default_rng(20150101)

        for _ in range(100):
            alpha_L = float(rng.uniform(0.0, 5.0))
            kin = ReceptorKinetics(alpha_L, alpha_L + float(rng.uniform(1.0, 20.0)), float(rng.uniform(1.0, 30.0)))

            report = verify_proposition_2(kin, 10)
            for row in report.rows:
                self.assertTrue(abs(row.ratio_to_n_times_c1 - 1.0) <= 1e-10, f"Ratio off at n={row.n} for {kin!r}.")

            scaled = verify_proposition_2(kin.scaled(3.0), 4)
            for row in scaled.rows:
                self.assertTrue(abs(row.ratio_to_n_times_c1 - 1.0) <= 1e-10, "Scaling all rates keeps C(n) = n C(1).")

        return

    def test_requires_two_receptors(self):

        with self.assertRaises(ChannelValidationError):
            verify_proposition_2(REFERENCE_KINETICS, 1)

        return


if __name__ == '__main__':
    unittest.main()
