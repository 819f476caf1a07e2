"""
.. module:: entropyrates
    :platform: Darwin, Linux, Unix, Windows
    :synopsis: Module that contains the entropy primitives and the exact mutual information
               rates of a birth-death receptor channel, both for a finite time step and in
               the continuous time limit.

    Information is measured in nats.  Every rate is returned as a :class:`MiRate` that
    carries an explicit per step or per second basis.

.. moduleauthor:: Myron Walker <myron.walker@gmail.com>
"""

__author__ = "Myron Walker"
__copyright__ = "Copyright 2023, Myron W Walker"
__credits__ = []


from typing import Optional, Union

import logging
import math

from dataclasses import dataclass
from enum import Enum

import numpy as np

from scipy.special import entr, xlog1py

from mojo.receptorchannel.channelmodel import (
    BirthDeathChannel,
    ChannelKind,
    FeedbackPolicy,
    ReceptorKinetics,
    check_step_size,
    stationary
)
from mojo.receptorchannel.exceptions import (
    ChannelValidationError,
    ConsistencyError,
    EntropyDomainError
)

logger = logging.getLogger(__name__)

ArrayOrFloat = Union[float, np.ndarray]

#: Negative mutual information above this magnitude is an error, below it is round-off.
NEGATIVE_ROUNDOFF = 1e-12

#: Slack allowed on p + q <= 1 for the triple entropy.
TRIPLE_SUM_SLACK = 1e-12


class RateBasis(str, Enum):
    PER_SECOND = "per_second"
    PER_STEP = "per_step"


@dataclass(frozen=True)
class MiRate:
    """
        The :class:`MiRate` is a mutual information rate together with its unit basis.
        Per step rates carry the time step `tau` they were computed for.  Round-off
        negatives down to -1e-12 are clamped to exactly zero.
    """

    value: float
    basis: RateBasis
    tau: Optional[float] = None

    def __post_init__(self):
        basis = RateBasis(self.basis)
        object.__setattr__(self, "basis", basis)

        if basis == RateBasis.PER_STEP and self.tau is None:
            raise ChannelValidationError("A per step rate requires its time step.")
        if basis == RateBasis.PER_SECOND and self.tau is not None:
            raise ChannelValidationError("A per second rate does not carry a time step.")

        value = float(self.value)
        if math.isnan(value):
            raise ConsistencyError("The mutual information rate evaluated to NaN.")
        if value < 0.0:
            if value < -NEGATIVE_ROUNDOFF:
                raise ConsistencyError(f"The mutual information rate is negative: {value!r}.")
            value = 0.0
        object.__setattr__(self, "value", value)
        return

    def per_second(self) -> float:
        """
            The rate in nats per second, dividing a per step rate by its time step.
        """
        rtnval = self.value if self.basis == RateBasis.PER_SECOND else self.value / self.tau
        return rtnval

    def to_bits(self) -> float:
        """
            The value converted from nats to bits in its own basis.
        """
        rtnval = self.value / math.log(2.0)
        return rtnval


def partial_entropy(p: ArrayOrFloat) -> ArrayOrFloat:
    """
        The partial entropy function phi(p) = -p ln p with phi(0) = 0.  The argument may
        exceed one, rates are passed through phi as well.

        :param p: A nonnegative number or array.

        :raises: :class:`EntropyDomainError` for a negative or NaN argument.
    """
    arr = np.asarray(p, dtype=np.float64)
    if not np.all(arr >= 0):
        raise EntropyDomainError(f"The partial entropy is defined for nonnegative arguments, got {p!r}.")

    rtnval = entr(arr)
    if rtnval.ndim == 0:
        rtnval = float(rtnval)

    return rtnval


def triple_entropy(p: ArrayOrFloat, q: ArrayOrFloat) -> ArrayOrFloat:
    """
        The triple entropy H3(p, q) = phi(p) + phi(q) + phi(1 - p - q), the entropy of a
        three outcome distribution.  The remainder term is evaluated with log1p so small
        arguments keep full precision.

        :param p: First outcome probability.
        :param q: Second outcome probability.

        :raises: :class:`EntropyDomainError` when p or q is negative or p + q > 1.
    """
    p_arr = np.asarray(p, dtype=np.float64)
    q_arr = np.asarray(q, dtype=np.float64)

    if not (np.all(p_arr >= 0) and np.all(q_arr >= 0)):
        raise EntropyDomainError(f"The triple entropy needs nonnegative arguments, got p={p!r}, q={q!r}.")

    total = p_arr + q_arr
    if np.any(total > 1.0 + TRIPLE_SUM_SLACK):
        raise EntropyDomainError(f"The triple entropy needs p + q <= 1, got p={p!r}, q={q!r}.")
    total = np.minimum(total, 1.0)

    rtnval = entr(p_arr) + entr(q_arr) - xlog1py(1.0 - total, -total)
    if rtnval.ndim == 0:
        rtnval = float(rtnval)

    return rtnval


def per_receptor_density(kin: ReceptorKinetics, p: ArrayOrFloat) -> ArrayOrFloat:
    """
        The per receptor information density

            psi(p) = phi(p alpha_H + (1 - p) alpha_L) - p phi(alpha_H) - (1 - p) phi(alpha_L)

        in nats per second per unbound receptor.
    """
    p_arr = np.asarray(p, dtype=np.float64)
    abar = kin.alpha_L + p_arr * (kin.alpha_H - kin.alpha_L)
    rtnval = entr(abar) - p_arr * entr(kin.alpha_H) - (1.0 - p_arr) * entr(kin.alpha_L)
    if rtnval.ndim == 0:
        rtnval = float(rtnval)
    return rtnval


def single_receptor_rate(kin: ReceptorKinetics, p: ArrayOrFloat) -> ArrayOrFloat:
    """
        The continuous time mutual information rate of one receptor under IID inputs,
        psi(p) * beta / (alphabar + beta), in nats per second.
    """
    p_arr = np.asarray(p, dtype=np.float64)
    abar = kin.alpha_L + p_arr * (kin.alpha_H - kin.alpha_L)
    rtnval = np.asarray(per_receptor_density(kin, p_arr)) * kin.beta / (abar + kin.beta)
    if rtnval.ndim == 0:
        rtnval = float(rtnval)
    return rtnval


def _check_probability(p: float):
    if not isinstance(p, (int, float, np.floating, np.integer)) or not (0.0 <= p <= 1.0):
        raise ChannelValidationError(f"The input probability must lie in [0, 1], got {p!r}.")
    return


def edge_contributions(ch: BirthDeathChannel, policy: FeedbackPolicy) -> np.ndarray:
    """
        The continuous time information rate contributed by each binding edge k -> k+1,

            I_k = pi_k * (phi(abar_k) - p_k phi(a_{k,H}) - (1 - p_k) phi(a_{k,L}))

        where the a are the total binding rates out of state k.
    """
    dist = stationary(ch, policy)
    abar = ch.averaged_up_rates(policy)

    edge_density = entr(abar) - policy.p * entr(ch.up_H) - (1.0 - policy.p) * entr(ch.up_L)
    rtnval = dist.pi[:-1] * edge_density

    return rtnval


def mi_rate_continuous(ch: BirthDeathChannel, policy: FeedbackPolicy) -> MiRate:
    """
        The mutual information rate in the continuous time limit tau -> 0, the sum of the
        edge contributions over k=0..n-1.  The fully bound state contributes nothing.

        :param ch: The channel.
        :param policy: The feedback policy.

        :returns: The rate in nats per second.
    """
    value = float(np.sum(edge_contributions(ch, policy)))
    rate = MiRate(value, RateBasis.PER_SECOND)
    return rate


def mi_rate_discrete(ch: BirthDeathChannel, policy: FeedbackPolicy, tau: float) -> MiRate:
    """
        The mutual information rate H(Y_i | Y_{i-1}) - H(Y_i | X_i, Y_{i-1}) of the discrete
        time channel with time step `tau`,

            sum_k pi_k [H3(tau abar_k, tau b_k) - p_k H3(tau a_{k,H}, tau b_k)
                        - (1 - p_k) H3(tau a_{k,L}, tau b_k)]

        with b_0 = 0 and the k = n term omitted.

        :param ch: The channel.
        :param policy: The feedback policy.
        :param tau: The time step in seconds.

        :returns: The rate in nats per step.

        :raises: :class:`StepSizeError` when tau is too large for the rates.
    """
    check_step_size(ch, tau)

    dist = stationary(ch, policy)
    abar = ch.averaged_up_rates(policy)
    unbind = tau * np.concatenate(([0.0], ch.down[:-1]))

    state_info = (triple_entropy(tau * abar, unbind)
                  - policy.p * triple_entropy(tau * ch.up_H, unbind)
                  - (1.0 - policy.p) * triple_entropy(tau * ch.up_L, unbind))

    value = float(np.sum(dist.pi[:-1] * state_info))
    rate = MiRate(value, RateBasis.PER_STEP, tau=float(tau))

    return rate


def mi_rate_iid(ch: BirthDeathChannel, p: float) -> MiRate:
    """
        The closed form continuous time rate of n independent receptors under an IID
        policy, n * psi(p) * beta / (alphabar + beta).  This is n times the single
        receptor rate.

        :param ch: A channel of kind independent.
        :param p: The probability of the high input.

        :raises: :class:`ConsistencyError` for channels that are not independent.
    """
    if ch.kind != ChannelKind.INDEPENDENT:
        raise ConsistencyError(
            f"The IID closed form holds for independent receptors only, got a {ch.kind.value} channel.")
    _check_probability(p)

    value = ch.n * single_receptor_rate(ch.kinetics, float(p))
    rate = MiRate(value, RateBasis.PER_SECOND)

    return rate


def mi_rate_two_receptor(kin: ReceptorKinetics, p0: float, p1: float) -> MiRate:
    """
        The continuous time rate of two independent receptors written over the normalizer
        Z = beta^2 + 2 alpha_0 beta + alpha_0 alpha_1 with alpha_k = alpha_L + p_k (alpha_H - alpha_L).
    """
    _check_probability(p0)
    _check_probability(p1)

    beta = kin.beta
    a0 = kin.averaged_rate(p0)
    a1 = kin.averaged_rate(p1)
    z = beta * beta + 2.0 * a0 * beta + a0 * a1

    phi_high = entr(kin.alpha_H)
    phi_low = entr(kin.alpha_L)
    high_weight = beta * p0 + a0 * p1

    value = (2.0 * beta / z) * (beta * entr(a0) + a0 * entr(a1) - high_weight * phi_high
                                - ((a0 + beta) - high_weight) * phi_low)
    rate = MiRate(float(value), RateBasis.PER_SECOND)

    return rate
