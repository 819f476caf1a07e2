"""
.. module:: channelmodel
    :platform: Darwin, Linux, Unix, Windows
    :synopsis: Module that contains the receptor kinetics, the finite state birth-death
               channel types and the operations that build channels, discretize them
               in time and compute their stationary distributions under a feedback policy.

    A channel has states 0..n, the number of bound receptors.  From state k a binding
    event moves the chain to k+1 at the total rate a_{k,H} or a_{k,L} depending on the
    ligand concentration input, and an unbinding event moves it to k-1 at the total
    rate b_k which does not depend on the input.  All rates are in Hz.

.. moduleauthor:: Myron Walker <myron.walker@gmail.com>
"""

__author__ = "Myron Walker"
__copyright__ = "Copyright 2023, Myron W Walker"
__credits__ = []


from typing import Optional, Sequence, Tuple, Union

import logging
import math

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from scipy.special import gammaln, logsumexp
from scipy.stats import binom

from mojo.receptorchannel.exceptions import (
    ChannelValidationError,
    IrreducibilityError,
    StepSizeError
)

logger = logging.getLogger(__name__)

#: Channels with more states than this accumulate the stationary products in log space.
LOG_SPACE_THRESHOLD = 30


def _frozen_vector(values: Union[Sequence[float], np.ndarray], name: str) -> np.ndarray:
    vector = np.array(values, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(vector)):
        raise ChannelValidationError(f"The '{name}' vector contains a non-finite value: {vector!r}")
    vector.flags.writeable = False
    return vector


class ChannelKind(str, Enum):
    INDEPENDENT = "independent"
    COOPERATIVE = "cooperative"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ReceptorKinetics:
    """
        The :class:`ReceptorKinetics` holds the per receptor rate constants of a ligand
        receptor.  Binding follows mass action so `alpha_L = k_plus * L` and
        `alpha_H = k_plus * H` where L and H are the lowest and highest ligand
        concentrations.  Unbinding does not depend on the concentration, `beta = k_minus`.
    """

    alpha_L: float
    alpha_H: float
    beta: float

    def __post_init__(self):
        for name in ("alpha_L", "alpha_H", "beta"):
            val = getattr(self, name)
            if not isinstance(val, (int, float, np.floating, np.integer)) or not math.isfinite(val):
                raise ChannelValidationError(f"The kinetic rate '{name}' must be a finite number, got {val!r}.")
            object.__setattr__(self, name, float(val))

        if self.alpha_L < 0 or self.alpha_H < 0:
            raise ChannelValidationError(
                f"Binding rates must be nonnegative, got alpha_L={self.alpha_L!r}, alpha_H={self.alpha_H!r}.")
        if self.beta <= 0:
            raise ChannelValidationError(f"The unbinding rate beta must be positive, got {self.beta!r}.")
        if self.alpha_L > self.alpha_H:
            raise ChannelValidationError(
                f"The low concentration rate alpha_L={self.alpha_L!r} exceeds alpha_H={self.alpha_H!r}.")
        return

    @classmethod
    def from_mass_action(cls, k_plus: float, k_minus: float, low: float, high: float) -> "ReceptorKinetics":
        """
            Creates kinetics from the binding and unbinding rate constants and the two
            ligand concentrations.

            :param k_plus: Binding rate constant per unit concentration.
            :param k_minus: Unbinding rate constant in Hz.
            :param low: The lowest possible ligand concentration.
            :param high: The highest possible ligand concentration.
        """
        kin = cls(alpha_L=k_plus * low, alpha_H=k_plus * high, beta=k_minus)
        return kin

    def averaged_rate(self, p: float) -> float:
        """
            The per capita binding rate when the high input is sent with probability `p`.
        """
        rtnval = self.alpha_L + p * (self.alpha_H - self.alpha_L)
        return rtnval

    def scaled(self, factor: float) -> "ReceptorKinetics":
        """
            Returns kinetics with every rate multiplied by `factor`.
        """
        if factor <= 0:
            raise ChannelValidationError(f"The scale factor must be positive, got {factor!r}.")
        kin = ReceptorKinetics(self.alpha_L * factor, self.alpha_H * factor, self.beta * factor)
        return kin


@dataclass(frozen=True, eq=False)
class BirthDeathChannel:
    """
        The :class:`BirthDeathChannel` is a finite state channel on the states 0..n.

        :param n: The highest state.
        :param up_H: The n total binding rates a_{k,H} for k=0..n-1 under the high input.
        :param up_L: The n total binding rates a_{k,L} for k=0..n-1 under the low input.
        :param down: The n total unbinding rates b_k for k=1..n.
        :param kind: How the rates were derived.
        :param kinetics: The per receptor kinetics for independent and cooperative channels.
    """

    n: int
    up_H: np.ndarray
    up_L: np.ndarray
    down: np.ndarray
    kind: ChannelKind = ChannelKind.CUSTOM
    kinetics: Optional[ReceptorKinetics] = field(default=None)

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ChannelValidationError(f"The channel needs at least one receptor, got n={self.n!r}.")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "kind", ChannelKind(self.kind))

        for name in ("up_H", "up_L", "down"):
            vector = _frozen_vector(getattr(self, name), name)
            if vector.shape[0] != self.n:
                raise ChannelValidationError(
                    f"The '{name}' vector must hold n={self.n} rates, got {vector.shape[0]}.")
            object.__setattr__(self, name, vector)

        if np.any(self.up_H < 0) or np.any(self.up_L < 0):
            raise ChannelValidationError("Binding rates must be nonnegative.")
        dead = np.flatnonzero(np.maximum(self.up_H, self.up_L) == 0)
        if dead.size > 0:
            edge = int(dead[0])
            raise ChannelValidationError(
                f"State {edge + 1} is unreachable, both binding rates out of state {edge} are zero.")
        if np.any(self.down <= 0):
            raise ChannelValidationError("Unbinding rates must be strictly positive.")

        if self.kind != ChannelKind.CUSTOM:
            if self.kinetics is None:
                raise ChannelValidationError(f"A {self.kind.value} channel requires its receptor kinetics.")
            exp_up_H, exp_up_L, exp_down = _structured_rates(self.n, self.kinetics, self.kind)
            if not (np.array_equal(self.up_H, exp_up_H) and np.array_equal(self.up_L, exp_up_L)
                    and np.array_equal(self.down, exp_down)):
                raise ChannelValidationError(
                    f"The rates do not have the {self.kind.value} structure for the kinetics {self.kinetics!r}.")
        return

    @property
    def state_count(self) -> int:
        return self.n + 1

    def averaged_up_rates(self, policy: "FeedbackPolicy") -> np.ndarray:
        """
            The policy averaged total binding rates p_k * a_{k,H} + (1 - p_k) * a_{k,L}.

            :param policy: A feedback policy with one probability per state 0..n-1.
        """
        check_policy(self, policy)
        rtnval = policy.p * self.up_H + (1.0 - policy.p) * self.up_L
        return rtnval

    def exit_rates(self) -> np.ndarray:
        """
            The largest total exit rate of every state 0..n over both inputs.
        """
        up = np.append(np.maximum(self.up_H, self.up_L), 0.0)
        down = np.insert(self.down, 0, 0.0)
        rtnval = up + down
        return rtnval

    def max_exit_rate(self) -> Tuple[int, float]:
        """
            The state with the largest total exit rate and that rate.
        """
        rates = self.exit_rates()
        row = int(np.argmax(rates))
        return row, float(rates[row])

    def is_input_independent(self) -> bool:
        """
            True when both inputs produce the same rates, so the channel carries no information.
        """
        rtnval = bool(np.array_equal(self.up_H, self.up_L))
        return rtnval

    def to_document(self) -> dict:
        """
            Serializes the channel to its specification document form.
        """
        if self.kind == ChannelKind.CUSTOM:
            doc = {
                "kind": self.kind.value,
                "n": self.n,
                "up_H": self.up_H.tolist(),
                "up_L": self.up_L.tolist(),
                "down": self.down.tolist(),
            }
        else:
            doc = {
                "kind": self.kind.value,
                "n": self.n,
                "alpha_L": self.kinetics.alpha_L,
                "alpha_H": self.kinetics.alpha_H,
                "beta": self.kinetics.beta,
            }
        return doc

    def __repr__(self) -> str:
        return (f"{self.__class__.__name__}(n={self.n}, kind={self.kind.value}, up_H={self.up_H.tolist()}, "
                f"up_L={self.up_L.tolist()}, down={self.down.tolist()})")


@dataclass(frozen=True, eq=False)
class FeedbackPolicy:
    """
        The :class:`FeedbackPolicy` holds p_k, the probability of sending the high input
        when the previous output state is k, for k=0..n-1.  There is no p_n: in the
        fully bound state the input has no effect on the channel.
    """

    p: np.ndarray

    def __post_init__(self):
        vector = _frozen_vector(self.p, "policy")
        if vector.shape[0] < 1:
            raise ChannelValidationError("A policy needs at least one probability.")
        if np.any(vector < 0) or np.any(vector > 1):
            raise ChannelValidationError(f"Policy probabilities must lie in [0, 1], got {vector.tolist()!r}.")
        object.__setattr__(self, "p", vector)
        return

    @classmethod
    def iid(cls, n: int, p: float) -> "FeedbackPolicy":
        """
            The IID policy that sends the high input with probability `p` in every state.
        """
        pol = cls(np.full(n, p, dtype=np.float64))
        return pol

    @classmethod
    def from_values(cls, n: int, values: Sequence[float]) -> "FeedbackPolicy":
        """
            Creates a policy from n probabilities, or from a single probability that is
            used in every state.
        """
        values = [float(v) for v in values]
        if len(values) == 1:
            pol = cls.iid(n, values[0])
        elif len(values) == n:
            pol = cls(values)
        else:
            raise ChannelValidationError(f"A policy needs 1 or n={n} probabilities, got {len(values)}.")
        return pol

    @property
    def n(self) -> int:
        return int(self.p.shape[0])

    def is_iid(self) -> bool:
        rtnval = bool(np.all(self.p == self.p[0]))
        return rtnval

    def input_probabilities(self) -> np.ndarray:
        """
            The high input probability for every state 0..n.  The fully bound state reuses
            p_{n-1}, its input never changes a transition.
        """
        rtnval = np.append(self.p, self.p[-1])
        return rtnval

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(p={self.p.tolist()})"


@dataclass(frozen=True, eq=False)
class DiscreteChannelMatrices:
    """
        The :class:`DiscreteChannelMatrices` holds the row stochastic, tridiagonal
        transition matrices of a channel for one time step `tau`, one per input.
    """

    tau: float
    P_H: np.ndarray
    P_L: np.ndarray

    def for_input(self, high: bool) -> np.ndarray:
        rtnval = self.P_H if high else self.P_L
        return rtnval


@dataclass(frozen=True, eq=False)
class StationaryDistribution:
    """
        The :class:`StationaryDistribution` holds the stationary state occupancy `pi` of a
        channel under a policy and the log of its normalizer.  The normalizer itself
        overflows for large channels, so `normalizer` may be infinite while
        `log_normalizer` stays exact.
    """

    pi: np.ndarray
    log_normalizer: float

    @property
    def normalizer(self) -> float:
        with np.errstate(over="ignore"):
            rtnval = float(np.exp(self.log_normalizer))
        return rtnval

    @property
    def unnormalized(self) -> np.ndarray:
        """
            The weights A_k, meaningful only while the normalizer is finite.
        """
        rtnval = self.pi * self.normalizer
        return rtnval


def _structured_rates(n: int, kin: ReceptorKinetics, kind: ChannelKind) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:

    if kind == ChannelKind.INDEPENDENT:
        unbound = np.arange(n, 0, -1, dtype=np.float64)
        bound = np.arange(1, n + 1, dtype=np.float64)
        rates = (unbound * kin.alpha_H, unbound * kin.alpha_L, bound * kin.beta)
    elif kind == ChannelKind.COOPERATIVE:
        rates = (np.full(n, kin.alpha_H), np.full(n, kin.alpha_L), np.full(n, kin.beta))
    else:
        raise ChannelValidationError(f"Channels of kind {kind.value} have no structured rates.")

    return rates


def build_independent_channel(n: int, kin: ReceptorKinetics) -> BirthDeathChannel:
    """
        Builds the channel of n identical, independent receptors.  From state k the
        n-k unbound receptors bind at (n-k) * alpha and the k bound receptors unbind at
        k * beta.

        :param n: The number of receptors.
        :param kin: The per receptor kinetics.

        :returns: A channel of kind independent.
    """
    if not isinstance(kin, ReceptorKinetics):
        raise ChannelValidationError(f"Expected ReceptorKinetics, got {kin!r}.")
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ChannelValidationError(f"The channel needs at least one receptor, got n={n!r}.")

    up_H, up_L, down = _structured_rates(int(n), kin, ChannelKind.INDEPENDENT)
    ch = BirthDeathChannel(int(n), up_H, up_L, down, kind=ChannelKind.INDEPENDENT, kinetics=kin)

    return ch


def build_cooperative_channel(n: int, kin: ReceptorKinetics) -> BirthDeathChannel:
    """
        Builds a channel of n cooperative receptors whose total binding and unbinding
        rates do not scale with the occupancy.

        :param n: The number of receptors.
        :param kin: The total rates, used unscaled in every state.

        :returns: A channel of kind cooperative.
    """
    if not isinstance(kin, ReceptorKinetics):
        raise ChannelValidationError(f"Expected ReceptorKinetics, got {kin!r}.")
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ChannelValidationError(f"The channel needs at least one receptor, got n={n!r}.")

    up_H, up_L, down = _structured_rates(int(n), kin, ChannelKind.COOPERATIVE)
    ch = BirthDeathChannel(int(n), up_H, up_L, down, kind=ChannelKind.COOPERATIVE, kinetics=kin)

    return ch


def build_custom_channel(up_H: Sequence[float], up_L: Sequence[float], down: Sequence[float]) -> BirthDeathChannel:
    """
        Builds a birth-death channel from explicit total rate vectors.

        :param up_H: Binding rates a_{k,H}, k=0..n-1.
        :param up_L: Binding rates a_{k,L}, k=0..n-1.
        :param down: Unbinding rates b_k, k=1..n.
    """
    n = len(up_H)
    ch = BirthDeathChannel(n, up_H, up_L, down, kind=ChannelKind.CUSTOM)
    return ch


def check_policy(ch: BirthDeathChannel, policy: FeedbackPolicy):
    """
        Checks that a policy holds one probability per non fully bound state of a channel.

        :raises: :class:`ChannelValidationError`
    """
    if not isinstance(policy, FeedbackPolicy):
        raise ChannelValidationError(f"Expected a FeedbackPolicy, got {policy!r}.")
    if policy.n != ch.n:
        raise ChannelValidationError(
            f"The policy holds {policy.n} probabilities but the channel has n={ch.n}; p_n is never specified.")
    return


def check_step_size(ch: BirthDeathChannel, tau: float):
    """
        Checks that a time step keeps every diagonal of the discrete matrices positive,
        that is tau * max_k(a_k + b_k) < 1 over both inputs.

        :raises: :class:`StepSizeError`
    """
    if not isinstance(tau, (int, float, np.floating)) or not math.isfinite(tau) or tau <= 0:
        raise ChannelValidationError(f"The time step must be a positive number of seconds, got {tau!r}.")

    row, rate = ch.max_exit_rate()
    if tau * rate >= 1.0:
        raise StepSizeError(float(tau), row, rate)

    return


def _tridiagonal(up: np.ndarray, down: np.ndarray, tau: float) -> np.ndarray:

    size = up.shape[0] + 1
    matrix = np.zeros((size, size), dtype=np.float64)

    upper = tau * up
    lower = tau * down
    idx = np.arange(size - 1)
    matrix[idx, idx + 1] = upper
    matrix[idx + 1, idx] = lower

    stay = np.ones(size)
    stay[:-1] -= upper
    stay[1:] -= lower
    matrix[np.arange(size), np.arange(size)] = stay

    return matrix


def discretize(ch: BirthDeathChannel, tau: float) -> DiscreteChannelMatrices:
    """
        Builds the one step transition matrices P_H and P_L of a channel for the time
        step `tau`.

        :param ch: The channel.
        :param tau: The time step in seconds.

        :raises: :class:`StepSizeError` when tau is too large for the rates.
    """
    check_step_size(ch, tau)

    P_H = _tridiagonal(ch.up_H, ch.down, tau)
    P_L = _tridiagonal(ch.up_L, ch.down, tau)
    P_H.flags.writeable = False
    P_L.flags.writeable = False

    matrices = DiscreteChannelMatrices(float(tau), P_H, P_L)

    return matrices


def output_chain(ch: BirthDeathChannel, policy: FeedbackPolicy, tau: float) -> np.ndarray:
    """
        Builds the policy averaged output transition matrix P_Y whose binding entries are
        tau * (p_k * a_{k,H} + (1 - p_k) * a_{k,L}).

        :param ch: The channel.
        :param policy: The feedback policy.
        :param tau: The time step in seconds.
    """
    check_policy(ch, policy)
    check_step_size(ch, tau)

    P_Y = _tridiagonal(ch.averaged_up_rates(policy), ch.down, tau)

    return P_Y


def stationary(ch: BirthDeathChannel, policy: FeedbackPolicy) -> StationaryDistribution:
    """
        Computes the stationary distribution of the policy averaged chain from detailed
        balance, pi_k * abar_k = pi_{k+1} * b_{k+1}.  The weights are

            A_k = prod_{j<k} abar_j * prod_{j>k} b_j

        which for independent receptors is divided by n! to give the per capita form
        A_k = C(n, k) * beta^(n-k) * prod_{j<k} alphabar_j with A_0 = beta^n.  The result
        does not depend on the time step.

        :param ch: The channel.
        :param policy: The feedback policy.

        :raises: :class:`IrreducibilityError` when some averaged binding rate is zero.
    """
    abar = ch.averaged_up_rates(policy)
    if np.any(abar <= 0):
        states = np.flatnonzero(abar <= 0).tolist()
        raise IrreducibilityError(
            f"The averaged binding rate vanishes in states {states}; the chain is not irreducible.")

    n = ch.n

    if n > LOG_SPACE_THRESHOLD:
        logger.debug("Accumulating stationary weights in log space for n=%d.", n)
        log_scale = float(gammaln(n + 1)) if ch.kind == ChannelKind.INDEPENDENT else 0.0
        # log(A_k / A_0), summed from the neighbour ratios abar_k / b_{k+1}
        log_ratios = np.concatenate(([0.0], np.cumsum(np.log(abar / ch.down))))
        log_rel_z = float(logsumexp(log_ratios))
        pi = np.exp(log_ratios - log_rel_z)
        log_z = float(np.sum(np.log(ch.down))) - log_scale + log_rel_z
    else:
        scale = float(math.factorial(n)) if ch.kind == ChannelKind.INDEPENDENT else 1.0
        up_prod = np.concatenate(([1.0], np.cumprod(abar)))
        down_tail = np.concatenate((np.cumprod(ch.down[::-1])[::-1], [1.0]))
        weights = up_prod * down_tail / scale
        z = float(weights.sum())
        pi = weights / z
        log_z = math.log(z)

    pi.flags.writeable = False
    dist = StationaryDistribution(pi, log_z)

    return dist


def stationary_by_power_iteration(ch: BirthDeathChannel, policy: FeedbackPolicy, tau: Optional[float] = None,
                                  tolerance: float = 1e-12, max_squarings: int = 64) -> np.ndarray:
    """
        Computes the stationary distribution independently of the detailed balance
        formula by repeatedly squaring the output chain until its rows agree.

        :param ch: The channel.
        :param policy: The feedback policy.
        :param tau: The time step, defaults to half of the largest stable step.
        :param tolerance: Largest spread allowed between the rows of the matrix power.
        :param max_squarings: Upper bound on the number of squarings.

        :returns: The stationary probability vector.
    """
    if tau is None:
        _, rate = ch.max_exit_rate()
        tau = 0.5 / rate

    power = output_chain(ch, policy, tau)
    for _ in range(max_squarings):
        power = power @ power
        if np.max(np.ptp(power, axis=0)) < tolerance:
            break
    else:
        logger.warning("Power iteration did not settle within %d squarings.", max_squarings)

    pi = power.mean(axis=0)
    pi = pi / pi.sum()

    return pi


def binomial_stationary(n: int, kin: ReceptorKinetics, p: float) -> np.ndarray:
    """
        The closed form stationary law of n independent receptors under an IID policy,
        binomial with success probability alphabar / (alphabar + beta).
    """
    abar = kin.averaged_rate(p)
    occupancy = abar / (abar + kin.beta)
    rtnval = binom.pmf(np.arange(n + 1), n, occupancy)
    return rtnval


def spectral_gap(matrix: np.ndarray) -> float:
    """
        One minus the second largest eigenvalue modulus of a row stochastic matrix.
    """
    moduli = np.sort(np.abs(np.linalg.eigvals(matrix)))[::-1]
    gap = 1.0 if moduli.shape[0] < 2 else float(1.0 - moduli[1])
    return gap
