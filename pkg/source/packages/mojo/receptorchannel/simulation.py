"""
.. module:: simulation
    :platform: Darwin, Linux, Unix, Windows
    :synopsis: Module that contains the Monte Carlo oracle, which simulates the discrete
               time channel under a feedback policy and estimates the mutual information
               rate from the empirical transition counts.

    Trajectories are reproducible from their seed.  The generator is numpy's Philox
    (Philox-4x64 with 10 rounds, counter based) keyed by the seed.  The draw order is one
    `Generator.choice` over the stationary distribution for the initial state, then for
    every chunk of 65536 steps one block of input uniforms followed by one block of
    move uniforms.  At step i the input is high when its uniform is below p_{Y_{i-1}}, and
    the chain unbinds when the move uniform is below tau * b_{Y_{i-1}}, binds when it is
    below tau * (b_{Y_{i-1}} + a_{Y_{i-1},X_i}), and otherwise stays.  The bootstrap uses
    `Philox(seed).jumped()`.

.. moduleauthor:: Myron Walker <myron.walker@gmail.com>
"""

__author__ = "Myron Walker"
__copyright__ = "Copyright 2023, Myron W Walker"
__credits__ = []


from typing import List, Optional, Tuple

import csv
import logging
import math

from dataclasses import dataclass, field

import numpy as np

from scipy.special import xlogy
from scipy.stats import chisquare

from mojo.receptorchannel.channelmodel import (
    BirthDeathChannel,
    FeedbackPolicy,
    check_policy,
    check_step_size,
    output_chain,
    spectral_gap,
    stationary
)
from mojo.receptorchannel.exceptions import ChannelValidationError
from mojo.receptorchannel.settingpaths import DEFAULT_SETTINGS, SettingPaths

logger = logging.getLogger(__name__)

CHUNK_STEPS = 65536

MIN_TRANSITIONS = 10_000

#: Unvisited (state, input) rows with more stationary mass than this are reported.
UNVISITED_MASS_THRESHOLD = 1e-6

#: Relaxation times between the samples of the occupancy test.
OCCUPANCY_THINNING = 5.0

MIN_EXPECTED_COUNT = 5.0

MAX_SEED = 2 ** 64 - 1


@dataclass(frozen=True)
class SimulationConfig:
    """
        The :class:`SimulationConfig` holds the length, time step and seed of a run.  The
        first `burn_in` transitions are discarded by the estimator.
    """

    steps: int
    tau: float
    seed: int
    burn_in: int = 0
    bootstrap_blocks: int = DEFAULT_SETTINGS["simulation"]["bootstrap-blocks"]
    bootstrap_replicates: int = DEFAULT_SETTINGS["simulation"]["bootstrap-replicates"]

    def __post_init__(self):
        for name in ("steps", "seed", "burn_in", "bootstrap_blocks", "bootstrap_replicates"):
            val = getattr(self, name)
            if isinstance(val, bool) or not isinstance(val, (int, np.integer)):
                raise ChannelValidationError(f"The simulation setting '{name}' must be an integer, got {val!r}.")
            object.__setattr__(self, name, int(val))

        if self.burn_in < 0:
            raise ChannelValidationError(f"The burn in must be nonnegative, got {self.burn_in}.")
        if self.steps <= self.burn_in:
            raise ChannelValidationError(
                f"The run has no transitions after the burn in: steps={self.steps}, burn_in={self.burn_in}.")
        if not (0 <= self.seed <= MAX_SEED):
            raise ChannelValidationError(f"The seed must be a 64 bit unsigned integer, got {self.seed}.")
        if self.bootstrap_blocks < 2 or self.bootstrap_replicates < 2:
            raise ChannelValidationError("The bootstrap needs at least 2 blocks and 2 replicates.")
        if not (isinstance(self.tau, (int, float, np.floating)) and math.isfinite(self.tau) and self.tau > 0):
            raise ChannelValidationError(f"The time step must be positive, got {self.tau!r}.")
        return

    @classmethod
    def from_settings(cls, settings) -> "SimulationConfig":
        """
            Creates a configuration from the '/simulation' section of a :class:`SettingsMap`.
        """
        config = cls(
            steps=int(settings.lookup(SettingPaths.SIMULATION_STEPS)),
            tau=float(settings.lookup(SettingPaths.SIMULATION_TAU)),
            seed=int(settings.lookup(SettingPaths.SIMULATION_SEED)),
            burn_in=int(settings.lookup(SettingPaths.SIMULATION_BURN_IN)),
            bootstrap_blocks=int(settings.lookup(SettingPaths.SIMULATION_BOOTSTRAP_BLOCKS)),
            bootstrap_replicates=int(settings.lookup(SettingPaths.SIMULATION_BOOTSTRAP_REPLICATES)),
        )
        return config

    @property
    def transitions(self) -> int:
        return self.steps - self.burn_in


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
        The :class:`Trajectory` of a run.  `inputs[i]` is X_{i+1} (1 for the high input) and
        `states[i]` is Y_i, so `states` starts with the stationary draw Y_0 and holds one
        more entry than `inputs`.
    """

    channel: BirthDeathChannel
    policy: FeedbackPolicy
    config: SimulationConfig
    inputs: np.ndarray
    states: np.ndarray

    @property
    def burn_in(self) -> int:
        return self.config.burn_in

    def kept(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
            The previous states, inputs and next states of the transitions after the burn in.
        """
        start = self.config.burn_in
        rtnval = (self.states[start:-1], self.inputs[start:], self.states[start + 1:])
        return rtnval


@dataclass(frozen=True, eq=False)
class EmpiricalEstimate:
    """
        The :class:`EmpiricalEstimate` of the mutual information rate from a trajectory.
        `counts[k, x, j]` is the number of transitions from state k to state j under
        input x.
    """

    mi_per_second: float
    stderr: float
    counts: np.ndarray
    tau: float
    mi_per_step: float
    unvisited_rows: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def transitions(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class OccupancyTest:
    statistic: float
    pvalue: float
    thin: int
    samples: int


def simulate_trajectory(ch: BirthDeathChannel, policy: FeedbackPolicy, config: SimulationConfig) -> Trajectory:
    """
        Simulates the discrete time channel.  The initial state is drawn from the
        stationary distribution, then every step draws X_i ~ Bernoulli(p_{Y_{i-1}}) and
        Y_i from row Y_{i-1} of P_{X_i}.  In the fully bound state the input is drawn with
        p_{n-1}, it never changes the transition.

        :param ch: The channel.
        :param policy: The feedback policy.
        :param config: Run length, time step and seed.

        :raises: :class:`StepSizeError` when tau is too large for the rates.
    """
    check_policy(ch, policy)
    check_step_size(ch, config.tau)

    dist = stationary(ch, policy)
    rng = np.random.Generator(np.random.Philox(config.seed))

    state = int(rng.choice(ch.n + 1, p=dist.pi))

    tau = config.tau
    high_prob = policy.input_probabilities().tolist()
    bind = ((tau * np.append(ch.up_L, 0.0)).tolist(), (tau * np.append(ch.up_H, 0.0)).tolist())
    unbind = (tau * np.insert(ch.down, 0, 0.0)).tolist()

    inputs = np.empty(config.steps, dtype=np.uint8)
    states = np.empty(config.steps + 1, dtype=np.int64)
    states[0] = state

    for start in range(0, config.steps, CHUNK_STEPS):
        count = min(CHUNK_STEPS, config.steps - start)
        input_draws = rng.random(count).tolist()
        move_draws = rng.random(count).tolist()

        chunk_inputs = [0] * count
        chunk_states = [0] * count
        for i in range(count):
            x = 1 if input_draws[i] < high_prob[state] else 0
            u = move_draws[i]
            down = unbind[state]
            if u < down:
                state -= 1
            elif u < down + bind[x][state]:
                state += 1
            chunk_inputs[i] = x
            chunk_states[i] = state

        inputs[start:start + count] = chunk_inputs
        states[start + 1:start + 1 + count] = chunk_states

    logger.debug("Simulated %d steps with seed %d.", config.steps, config.seed)

    inputs.flags.writeable = False
    states.flags.writeable = False
    trajectory = Trajectory(ch, policy, config, inputs, states)

    return trajectory


def _transition_index(trajectory: Trajectory) -> np.ndarray:

    size = trajectory.channel.n + 1
    prev, inputs, nxt = trajectory.kept()
    index = (prev * 2 + inputs.astype(np.int64)) * size + nxt

    return index


def transition_counts(trajectory: Trajectory) -> np.ndarray:
    """
        The count tensor indexed (previous state, input, next state) of the transitions
        after the burn in.
    """
    size = trajectory.channel.n + 1
    index = _transition_index(trajectory)
    counts = np.bincount(index, minlength=size * 2 * size).reshape(size, 2, size)
    return counts


def _plug_in_information(counts: np.ndarray) -> np.ndarray:
    """
        Plug in H(Y_i | Y_{i-1}) - H(Y_i | X_i, Y_{i-1}) in nats per step over the last three
        axes of a count tensor.  Unvisited rows contribute nothing.
    """
    counts = counts.astype(np.float64)
    total = counts.sum(axis=(-3, -2, -1))

    prev = counts.sum(axis=(-2, -1))
    prev_next = counts.sum(axis=-2)
    prev_input = counts.sum(axis=-1)

    nats = (xlogy(prev, prev).sum(axis=-1)
            - xlogy(prev_next, prev_next).sum(axis=(-2, -1))
            - xlogy(prev_input, prev_input).sum(axis=(-2, -1))
            + xlogy(counts, counts).sum(axis=(-3, -2, -1)))

    rtnval = nats / total
    return rtnval


def estimate_mi(trajectory: Trajectory, tau: Optional[float] = None) -> EmpiricalEstimate:
    """
        Estimates the mutual information rate of a trajectory with the plug in estimator
        of H(Y_i | Y_{i-1}) - H(Y_i | X_i, Y_{i-1}) on the transition counts, divided by tau.
        The standard error comes from a bootstrap over contiguous blocks.

        :param trajectory: A simulated trajectory.
        :param tau: The time step, defaults to the trajectory's.

        :raises: :class:`ChannelValidationError` when fewer than 10^4 transitions remain.
    """
    config = trajectory.config
    if tau is None:
        tau = config.tau

    transitions = config.transitions
    if transitions < MIN_TRANSITIONS:
        raise ChannelValidationError(
            f"The estimator needs at least {MIN_TRANSITIONS} transitions after the burn in, got {transitions}.")

    size = trajectory.channel.n + 1
    cells = size * 2 * size

    index = _transition_index(trajectory)

    counts = np.bincount(index, minlength=cells).reshape(size, 2, size)
    mi_step = float(_plug_in_information(counts))

    blocks = config.bootstrap_blocks
    edges = np.linspace(0, transitions, blocks + 1).astype(np.int64)
    block_ids = np.repeat(np.arange(blocks), np.diff(edges))
    block_counts = np.bincount(block_ids * cells + index, minlength=blocks * cells).reshape(blocks, cells)

    rng = np.random.Generator(np.random.Philox(config.seed).jumped())
    picks = rng.integers(0, blocks, size=(config.bootstrap_replicates, blocks))
    replicate_counts = block_counts[picks].sum(axis=1).reshape(-1, size, 2, size)
    replicate_mi = _plug_in_information(replicate_counts)
    stderr = float(np.std(replicate_mi, ddof=1)) / tau

    unvisited = _unvisited_rows(trajectory, counts)

    estimate = EmpiricalEstimate(
        mi_per_second=mi_step / tau,
        stderr=stderr,
        counts=counts,
        tau=float(tau),
        mi_per_step=mi_step,
        unvisited_rows=unvisited,
    )

    return estimate


def _unvisited_rows(trajectory: Trajectory, counts: np.ndarray) -> List[Tuple[int, int]]:

    dist = stationary(trajectory.channel, trajectory.policy)
    high = trajectory.policy.input_probabilities()
    row_mass = np.stack((dist.pi * (1.0 - high), dist.pi * high), axis=1)

    visits = counts.sum(axis=-1)
    flagged = np.argwhere((visits == 0) & (row_mass > UNVISITED_MASS_THRESHOLD))
    rows = [(int(k), int(x)) for k, x in flagged]

    if len(rows) > 0:
        logger.warning("Unvisited (state, input) rows with stationary mass above %g: %s",
                       UNVISITED_MASS_THRESHOLD, rows)

    return rows


def occupancy_chi_squared(trajectory: Trajectory) -> OccupancyTest:
    """
        Chi squared test of the visited state frequencies against the stationary
        distribution.  The states are thinned to one sample every five relaxation times so
        the samples are close to independent, and states expecting fewer than five samples
        are pooled.
    """
    ch = trajectory.channel
    dist = stationary(ch, trajectory.policy)
    gap = spectral_gap(output_chain(ch, trajectory.policy, trajectory.config.tau))
    thin = max(1, int(math.ceil(OCCUPANCY_THINNING / gap)))

    sample = trajectory.states[trajectory.burn_in::thin]
    observed = np.bincount(sample, minlength=ch.n + 1).astype(np.float64)
    expected = dist.pi * sample.shape[0]

    small = expected < MIN_EXPECTED_COUNT
    if np.any(small):
        observed = np.append(observed[~small], observed[small].sum())
        expected = np.append(expected[~small], expected[small].sum())

    if observed.shape[0] < 2:
        result = OccupancyTest(0.0, 1.0, thin, int(sample.shape[0]))
    else:
        expected = expected * (observed.sum() / expected.sum())
        statistic, pvalue = chisquare(observed, expected)
        result = OccupancyTest(float(statistic), float(pvalue), thin, int(sample.shape[0]))

    return result


def write_trajectory_csv(trajectory: Trajectory, path: str):
    """
        Writes a trajectory as delimited text with the columns step, input and state.  Step
        0 holds the initial state and no input.
    """
    with open(path, "w", newline="") as tfile:
        writer = csv.writer(tfile)
        writer.writerow(["step", "input", "state"])
        writer.writerow([0, "", int(trajectory.states[0])])
        for step, (x, y) in enumerate(zip(trajectory.inputs.tolist(), trajectory.states[1:].tolist()), start=1):
            writer.writerow([step, x, y])
    return


def save_trajectory_npz(trajectory: Trajectory, path: str):
    """
        Writes a trajectory in numpy's compressed binary archive format.
    """
    np.savez_compressed(path, inputs=trajectory.inputs, states=trajectory.states,
                        tau=trajectory.config.tau, seed=trajectory.config.seed,
                        burn_in=trajectory.config.burn_in)
    return


def write_counts_csv(estimate: EmpiricalEstimate, path: str):
    """
        Writes a count tensor as delimited text with the columns prev_state, input,
        next_state and count.
    """
    with open(path, "w", newline="") as cfile:
        writer = csv.writer(cfile)
        writer.writerow(["prev_state", "input", "next_state", "count"])
        for (k, x, j), count in np.ndenumerate(estimate.counts):
            writer.writerow([k, x, j, int(count)])
    return
