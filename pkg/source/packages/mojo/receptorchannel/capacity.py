"""
.. module:: capacity
    :platform: Darwin, Linux, Unix, Windows
    :synopsis: Module that contains the capacity optimizers of a receptor channel in the
               continuous time limit, the IID search over a single probability and the
               feedback search over one probability per state, along with the numerical
               check that n independent receptors carry n times the capacity of one.

.. moduleauthor:: Myron Walker <myron.walker@gmail.com>
"""

__author__ = "Myron Walker"
__copyright__ = "Copyright 2023, Myron W Walker"
__credits__ = []


from typing import Callable, List, Optional, Tuple

import itertools
import logging
import math

from dataclasses import dataclass, field

import numpy as np

from scipy.stats import qmc

from mojo.receptorchannel.channelmodel import (
    BirthDeathChannel,
    ChannelKind,
    FeedbackPolicy,
    ReceptorKinetics,
    build_independent_channel
)
from mojo.receptorchannel.entropyrates import (
    mi_rate_continuous,
    mi_rate_iid,
    single_receptor_rate
)
from mojo.receptorchannel.exceptions import (
    ChannelValidationError,
    ConsistencyError,
    IrreducibilityError,
    OptimizerConfigurationError
)
from mojo.receptorchannel.settingpaths import DEFAULT_SETTINGS, SettingPaths

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQUARE = (3.0 - math.sqrt(5.0)) / 2.0

#: Input probability returned when the objective is flat.
FLAT_TIE_BREAK = 0.5

SCALING_RATIO_TOLERANCE = 1e-10
SCALING_ARGMAX_TOLERANCE = 1e-9


@dataclass(frozen=True)
class OptimizerConfig:
    """
        The :class:`OptimizerConfig` holds the knobs of the capacity searches.

        :param scan_points: Points of the coarse scan that brackets every golden section search.
        :param tolerance: Final bracket width of the golden section searches.
        :param grid_points: Points per axis of the feedback grid stage.
        :param grid_max_dimension: Largest n that uses the full grid, larger n use Latin hypercube samples.
        :param lhs_samples: Latin hypercube sample count.
        :param max_dimension: Largest n the feedback search accepts.
        :param sweep_tolerance: Coordinate ascent stops when a full sweep improves the objective by less.
        :param max_sweeps: Upper bound on coordinate ascent sweeps.
        :param seed: Seed of the Latin hypercube sampler.
    """

    scan_points: int = DEFAULT_SETTINGS["optimizer"]["scan-points"]
    tolerance: float = DEFAULT_SETTINGS["optimizer"]["tolerance"]
    grid_points: int = DEFAULT_SETTINGS["optimizer"]["grid-points"]
    grid_max_dimension: int = DEFAULT_SETTINGS["optimizer"]["grid-max-dimension"]
    lhs_samples: int = DEFAULT_SETTINGS["optimizer"]["lhs-samples"]
    max_dimension: int = DEFAULT_SETTINGS["optimizer"]["max-dimension"]
    sweep_tolerance: float = DEFAULT_SETTINGS["optimizer"]["sweep-tolerance"]
    max_sweeps: int = DEFAULT_SETTINGS["optimizer"]["max-sweeps"]
    seed: int = DEFAULT_SETTINGS["optimizer"]["seed"]

    def __post_init__(self):
        for name in ("scan_points", "grid_points"):
            if getattr(self, name) < 2:
                raise OptimizerConfigurationError(f"The optimizer setting '{name}' needs at least 2 points.")
        for name in ("grid_max_dimension", "lhs_samples", "max_dimension", "max_sweeps"):
            if getattr(self, name) < 1:
                raise OptimizerConfigurationError(f"The optimizer setting '{name}' must be positive.")
        if not (self.tolerance > 0 and self.sweep_tolerance >= 0):
            raise OptimizerConfigurationError("Optimizer tolerances must be positive.")
        return

    @classmethod
    def from_settings(cls, settings) -> "OptimizerConfig":
        """
            Creates a configuration from the '/optimizer' section of a :class:`SettingsMap`.
        """
        config = cls(
            scan_points=int(settings.lookup(SettingPaths.OPTIMIZER_SCAN_POINTS)),
            tolerance=float(settings.lookup(SettingPaths.OPTIMIZER_TOLERANCE)),
            grid_points=int(settings.lookup(SettingPaths.OPTIMIZER_GRID_POINTS)),
            grid_max_dimension=int(settings.lookup(SettingPaths.OPTIMIZER_GRID_MAX_DIMENSION)),
            lhs_samples=int(settings.lookup(SettingPaths.OPTIMIZER_LHS_SAMPLES)),
            max_dimension=int(settings.lookup(SettingPaths.OPTIMIZER_MAX_DIMENSION)),
            sweep_tolerance=float(settings.lookup(SettingPaths.OPTIMIZER_SWEEP_TOLERANCE)),
            max_sweeps=int(settings.lookup(SettingPaths.OPTIMIZER_MAX_SWEEPS)),
            seed=int(settings.lookup(SettingPaths.OPTIMIZER_SEED)),
        )
        return config


@dataclass(frozen=True)
class ScalarSearchResult:
    argmax: float
    value: float
    iterations: int
    final_step: float
    converged: bool


@dataclass(frozen=True, eq=False)
class CapacityResult:
    """
        The :class:`CapacityResult` holds an optimal rate in nats per second, the policy
        that attains it and the optimizer diagnostics.  IID results also carry the scalar
        input probability `p`.
    """

    capacity: float
    policy: FeedbackPolicy
    mode: str
    iterations: int
    converged: bool
    final_step: float
    p: Optional[float] = None
    evaluations: int = 0


@dataclass(frozen=True)
class ScalingRow:
    n: int
    capacity: float
    argmax: float
    ratio_to_n_times_c1: float


@dataclass(frozen=True)
class ScalingReport:
    """
        The :class:`ScalingReport` is the table of IID capacities of n = 1..n_max
        independent receptors.
    """

    kinetics: ReceptorKinetics
    rows: List[ScalingRow] = field(default_factory=list)


class _CountingObjective:
    """
        Wraps an objective and counts its evaluations.  A chain that is not irreducible
        at a point evaluates to -inf so searches step away from it.
    """

    def __init__(self, func: Callable[[np.ndarray], float]):
        self._func = func
        self.evaluations = 0
        return

    def __call__(self, point) -> float:
        self.evaluations += 1
        try:
            rtnval = self._func(point)
        except IrreducibilityError:
            rtnval = -math.inf
        return rtnval


def golden_section_maximize(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-9,
                            max_iterations: int = 200) -> ScalarSearchResult:
    """
        Golden section search for the maximum of `f` on [lo, hi].  The bracket shrinks by
        the inverse golden ratio on every iteration until it is no wider than `tol`.

        :param f: The objective.
        :param lo: Lower end of the bracket.
        :param hi: Upper end of the bracket.
        :param tol: Final bracket width.
        :param max_iterations: Upper bound on the iterations.
    """

    a, b = min(lo, hi), max(lo, hi)
    h = b - a

    if h <= tol:
        x = 0.5 * (a + b)
        result = ScalarSearchResult(x, f(x), 0, h, True)
        return result

    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)

    iterations = 0
    while h > tol and iterations < max_iterations:
        iterations += 1
        if yc > yd:
            b = d
            d = c
            yd = yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a = c
            c = d
            yc = yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)

    if yc > yd:
        argmax, value = c, yc
    else:
        argmax, value = d, yd

    result = ScalarSearchResult(argmax, value, iterations, h, h <= tol)

    return result


def scan_then_golden(f: Callable[[float], float], lo: float = 0.0, hi: float = 1.0, points: int = 64,
                     tol: float = 1e-9) -> ScalarSearchResult:
    """
        Scans `points` evenly spaced values, brackets the best one by its neighbours and
        refines it with a golden section search.  The scan guards against objectives that
        are not unimodal.
    """
    grid = np.linspace(lo, hi, points)
    values = [f(float(x)) for x in grid]
    best = int(np.argmax(values))

    left = float(grid[max(best - 1, 0)])
    right = float(grid[min(best + 1, points - 1)])
    refined = golden_section_maximize(f, left, right, tol)

    result = refined
    if values[best] > refined.value:
        result = ScalarSearchResult(float(grid[best]), float(values[best]), refined.iterations,
                                    refined.final_step, refined.converged)

    return result


def _flat_result(ch: BirthDeathChannel, mode: str) -> CapacityResult:
    result = CapacityResult(
        capacity=0.0,
        policy=FeedbackPolicy.iid(ch.n, FLAT_TIE_BREAK),
        mode=mode,
        iterations=0,
        converged=True,
        final_step=0.0,
        p=FLAT_TIE_BREAK if mode == "iid" else None,
    )
    return result


def _require_finite(value: float, mode: str) -> float:
    if not math.isfinite(value):
        raise ConsistencyError(f"The {mode} search found no policy with a finite rate, best value {value!r}.")
    return value


def capacity_iid(ch: BirthDeathChannel, config: Optional[OptimizerConfig] = None) -> CapacityResult:
    """
        The IID capacity, the largest continuous time rate over policies that send the
        high input with the same probability p in every state.  For independent receptors
        the search runs on the single receptor rate, whose argmax is that of
        n * psi(p) * beta / (alphabar + beta), and the capacity is the closed form at the
        argmax.  Other channels search mi_rate_continuous(ch, 1p) directly.

        :param ch: The channel.
        :param config: Optimizer settings.
    """
    if config is None:
        config = OptimizerConfig()

    if ch.is_input_independent():
        logger.debug("The channel rates do not depend on the input, the IID capacity is zero.")
        return _flat_result(ch, "iid")

    if ch.kind == ChannelKind.INDEPENDENT:
        kin = ch.kinetics
        objective = _CountingObjective(lambda p: single_receptor_rate(kin, p))
        search = scan_then_golden(objective, 0.0, 1.0, config.scan_points, config.tolerance)
        capacity = mi_rate_iid(ch, search.argmax).value
    else:
        objective = _CountingObjective(lambda p: mi_rate_continuous(ch, FeedbackPolicy.iid(ch.n, p)).value)
        search = scan_then_golden(objective, 0.0, 1.0, config.scan_points, config.tolerance)
        capacity = search.value

    _require_finite(capacity, "iid")

    result = CapacityResult(
        capacity=capacity,
        policy=FeedbackPolicy.iid(ch.n, search.argmax),
        mode="iid",
        iterations=search.iterations,
        converged=search.converged,
        final_step=search.final_step,
        p=search.argmax,
        evaluations=objective.evaluations,
    )

    logger.debug("IID capacity %.12g nats/s at p=%.12g after %d evaluations.",
                 result.capacity, search.argmax, objective.evaluations)

    return result


def _coarse_points(n: int, config: OptimizerConfig) -> np.ndarray:

    if n <= config.grid_max_dimension:
        axis = np.linspace(0.0, 1.0, config.grid_points)
        points = np.array(list(itertools.product(axis, repeat=n)), dtype=np.float64)
    else:
        sampler = qmc.LatinHypercube(d=n, seed=np.random.default_rng(config.seed))
        points = sampler.random(config.lhs_samples)

    return points


def _coordinate_ascent(objective: _CountingObjective, start: np.ndarray,
                       config: OptimizerConfig) -> Tuple[np.ndarray, float, int, float, bool]:

    point = np.array(start, dtype=np.float64)
    value = objective(point)
    final_step = 0.0
    converged = False

    sweeps = 0
    while sweeps < config.max_sweeps:
        sweeps += 1
        sweep_start = value

        for k in range(point.shape[0]):
            def line(x: float, k=k) -> float:
                trial = point.copy()
                trial[k] = x
                return objective(trial)

            search = scan_then_golden(line, 0.0, 1.0, config.scan_points, config.tolerance)
            final_step = search.final_step
            if search.value > value:
                point[k] = search.argmax
                value = search.value

        if value - sweep_start < config.sweep_tolerance:
            converged = True
            break

    return point, value, sweeps, final_step, converged


def capacity_feedback(ch: BirthDeathChannel, config: Optional[OptimizerConfig] = None) -> CapacityResult:
    """
        The feedback capacity, the largest continuous time rate over all policies
        (p_0, ..., p_{n-1}) in [0, 1]^n.  A coarse stage evaluates a full grid for small n
        and Latin hypercube samples otherwise.  Coordinate ascent with a golden section
        search per coordinate then refines both the best coarse point and the IID optimum,
        and the better of the two is returned, so the result is never below the IID
        capacity.

        :param ch: The channel.
        :param config: Optimizer settings.

        :raises: :class:`OptimizerConfigurationError` when n exceeds the configured maximum.
    """
    if config is None:
        config = OptimizerConfig()

    if ch.n > config.max_dimension:
        raise OptimizerConfigurationError(
            f"The feedback search supports n <= {config.max_dimension} but the channel has n={ch.n}; "
            f"use the IID mode, which is optimal for independent receptors.")

    if ch.is_input_independent():
        logger.debug("The channel rates do not depend on the input, the feedback capacity is zero.")
        return _flat_result(ch, "feedback")

    objective = _CountingObjective(lambda vec: mi_rate_continuous(ch, FeedbackPolicy(vec)).value)

    coarse = _coarse_points(ch.n, config)
    coarse_values = np.array([objective(pt) for pt in coarse])
    if not np.any(np.isfinite(coarse_values)):
        _require_finite(float(np.max(coarse_values)), "feedback")
    coarse_best = coarse[int(np.argmax(coarse_values))]
    logger.debug("Feedback coarse stage evaluated %d points, best %.12g.", coarse.shape[0], coarse_values.max())

    iid = capacity_iid(ch, config)
    starts = [np.full(ch.n, iid.p), coarse_best]

    best = None
    for start in starts:
        refined = _coordinate_ascent(objective, start, config)
        if best is None or refined[1] > best[1]:
            best = refined

    point, value, sweeps, final_step, converged = best
    if not converged:
        logger.warning("Coordinate ascent stopped after %d sweeps without meeting the sweep tolerance.", sweeps)

    policy = FeedbackPolicy(point)
    capacity = mi_rate_continuous(ch, policy).value
    _require_finite(capacity, "feedback")

    result = CapacityResult(
        capacity=capacity,
        policy=policy,
        mode="feedback",
        iterations=sweeps,
        converged=converged,
        final_step=final_step,
        evaluations=objective.evaluations + iid.evaluations,
    )

    return result


def iid_diagonal_gap(ch: BirthDeathChannel, result: CapacityResult, config: Optional[OptimizerConfig] = None) -> float:
    """
        How far a feedback capacity exceeds the best IID rate of the same channel.
    """
    iid = capacity_iid(ch, config)
    gap = result.capacity - iid.capacity
    return gap


def verify_proposition_2(kin: ReceptorKinetics, n_max: int, config: Optional[OptimizerConfig] = None) -> ScalingReport:
    """
        Computes the IID capacity of n = 1..n_max independent receptors from the closed
        form and checks that C(n) = n * C(1) within 1e-10 relative, that the optimal p is
        the same for every n within 1e-9 and that the closed form agrees with the edge sum
        rate at the optimum.

        :param kin: The per receptor kinetics.
        :param n_max: The largest receptor count, at least 2.
        :param config: Optimizer settings.

        :raises: :class:`ConsistencyError` when an identity fails.
    """
    if isinstance(n_max, bool) or not isinstance(n_max, (int, np.integer)) or n_max < 2:
        raise ChannelValidationError(f"The scaling check needs n_max >= 2, got {n_max!r}.")

    report = ScalingReport(kin)

    single = None
    for n in range(1, int(n_max) + 1):
        ch = build_independent_channel(n, kin)
        result = capacity_iid(ch, config)

        edge_sum = mi_rate_continuous(ch, result.policy).value
        if not math.isclose(edge_sum, result.capacity, rel_tol=SCALING_RATIO_TOLERANCE, abs_tol=1e-12):
            raise ConsistencyError(
                f"The closed form IID rate {result.capacity!r} disagrees with the edge sum {edge_sum!r} at n={n}.")

        if single is None:
            single = result

        if single.capacity == 0.0:
            ratio = 1.0 if result.capacity == 0.0 else math.inf
        else:
            ratio = result.capacity / (n * single.capacity)

        if abs(ratio - 1.0) > SCALING_RATIO_TOLERANCE:
            raise ConsistencyError(f"C({n}) / ({n} * C(1)) = {ratio!r} is not 1 within {SCALING_RATIO_TOLERANCE}.")
        if abs(result.p - single.p) > SCALING_ARGMAX_TOLERANCE:
            raise ConsistencyError(f"The optimal p at n={n} is {result.p!r} but {single.p!r} at n=1.")

        report.rows.append(ScalingRow(n, result.capacity, result.p, ratio))

    return report

