"""
.. module:: cli
    :platform: Darwin, Linux, Unix, Windows
    :synopsis: Module that contains the 'receptor-capacity' command line front end with the
               'capacity', 'sweep', 'simulate' and 'scaling' commands.

    Settings are layered, command line flags override the fields of a '--spec' document,
    which override the built in defaults.  Exit codes are 0 for success, 1 for usage and
    validation errors and 2 for numerical or consistency failures, including optimizer
    runs that stop without converging (the partial result is still written).

.. moduleauthor:: Myron Walker <myron.walker@gmail.com>
"""

__author__ = "Myron Walker"
__copyright__ = "Copyright 2023, Myron W Walker"
__credits__ = []


from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import argparse
import json
import logging
import math
import sys
import time

from dataclasses import dataclass, field
from multiprocessing import Pool

import numpy as np

from mojo.receptorchannel.capacity import (
    CapacityResult,
    OptimizerConfig,
    capacity_feedback,
    capacity_iid,
    iid_diagonal_gap,
    verify_proposition_2
)
from mojo.receptorchannel.channelmodel import (
    BirthDeathChannel,
    ChannelKind,
    FeedbackPolicy,
    check_step_size
)
from mojo.receptorchannel.channelspec import (
    channel_from_settings,
    channel_kind_from_settings,
    kinetics_from_settings,
    load_spec_document
)
from mojo.receptorchannel.entropyrates import mi_rate_continuous, mi_rate_discrete
from mojo.receptorchannel.exceptions import (
    ConsistencyError,
    IrreducibilityError,
    ReceptorChannelError,
    SpecificationError
)
from mojo.receptorchannel.runmanifest import RunManifest
from mojo.receptorchannel.settingpaths import DEFAULT_SETTINGS, SettingPaths
from mojo.receptorchannel.settingsmap import SettingsMap
from mojo.receptorchannel.simulation import (
    SimulationConfig,
    estimate_mi,
    occupancy_chi_squared,
    save_trajectory_npz,
    simulate_trajectory,
    write_counts_csv,
    write_trajectory_csv
)

logger = logging.getLogger(__name__)

EXIT_SUCCESS = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

RUN_MODES = ("iid", "feedback")
OUTPUT_FORMATS = ("text", "csv", "json")

SIGNIFICANT_DIGITS = 12

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


class SettingsArgumentParser(argparse.ArgumentParser):
    """
        Argument parser that reports usage errors as :class:`SpecificationError` so they
        share the exit code of every other validation error.
    """

    def error(self, message: str):
        raise SpecificationError(f"{self.prog}: {message}")


@dataclass
class CommandReport:
    """
        The :class:`CommandReport` holds what a command computed in the forms the output
        formats need: a table for CSV, labeled lines for text and a result document for
        JSON.
    """

    header: List[str]
    rows: List[Sequence[Any]]
    summary: List[Tuple[str, str]] = field(default_factory=list)
    document: Dict[str, Any] = field(default_factory=dict)
    seeds: Dict[str, int] = field(default_factory=dict)
    exit_code: int = EXIT_SUCCESS
    table_is_text: bool = False


def format_value(val: Any) -> str:
    """
        Formats a CSV cell, floats with 12 significant digits.
    """
    if isinstance(val, (bool, np.bool_)):
        rtnval = "true" if val else "false"
    elif isinstance(val, (int, np.integer)):
        rtnval = str(int(val))
    elif isinstance(val, (float, np.floating)):
        rtnval = f"{float(val):.{SIGNIFICANT_DIGITS}g}"
    else:
        rtnval = str(val)
    return rtnval


def _float_list(text: str) -> List[float]:
    try:
        rtnval = [float(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")
    return rtnval


def _int_list(text: str) -> List[int]:
    try:
        rtnval = [int(part) for part in text.replace("x", ",").split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")
    return rtnval


def _add_common_arguments(parser: argparse.ArgumentParser):

    chgroup = parser.add_argument_group("channel")
    chgroup.add_argument("--spec", metavar="FILE", help="JSON specification document or run manifest.")
    chgroup.add_argument("--kind", choices=[k.value for k in ChannelKind], help="Channel kind.")
    chgroup.add_argument("--n", type=int, help="Number of receptors.")
    chgroup.add_argument("--alpha-l", dest="alpha_l", type=float, help="Binding rate under the low input (Hz).")
    chgroup.add_argument("--alpha-h", dest="alpha_h", type=float, help="Binding rate under the high input (Hz).")
    chgroup.add_argument("--beta", type=float, help="Unbinding rate (Hz).")

    outgroup = parser.add_argument_group("output")
    outgroup.add_argument("--output", metavar="FILE", help="Write the report to FILE instead of stdout.")
    outgroup.add_argument("--format", dest="output_format", choices=OUTPUT_FORMATS, help="Report format.")
    outgroup.add_argument("--bits", action="store_true", default=None,
                          help="Display information in bits instead of nats.")
    outgroup.add_argument("--log-level", default="WARNING",
                          choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"], help="Logging level on stderr.")
    outgroup.add_argument("-v", "--verbose", action="store_true", help="Shorthand for --log-level INFO.")

    return


def create_parser() -> argparse.ArgumentParser:
    """
        Creates the argument parser of the 'receptor-capacity' command.
    """
    parser = SettingsArgumentParser(
        prog="receptor-capacity",
        description="Capacities and mutual information rates of ligand-receptor birth-death channels.")

    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=SettingsArgumentParser)
    subparsers.required = True

    cap_parser = subparsers.add_parser("capacity", help="Compute the IID or feedback capacity.")
    _add_common_arguments(cap_parser)
    cap_parser.add_argument("--mode", choices=RUN_MODES, help="Input policy family.")

    sweep_parser = subparsers.add_parser("sweep", help="Evaluate the information rate over a grid of policies.")
    _add_common_arguments(sweep_parser)
    sweep_parser.add_argument("--mode", choices=RUN_MODES,
                              help="'iid' sweeps p in one dimension, 'feedback' sweeps (p_0, p_1) for n=2.")
    sweep_parser.add_argument("--grid", type=_int_list, metavar="N[,N]", help="Points per axis.")
    sweep_parser.add_argument("--tau", type=float, help="Evaluate the finite time step rate divided by tau.")
    sweep_parser.add_argument("--jobs", type=int, help="Worker processes evaluating the grid.")

    sim_parser = subparsers.add_parser("simulate", help="Run the Monte Carlo oracle.")
    _add_common_arguments(sim_parser)
    sim_parser.add_argument("--mode", choices=RUN_MODES, help="Optimal policy family used without --policy.")
    sim_parser.add_argument("--policy", type=_float_list, metavar="P[,P...]",
                            help="High input probabilities p_0..p_{n-1}, one value for an IID policy.")
    sim_parser.add_argument("--tau", type=float, help="Time step in seconds.")
    sim_parser.add_argument("--steps", type=int, help="Number of simulated steps.")
    sim_parser.add_argument("--seed", type=int, help="Seed of the Philox generator.")
    sim_parser.add_argument("--burn-in", dest="burn_in", type=int, help="Transitions discarded by the estimator.")
    sim_parser.add_argument("--save-trajectory", metavar="FILE",
                            help="Write the trajectory, as .npz for that suffix and CSV otherwise.")
    sim_parser.add_argument("--save-counts", metavar="FILE", help="Write the transition counts as CSV.")

    scale_parser = subparsers.add_parser("scaling", help="Check C(n) = n C(1) for independent receptors.")
    _add_common_arguments(scale_parser)
    scale_parser.add_argument("--n-max", dest="n_max", type=int, help="Largest receptor count.")

    return parser


def _flag_layer(args: argparse.Namespace) -> dict:
    """
        The settings layer of the command line flags.  Flags that were not given are None
        and do not shadow lower layers.
    """
    def flag(name: str) -> Any:
        return getattr(args, name, None)

    layer = {
        "channel": {
            "kind": flag("kind"),
            "n": flag("n"),
            "alpha_L": flag("alpha_l"),
            "alpha_H": flag("alpha_h"),
            "beta": flag("beta"),
        },
        "run": {
            "mode": flag("mode"),
        },
        "output": {
            "format": flag("output_format"),
            "bits": flag("bits"),
        },
    }

    if args.command == "sweep":
        layer["sweep"] = {"grid": flag("grid"), "tau": flag("tau"), "jobs": flag("jobs")}
    elif args.command == "simulate":
        layer["simulation"] = {
            "tau": flag("tau"),
            "steps": flag("steps"),
            "seed": flag("seed"),
            "burn-in": flag("burn_in"),
            "policy": flag("policy"),
        }
    elif args.command == "scaling":
        layer["sweep"] = {"n-max": flag("n_max")}

    return layer


def create_settings(args: argparse.Namespace) -> SettingsMap:
    """
        The effective settings of a command line: flags, then the '--spec' document, then
        the defaults.
    """
    document = None
    if args.spec is not None:
        document = load_spec_document(args.spec)

    settings = SettingsMap(_flag_layer(args), document, DEFAULT_SETTINGS)
    return settings


def _run_mode(settings: SettingsMap) -> str:
    mode = settings.lookup(SettingPaths.RUN_MODE)
    if mode not in RUN_MODES:
        raise SpecificationError(f"Unknown mode {mode!r}, expected one of {', '.join(RUN_MODES)}",
                                 field=SettingPaths.RUN_MODE.value)
    return mode


def _information_unit(settings: SettingsMap) -> Tuple[str, float]:
    if settings.lookup(SettingPaths.OUTPUT_BITS):
        rtnval = ("bits", 1.0 / math.log(2.0))
    else:
        rtnval = ("nats", 1.0)
    return rtnval


def _optimal(ch: BirthDeathChannel, mode: str, config: OptimizerConfig) -> CapacityResult:
    if mode == "feedback":
        result = capacity_feedback(ch, config)
    else:
        result = capacity_iid(ch, config)
    return result


def cmd_capacity(settings: SettingsMap) -> CommandReport:
    """
        Computes the IID or feedback capacity of the channel in the continuous time limit.
    """
    ch = channel_from_settings(settings)
    mode = _run_mode(settings)
    config = OptimizerConfig.from_settings(settings)
    unit, scale = _information_unit(settings)

    result = _optimal(ch, mode, config)
    policy = result.policy.p.tolist()

    header = ["mode", f"capacity_{unit}_per_sec"]
    header.extend(f"p_{k}" for k in range(ch.n))
    header.extend(["iterations", "converged", "final_step"])
    row = [mode, result.capacity * scale, *policy, result.iterations, result.converged, result.final_step]

    summary = [
        ("capacity", f"{format_value(result.capacity * scale)} {unit}/s"),
        ("mode", mode),
    ]
    if result.p is not None:
        summary.append(("argmax p", format_value(result.p)))
    summary.append(("argmax policy", "(" + ", ".join(format_value(v) for v in policy) + ")"))

    document = {
        "mode": mode,
        "unit": f"{unit}/s",
        "capacity": result.capacity * scale,
        "p": result.p,
        "policy": policy,
        "iterations": result.iterations,
        "converged": result.converged,
        "final_step": result.final_step,
        "evaluations": result.evaluations,
    }

    if mode == "feedback":
        gap = iid_diagonal_gap(ch, result, config)
        summary.append(("gain over IID", f"{format_value(gap * scale)} {unit}/s"))
        document["gain_over_iid"] = gap * scale

    summary.extend([
        ("iterations", str(result.iterations)),
        ("evaluations", str(result.evaluations)),
        ("converged", format_value(result.converged)),
        ("final step", format_value(result.final_step)),
    ])

    report = CommandReport(header, [row], summary, document, seeds={"optimizer": config.seed})

    if not result.converged:
        logger.error("The %s optimizer did not converge, the reported capacity is a partial result.", mode)
        report.exit_code = EXIT_NUMERICAL

    return report


def _sweep_point(task: Tuple[BirthDeathChannel, List[float], Optional[float]]) -> float:
    ch, values, tau = task
    policy = FeedbackPolicy.from_values(ch.n, values)
    try:
        if tau is None:
            rtnval = mi_rate_continuous(ch, policy).value
        else:
            rtnval = mi_rate_discrete(ch, policy, tau).per_second()
    except IrreducibilityError:
        rtnval = math.nan
    return rtnval


def _sweep_axes(ch: BirthDeathChannel, mode: str, grid: Sequence[int]) -> List[np.ndarray]:

    if isinstance(grid, int):
        grid = [grid]
    if any(isinstance(g, bool) or not isinstance(g, int) or g < 1 for g in grid):
        raise SpecificationError(f"Grid point counts must be positive integers, got {grid!r}",
                                 field=SettingPaths.SWEEP_GRID.value)

    if mode == "feedback":
        if ch.n != 2:
            raise SpecificationError(
                f"The (p_0, p_1) sweep needs n=2 but the channel has n={ch.n}; use '--mode iid' for a 1-D sweep over p",
                field=SettingPaths.CHANNEL_N.value)
        if len(grid) == 1:
            grid = [grid[0], grid[0]]
        if len(grid) != 2:
            raise SpecificationError(f"A 2-D sweep takes one or two point counts, got {grid!r}",
                                     field=SettingPaths.SWEEP_GRID.value)
    elif len(grid) != 1:
        raise SpecificationError(f"A 1-D sweep takes one point count, got {grid!r}",
                                 field=SettingPaths.SWEEP_GRID.value)

    axes = [np.linspace(0.0, 1.0, count) for count in grid]
    return axes


def cmd_sweep(settings: SettingsMap) -> CommandReport:
    """
        Evaluates the information rate on a row major grid of policies, the 1-D IID sweep
        over p or, for two receptors, the 2-D sweep over (p_0, p_1).
    """
    ch = channel_from_settings(settings)
    mode = _run_mode(settings)
    unit, scale = _information_unit(settings)

    grid = settings.lookup(SettingPaths.SWEEP_GRID)
    tau = settings.lookup(SettingPaths.SWEEP_TAU, raise_error=False)
    jobs = settings.lookup(SettingPaths.SWEEP_JOBS)
    if isinstance(jobs, bool) or not isinstance(jobs, int) or jobs < 1:
        raise SpecificationError(f"The job count must be a positive integer, got {jobs!r}",
                                 field=SettingPaths.SWEEP_JOBS.value)
    if tau is not None:
        check_step_size(ch, tau)

    axes = _sweep_axes(ch, mode, grid)
    if len(axes) == 2:
        points = [[p0, p1] for p0 in axes[0].tolist() for p1 in axes[1].tolist()]
        header = ["p_0", "p_1", f"mi_{unit}_per_sec"]
    else:
        points = [[p] for p in axes[0].tolist()]
        header = ["p", f"mi_{unit}_per_sec"]

    tasks = [(ch, pt, tau) for pt in points]
    if jobs > 1:
        with Pool(jobs) as pool:
            values = pool.map(_sweep_point, tasks, chunksize=max(1, len(tasks) // (4 * jobs)))
    else:
        values = [_sweep_point(task) for task in tasks]

    rows = [[*pt, val * scale] for pt, val in zip(points, values)]

    finite = [idx for idx, val in enumerate(values) if not math.isnan(val)]
    document = {"mode": mode, "unit": f"{unit}/s", "tau": tau, "points": len(points)}
    if finite:
        best = max(finite, key=lambda idx: values[idx])
        logger.info("Grid maximum %.12g %s/s at %s.", values[best] * scale, unit, points[best])
        document["maximum"] = {"policy": points[best], "value": values[best] * scale}

    report = CommandReport(header, rows, document=document, table_is_text=True)

    return report


def _simulation_policy(ch: BirthDeathChannel, settings: SettingsMap) -> FeedbackPolicy:
    values = settings.lookup(SettingPaths.SIMULATION_POLICY, raise_error=False)
    if values is not None:
        if isinstance(values, (int, float)):
            values = [values]
        policy = FeedbackPolicy.from_values(ch.n, values)
    else:
        mode = _run_mode(settings)
        policy = _optimal(ch, mode, OptimizerConfig.from_settings(settings)).policy
        logger.info("Simulating the %s capacity achieving policy %s.", mode, policy.p.tolist())
    return policy


def cmd_simulate(settings: SettingsMap, save_trajectory: Optional[str] = None,
                 save_counts: Optional[str] = None) -> CommandReport:
    """
        Runs the Monte Carlo oracle and reports the estimate next to the exact finite time
        step rate.
    """
    ch = channel_from_settings(settings)
    config = SimulationConfig.from_settings(settings)
    unit, scale = _information_unit(settings)

    policy = _simulation_policy(ch, settings)
    analytic = mi_rate_discrete(ch, policy, config.tau).per_second()

    trajectory = simulate_trajectory(ch, policy, config)
    estimate = estimate_mi(trajectory)
    occupancy = occupancy_chi_squared(trajectory)

    if save_trajectory is not None:
        if save_trajectory.endswith(".npz"):
            save_trajectory_npz(trajectory, save_trajectory)
        else:
            write_trajectory_csv(trajectory, save_trajectory)
    if save_counts is not None:
        write_counts_csv(estimate, save_counts)

    deviation = estimate.mi_per_second - analytic
    if estimate.stderr > 0 and abs(deviation) > 3.0 * estimate.stderr:
        logger.warning("The estimate is %.3g standard errors from the exact rate.", deviation / estimate.stderr)

    header = [f"estimate_{unit}_per_sec", "stderr", f"analytic_{unit}_per_sec", "transitions",
              "chi2_statistic", "chi2_pvalue", "chi2_thin"]
    row = [estimate.mi_per_second * scale, estimate.stderr * scale, analytic * scale, estimate.transitions,
           occupancy.statistic, occupancy.pvalue, occupancy.thin]

    summary = [
        ("estimate", f"{format_value(estimate.mi_per_second * scale)} +/- "
                     f"{format_value(estimate.stderr * scale)} {unit}/s"),
        ("analytic", f"{format_value(analytic * scale)} {unit}/s"),
        ("policy", "(" + ", ".join(format_value(v) for v in policy.p.tolist()) + ")"),
        ("transitions", str(estimate.transitions)),
        ("occupancy chi2", f"{format_value(occupancy.statistic)} (p={format_value(occupancy.pvalue)}, "
                           f"thin={occupancy.thin})"),
    ]
    if estimate.unvisited_rows:
        summary.append(("unvisited rows", str(estimate.unvisited_rows)))

    document = {
        "unit": f"{unit}/s",
        "estimate": estimate.mi_per_second * scale,
        "stderr": estimate.stderr * scale,
        "analytic": analytic * scale,
        "policy": policy.p.tolist(),
        "transitions": estimate.transitions,
        "unvisited_rows": [list(r) for r in estimate.unvisited_rows],
        "occupancy": {"statistic": occupancy.statistic, "pvalue": occupancy.pvalue,
                      "thin": occupancy.thin, "samples": occupancy.samples},
    }

    report = CommandReport(header, [row], summary, document, seeds={"simulation": config.seed})

    return report


def cmd_scaling(settings: SettingsMap) -> CommandReport:
    """
        Tabulates the IID capacity of n = 1..n_max independent receptors against n times
        the single receptor capacity.
    """
    kind = channel_kind_from_settings(settings)
    if kind != ChannelKind.INDEPENDENT:
        raise SpecificationError(f"The scaling table is defined for independent receptors, got kind {kind.value!r}",
                                 field=SettingPaths.CHANNEL_KIND.value)

    kin = kinetics_from_settings(settings)
    config = OptimizerConfig.from_settings(settings)
    unit, scale = _information_unit(settings)

    n_max = settings.lookup(SettingPaths.SWEEP_N_MAX)
    if isinstance(n_max, bool) or not isinstance(n_max, int):
        raise SpecificationError(f"Expected an integer, got {n_max!r}", field=SettingPaths.SWEEP_N_MAX.value)

    scaling = verify_proposition_2(kin, n_max, config)

    header = ["n", "capacity", "ratio_to_n_times_c1"]
    rows = [[row.n, row.capacity * scale, row.ratio_to_n_times_c1] for row in scaling.rows]

    summary = [("unit", f"{unit}/s"), ("argmax p", format_value(scaling.rows[0].argmax))]
    for row in scaling.rows:
        summary.append((f"n={row.n}", f"{format_value(row.capacity * scale)} "
                                      f"(ratio {format_value(row.ratio_to_n_times_c1)})"))

    document = {
        "unit": f"{unit}/s",
        "rows": [{"n": row.n, "capacity": row.capacity * scale, "argmax": row.argmax,
                  "ratio_to_n_times_c1": row.ratio_to_n_times_c1} for row in scaling.rows],
    }

    report = CommandReport(header, rows, summary, document, seeds={"optimizer": config.seed})

    return report


def render_report(report: CommandReport, manifest: RunManifest, output_format: str) -> str:
    """
        Renders a report with its manifest in the requested output format.
    """
    if output_format == "json":
        doc = {
            "manifest": manifest.to_document(),
            "result": report.document,
            "table": {"header": report.header, "rows": report.rows},
        }
        text = _json_dumps(doc) + "\n"
    elif output_format == "csv" or report.table_is_text:
        lines = manifest.comment_lines()
        lines.append(",".join(report.header))
        lines.extend(",".join(format_value(val) for val in row) for row in report.rows)
        text = "\n".join(lines) + "\n"
    else:
        width = max(len(label) for label, _ in report.summary)
        lines = [f"{label + ':':<{width + 1}} {val}" for label, val in report.summary]
        lines.append(f"{'duration:':<{width + 1}} {manifest.duration:.3f} s")
        text = "\n".join(lines) + "\n"

    return text


def _json_dumps(doc: dict) -> str:
    def default(obj):
        if isinstance(obj, np.generic):
            return obj.item()
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")

    text = json.dumps(doc, indent=4, sort_keys=True, default=default)
    return text


COMMANDS: Dict[str, Callable[..., CommandReport]] = {
    "capacity": cmd_capacity,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "scaling": cmd_scaling,
}


def configure_logging(args: argparse.Namespace):
    level = "INFO" if args.verbose and args.log_level == "WARNING" else args.log_level
    logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT, stream=sys.stderr)
    return


def run_command(args: argparse.Namespace) -> int:
    """
        Runs a parsed command line and writes its report.

        :returns: The exit code.
    """
    settings = create_settings(args)

    output_format = settings.lookup(SettingPaths.OUTPUT_FORMAT)
    if output_format not in OUTPUT_FORMATS:
        raise SpecificationError(f"Unknown output format {output_format!r}", field=SettingPaths.OUTPUT_FORMAT.value)

    start = time.perf_counter()

    command = COMMANDS[args.command]
    if args.command == "simulate":
        report = command(settings, save_trajectory=args.save_trajectory, save_counts=args.save_counts)
    else:
        report = command(settings)

    manifest = RunManifest(args.command, settings.flatten(), seeds=report.seeds)
    manifest.duration = time.perf_counter() - start
    logger.info("The %s command finished in %.3f s.", args.command, manifest.duration)

    text = render_report(report, manifest, output_format)

    if args.output is not None:
        with open(args.output, "w", newline="") as ofile:
            ofile.write(text)
    else:
        sys.stdout.write(text)

    return report.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
        Entry point of the 'receptor-capacity' command.

        :param argv: The arguments, defaults to sys.argv[1:].

        :returns: The exit code.
    """
    parser = create_parser()

    try:
        args = parser.parse_args(argv)
    except SpecificationError as serr:
        sys.stderr.write(f"{serr}\n")
        return EXIT_USAGE

    configure_logging(args)

    try:
        exit_code = run_command(args)
    except ConsistencyError as cerr:
        logger.error("Numerical consistency failure: %s", cerr)
        exit_code = EXIT_NUMERICAL
    except ReceptorChannelError as rerr:
        sys.stderr.write(f"receptor-capacity {args.command}: error: {rerr}\n")
        exit_code = EXIT_USAGE
    except OSError as oserr:
        sys.stderr.write(f"receptor-capacity {args.command}: error: {oserr}\n")
        exit_code = EXIT_USAGE

    return exit_code
