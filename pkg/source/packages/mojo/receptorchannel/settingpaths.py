"""
.. module:: settingpaths
    :platform: Darwin, Linux, Unix, Windows
    :synopsis: Module that contains the :class:`SettingPaths` enumeration of wellknown
               settings paths and the documented default settings layer.

.. moduleauthor:: Myron Walker <myron.walker@gmail.com>
"""

__author__ = "Myron Walker"
__copyright__ = "Copyright 2023, Myron W Walker"
__credits__ = []


from enum import Enum


class SettingPaths(str, Enum):

    # ========================== channel paths ==============================
    CHANNEL = "/channel"
    CHANNEL_N = "/channel/n"
    CHANNEL_KIND = "/channel/kind"
    CHANNEL_ALPHA_L = "/channel/alpha_L"
    CHANNEL_ALPHA_H = "/channel/alpha_H"
    CHANNEL_BETA = "/channel/beta"
    CHANNEL_UP_H = "/channel/up_H"
    CHANNEL_UP_L = "/channel/up_L"
    CHANNEL_DOWN = "/channel/down"

    # ========================== optimizer paths ==============================
    OPTIMIZER_SCAN_POINTS = "/optimizer/scan-points"
    OPTIMIZER_TOLERANCE = "/optimizer/tolerance"
    OPTIMIZER_GRID_POINTS = "/optimizer/grid-points"
    OPTIMIZER_GRID_MAX_DIMENSION = "/optimizer/grid-max-dimension"
    OPTIMIZER_LHS_SAMPLES = "/optimizer/lhs-samples"
    OPTIMIZER_MAX_DIMENSION = "/optimizer/max-dimension"
    OPTIMIZER_SWEEP_TOLERANCE = "/optimizer/sweep-tolerance"
    OPTIMIZER_MAX_SWEEPS = "/optimizer/max-sweeps"
    OPTIMIZER_SEED = "/optimizer/seed"

    # ========================== simulation paths ==============================
    SIMULATION_STEPS = "/simulation/steps"
    SIMULATION_TAU = "/simulation/tau"
    SIMULATION_SEED = "/simulation/seed"
    SIMULATION_BURN_IN = "/simulation/burn-in"
    SIMULATION_POLICY = "/simulation/policy"
    SIMULATION_BOOTSTRAP_BLOCKS = "/simulation/bootstrap-blocks"
    SIMULATION_BOOTSTRAP_REPLICATES = "/simulation/bootstrap-replicates"

    # ========================== run paths ==============================
    RUN_MODE = "/run/mode"

    # ========================== sweep paths ==============================
    SWEEP_GRID = "/sweep/grid"
    SWEEP_JOBS = "/sweep/jobs"
    SWEEP_TAU = "/sweep/tau"
    SWEEP_N_MAX = "/sweep/n-max"

    # ========================== output paths ==============================
    OUTPUT_FORMAT = "/output/format"
    OUTPUT_BITS = "/output/bits"


DEFAULT_SETTINGS = {
    "channel": {
        "kind": "independent",
    },
    "optimizer": {
        "scan-points": 64,
        "tolerance": 1e-9,
        "grid-points": 21,
        "grid-max-dimension": 3,
        "lhs-samples": 4096,
        "max-dimension": 16,
        "sweep-tolerance": 1e-12,
        "max-sweeps": 500,
        "seed": 20150101,
    },
    "simulation": {
        "steps": 1_000_000,
        "tau": 1e-4,
        "seed": 1,
        "burn-in": 10_000,
        "bootstrap-blocks": 50,
        "bootstrap-replicates": 200,
    },
    "run": {
        "mode": "iid",
    },
    "sweep": {
        "grid": [201],
        "jobs": 1,
        "n-max": 10,
    },
    "output": {
        "format": "text",
        "bits": False,
    },
}
