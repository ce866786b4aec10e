# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

import math
from copy import deepcopy
from typing import Any, Dict, List

from logbsde_lab.errors import ScenarioError
from logbsde_lab.experiments.config import ExperimentConfig, parse_config
from logbsde_lab.experiments.parameters import Command

_E = math.e

_LOG_DRIFT = {"kind": "log_drift", "params": {"K": 1.0}}

_BUMP = {"kind": "bump", "params": {"offset": 1.0, "height": 1.0, "width": 1.0}}

_FIELD_GRID = {"x_min": -2.0, "x_max": 2.0, "n_points": 21, "t_points": [0.0]}

_FD_MESH = {"nx": 801, "nt": 400, "x_min": -12.0, "x_max": 12.0, "theta": 0.5}


def _single_case(kind: str) -> Dict[str, Any]:
    return {"cases": [{"generator": {"kind": kind}, "expect": "pass", "label": kind}]}


_SCENARIOS: Dict[str, Dict[str, Any]] = {
    "example1-oracle": {
        "command": "solve-bsde",
        "generator": _LOG_DRIFT,
        "terminal": {"kind": "constant", "params": {"c": _E}},
        "diffusion": {"kind": "zero"},
        "time_grid": {"t0": 0.0, "T": 1.0, "n_steps": 1000},
        "solver": {"n_paths": 64, "scheme": "implicit", "theta": 0.5},
        "bsde": {"tolerance": 1e-3},
    },
    "example2-product": {"command": "check-assumptions", "assumptions": _single_case("gh_product")},
    "example3-state": {"command": "check-assumptions", "assumptions": _single_case("state_coupled")},
    "example4-monotone": {"command": "check-assumptions", "assumptions": _single_case("stochastic_monotone")},
    "example5-composite": {"command": "check-assumptions", "assumptions": _single_case("composite5")},
    "neveu-pde": {
        "command": "pde-compare",
        "generator": {"kind": "neveu", "params": {"K": 1.0}},
        "terminal": _BUMP,
        "diffusion": {"kind": "brownian", "params": {"sigma": math.sqrt(2.0)}},
        "time_grid": {"t0": 0.0, "T": 1.0, "n_steps": 100},
        "space_grid": _FIELD_GRID,
        "solver": {"n_paths": 10_000},
        "pde": {
            "candidate": "monte_carlo",
            "reference": "finite_difference",
            "budget": 0.05,
            "assumptions": {"delta": 1.0},
            "fd_mesh": _FD_MESH,
        },
    },
    "mollify-ladder": {
        "command": "mollify-demo",
        "generator": _LOG_DRIFT,
        "mollify": {
            "schedule": [4.0, 8.0, 16.0, 32.0],
            "n_samples": 10_000,
            "N": 1.0,
            "grid_density": 1001,
            "threshold": 1e-2,
        },
    },
    "stability-ladder": {
        "command": "stability-sweep",
        "generator": _LOG_DRIFT,
        "terminal": {"kind": "constant", "params": {"c": _E}},
        "diffusion": {"kind": "zero"},
        "time_grid": {"t0": 0.0, "T": 1.0, "n_steps": 200},
        "solver": {"n_paths": 64, "scheme": "implicit", "theta": 0.5},
        "stability": {"schedule": [4.0, 8.0, 16.0, 32.0], "p_prime": 1.5, "threshold": 1e-2, "reference": "oracle"},
    },
    "apriori-sweep": {
        "command": "apriori-check",
        "generator": {"kind": "log_drift", "params": {"K": 1.0, "p": 2.0}},
        "terminal": {"kind": "constant", "params": {"c": _E}},
        "diffusion": {"kind": "brownian"},
        "time_grid": {"t0": 0.0, "T": 1.0, "n_steps": 50},
        "solver": {"n_paths": 10_000},
        "apriori": {
            "cases": [{"label": "calibration", "generator": {"K": 1.0}, "terminal": {"c": _E}}]
            + [
                {"label": f"xi={xi_label},K={K:g}", "generator": {"K": K}, "terminal": {"c": xi}}
                for xi_label, xi in (("0.5", 0.5), ("1", 1.0), ("2", 2.0), ("e", _E))
                for K in (0.5, 1.0)
            ],
            "p": 2.0,
            "gamma": 0.2,
        },
    },
    "pde-heat-crosscheck": {
        "command": "pde-compare",
        "generator": {"kind": "zero"},
        "terminal": _BUMP,
        "diffusion": {"kind": "brownian", "params": {"sigma": math.sqrt(2.0)}},
        "time_grid": {"t0": 0.0, "T": 1.0, "n_steps": 100},
        "space_grid": _FIELD_GRID,
        "solver": {"n_paths": 10_000},
        "pde": {
            "candidate": "monte_carlo",
            "reference": "finite_difference",
            "budget": 0.05,
            "delta_prime": 1.0,
            "fd_mesh": _FD_MESH,
        },
    },
    "pde-degenerate": {
        "command": "pde-compare",
        "generator": {"kind": "neveu", "params": {"K": 1.0}},
        "terminal": {"kind": "constant", "params": {"c": _E}},
        "diffusion": {"kind": "ou", "params": {"theta": 1.0, "sigma": 0.0}},
        "time_grid": {"t0": 0.0, "T": 1.0, "n_steps": 1000},
        "space_grid": {"x_min": -2.0, "x_max": 2.0, "n_points": 21, "t_points": [0.0, 0.5]},
        "solver": {"n_paths": 16, "scheme": "implicit", "theta": 0.5},
        "pde": {
            "candidate": "monte_carlo",
            "reference": "characteristics",
            "budget": 1e-6,
            "node_budget": 1e-6,
            "steps_per_unit": 1000.0,
        },
    },
    "linearlog-pde": {
        "command": "pde-compare",
        "generator": {"kind": "linear_log", "params": {"A": [[0.5]], "B": [[[0.25]]], "C": [[1.0]], "K": 1.0}},
        "terminal": _BUMP,
        "diffusion": {"kind": "brownian", "params": {"sigma": 1.0}},
        "time_grid": {"t0": 0.0, "T": 1.0, "n_steps": 100},
        "space_grid": _FIELD_GRID,
        "solver": {"n_paths": 10_000},
        "pde": {
            "candidate": "monte_carlo",
            "reference": "finite_difference",
            "budget": 0.05,
            "assumptions": {"delta": 1.0},
            "fd_mesh": _FD_MESH,
        },
    },
    "zero": {
        "command": "solve-bsde",
        "generator": {"kind": "zero"},
        "terminal": {"kind": "constant", "params": {"c": 0.0}},
        "diffusion": {"kind": "zero"},
        "time_grid": {"t0": 0.0, "T": 1.0, "n_steps": 10},
        "solver": {"n_paths": 16},
    },
    "assumption-discrimination": {
        "command": "check-assumptions",
        "assumptions": {
            "cases": [
                {"generator": {"kind": kind}, "expect": "pass", "label": kind}
                for kind in ("log_drift", "gh_product", "state_coupled", "stochastic_monotone", "composite5")
            ]
            + [
                {"generator": {"kind": "cubic_violator"}, "expect": "fail", "label": "cubic_violator"},
                {"generator": {"kind": "kink_violator"}, "expect": "fail", "label": "kink_violator"},
            ]
        },
    },
    "forward-moments": {
        "command": "simulate-forward",
        "diffusion": {"kind": "brownian"},
        "time_grid": {"t0": 0.0, "T": 1.0, "n_steps": 1000},
        "forward": {"n_paths": 10_000, "kappa": 0.1, "reflection_tolerance": 0.05},
    },
}

_DEFAULTS: Dict[Command, str] = {
    Command.SIMULATE_FORWARD: "forward-moments",
    Command.CHECK_ASSUMPTIONS: "assumption-discrimination",
    Command.MOLLIFY_DEMO: "mollify-ladder",
    Command.SOLVE_BSDE: "example1-oracle",
    Command.APRIORI_CHECK: "apriori-sweep",
    Command.STABILITY_SWEEP: "stability-ladder",
    Command.PDE_COMPARE: "neveu-pde",
}


def list_scenarios() -> List[str]:
    """
    Ids of the built-in scenarios, in registration order.
    """
    return list(_SCENARIOS)


def scenario_data(name: str) -> Dict[str, Any]:
    """
    The raw configuration data of a built-in scenario, with its id filled in.

    :param name:
        Id of the scenario.
    :returns:
        A copy of its data.
    :raises ScenarioError:
        If there is no such scenario.
    """
    if name not in _SCENARIOS:
        raise ScenarioError(f"Unknown scenario '{name}'. Available scenarios are: {list_scenarios()}", scenario=name)
    return {"scenario": name, **deepcopy(_SCENARIOS[name])}


def get_scenario(name: str) -> ExperimentConfig:
    """
    The validated configuration of a built-in scenario.

    :param name:
        Id of the scenario.
    :returns:
        The configuration.
    :raises ScenarioError:
        If there is no such scenario.
    """
    return parse_config(scenario_data(name))


def default_scenario(command: Command) -> str:
    """
    Id of the scenario a subcommand runs when no configuration file is given.
    """
    return _DEFAULTS[command]
