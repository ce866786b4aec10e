# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from .config import SCHEMA_VERSION, ExperimentConfig, config_hash, load_config, parse_config, read_config_data
from .harness import ScenarioHarness
from .parameters import EXIT_CODES, Command, ResultRecord, StageOverrides, combined_exit_code
from .registry import default_scenario, get_scenario, list_scenarios, scenario_data
from .runner import OUTPUT_DIR_ENV, resolve_output_root, run_scenario
from .stages import StagePair, StagePlan, build_stage_plan

_all_ = [
    "SCHEMA_VERSION",
    "ExperimentConfig",
    "config_hash",
    "load_config",
    "parse_config",
    "read_config_data",
    "ScenarioHarness",
    "EXIT_CODES",
    "Command",
    "ResultRecord",
    "StageOverrides",
    "combined_exit_code",
    "default_scenario",
    "get_scenario",
    "list_scenarios",
    "scenario_data",
    "OUTPUT_DIR_ENV",
    "resolve_output_root",
    "run_scenario",
    "StagePair",
    "StagePlan",
    "build_stage_plan",
]
