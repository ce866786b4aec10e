# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

import os
from pathlib import Path
from typing import Optional, Union

from haystack import logging

from logbsde_lab.experiments.config import ExperimentConfig
from logbsde_lab.experiments.harness import ScenarioHarness
from logbsde_lab.experiments.parameters import ResultRecord, StageOverrides

logger = logging.getLogger(__name__)

#: Environment variable overriding the output root when none is passed explicitly.
OUTPUT_DIR_ENV = "LOGBSDE_OUTPUT_DIR"

DEFAULT_OUTPUT_ROOT = "out"


def resolve_output_root(out: Optional[Union[str, Path]] = None, config: Optional[ExperimentConfig] = None) -> Path:
    """
    The directory scenario outputs are written below.

    An explicit directory wins over the `LOGBSDE_OUTPUT_DIR` environment variable, which wins over the one of the
    configuration. Without any of them outputs go to `out/`.
    """
    if out is not None:
        return Path(out)
    from_env = os.environ.get(OUTPUT_DIR_ENV)
    if from_env:
        return Path(from_env)
    if config is not None and config.output_dir:
        return Path(config.output_dir)
    return Path(DEFAULT_OUTPUT_ROOT)


def run_scenario(
    config: ExperimentConfig,
    *,
    output_root: Optional[Union[str, Path]] = None,
    seed: Optional[int] = None,
    overrides: Optional[StageOverrides] = None,
    write: bool = True,
    progress_bar: bool = False,
) -> ResultRecord:
    """
    Run one experiment and write its outputs to `<output root>/<scenario>/`.

    :param config:
        The validated configuration.
    :param output_root:
        Directory the scenario directory is created in, see `resolve_output_root`.
    :param seed:
        Master seed replacing the one of the configuration.
    :param overrides:
        Component init parameter overrides of the two stages.
    :param write:
        Whether to write the outputs at all.
    :param progress_bar:
        Whether to show a progress bar over the cases of a per-case run.
    :returns:
        The record of the run.
    :raises ConfigError:
        If the seed override does not validate.
    :raises ScenarioError:
        If a stage fails.
    """
    if seed is not None:
        config = config.with_overrides(seed=seed)
    output_dir = resolve_output_root(output_root, config) / config.scenario if write else None
    record = ScenarioHarness(config, progress_bar=progress_bar).run(output_dir=output_dir, overrides=overrides)
    logger.debug("Record of {scenario}: {metrics}", scenario=config.scenario, metrics=record.metrics)
    return record
