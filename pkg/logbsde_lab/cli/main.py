# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

from haystack import logging

from logbsde_lab.errors import ConfigError, LabError
from logbsde_lab.experiments import (
    Command,
    ExperimentConfig,
    ResultRecord,
    combined_exit_code,
    default_scenario,
    get_scenario,
    list_scenarios,
    parse_config,
    read_config_data,
    resolve_output_root,
    run_scenario,
)

logger = logging.getLogger(__name__)

#: Exit code of runs that raised an error instead of producing verdicts.
ERROR_EXIT_CODE = 1


def _common_arguments() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument(
        "--seed",
        type=int,
        default=None,
        help="Master seed, an unsigned 64-bit integer overriding the one of the configuration.",
    )
    parent.add_argument(
        "--out",
        type=Path,
        default=None,
        help="Output root; each scenario writes below <out>/<scenario>/ (default: $LOGBSDE_OUTPUT_DIR or out/).",
    )
    parent.add_argument("--progress", action="store_true", help="Show progress bars over the cases of per-case runs.")
    return parent


def build_argument_parser() -> argparse.ArgumentParser:
    """
    The parser of the `logbsde` command line.
    """
    parser = argparse.ArgumentParser(
        prog="logbsde",
        description="Numerical laboratory for backward equations with logarithmic growth drivers.",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    common = _common_arguments()

    for command in Command:
        subparser = subparsers.add_parser(
            command.value,
            parents=[common],
            help=command.summary,
            description=f"Run a {command.value} experiment (default scenario: {default_scenario(command)}).",
        )
        subparser.add_argument(
            "--config",
            type=Path,
            default=None,
            help="YAML or JSON experiment configuration; without it the default scenario of the subcommand runs.",
        )

    run_parser = subparsers.add_parser("run", parents=[common], help="Run built-in scenarios by id.")
    run_parser.add_argument("scenarios", nargs="*", help="Ids of the scenarios to run, see `logbsde list`.")
    run_parser.add_argument("--all", action="store_true", help="Run every built-in scenario.")
    run_parser.add_argument("--config", type=Path, action="append", default=[], help="Also run this configuration.")
    run_parser.add_argument(
        "--jobs",
        type=int,
        default=1,
        help="Number of scenarios run concurrently, each in its own output directory (default: 1).",
    )

    subparsers.add_parser("list", help="List the built-in scenarios.")
    return parser


def config_for_command(command: Command, config_path: Optional[Path]) -> ExperimentConfig:
    """
    The configuration a subcommand runs.

    A configuration file may leave out the command, it is then taken from the subcommand.

    :raises ConfigError:
        If the file names another command or does not validate.
    """
    if config_path is None:
        return get_scenario(default_scenario(command))
    data = read_config_data(config_path)
    data.setdefault("command", command.value)
    if data["command"] != command.value:
        raise ConfigError(
            f"Configuration '{config_path}' is for '{data['command']}', not '{command.value}'.", key_path="command"
        )
    return parse_config(data)


def _run_all(configs: List[ExperimentConfig], args: argparse.Namespace, jobs: int) -> List[ResultRecord]:
    output_root = resolve_output_root(args.out)

    def run(config: ExperimentConfig) -> ResultRecord:
        return run_scenario(config, output_root=output_root, seed=args.seed, progress_bar=args.progress)

    names = [config.scenario for config in configs]
    if len(set(names)) != len(names):
        raise ConfigError(f"Scenario ids must be unique within one invocation, got {names}.", key_path="scenario")
    if jobs <= 1:
        return [run(config) for config in configs]
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(run, configs))


def _summary(records: List[ResultRecord]) -> str:
    parts = [f"{record.scenario}={record.verdict}" for record in records]
    return f"{len(records)} scenario(s): " + ", ".join(parts)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point of the `logbsde` command line.

    :param argv:
        Arguments without the program name, `sys.argv[1:]` by default.
    :returns:
        0 when every verdict passed, 2 on a failure, 3 when the rest is inconclusive and 1 on errors.
    """
    args = build_argument_parser().parse_args(argv)
    if args.subcommand == "list":
        for name in list_scenarios():
            print(f"{name}\t{get_scenario(name).command}")
        return 0

    try:
        if args.subcommand == "run":
            if args.jobs < 1:
                raise ConfigError(f"--jobs must be at least 1, got {args.jobs}.", key_path="jobs")
            names = list_scenarios() if args.all else list(args.scenarios)
            configs = [get_scenario(name) for name in names]
            configs += [parse_config(read_config_data(path)) for path in args.config]
            if not configs:
                raise ConfigError("Name at least one scenario, pass --all or pass --config.", key_path="scenarios")
            records = _run_all(configs, args, args.jobs)
        else:
            config = config_for_command(Command.from_str(args.subcommand), args.config)
            records = _run_all([config], args, 1)
    except LabError as error:
        logger.debug("Run failed", exc_info=error)
        message = " ".join(str(error).split())
        print(f"logbsde: error: {message}", file=sys.stderr)
        return ERROR_EXIT_CODE

    print(_summary(records))
    return combined_exit_code(records)


if __name__ == "__main__":
    sys.exit(main())
