# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0
import json

import pytest
import yaml

from logbsde_lab.cli import build_argument_parser, config_for_command, main
from logbsde_lab.errors import ConfigError
from logbsde_lab.experiments import OUTPUT_DIR_ENV, Command, list_scenarios, scenario_data


def _write(path, data):
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return path


class TestArgumentParser:
    def test_every_command_is_a_subcommand(self):
        parser = build_argument_parser()
        for command in Command:
            args = parser.parse_args([command.value, "--seed", "3"])
            assert args.subcommand == command.value
            assert args.seed == 3
            assert args.config is None

    def test_run_arguments(self):
        args = build_argument_parser().parse_args(["run", "zero", "example1-oracle", "--jobs", "2", "--progress"])
        assert args.scenarios == ["zero", "example1-oracle"]
        assert args.jobs == 2
        assert args.progress

    def test_subcommand_is_required(self):
        with pytest.raises(SystemExit):
            build_argument_parser().parse_args([])


class TestConfigForCommand:
    def test_default_scenario(self):
        assert config_for_command(Command.SOLVE_BSDE, None).scenario == "example1-oracle"

    def test_command_is_taken_from_the_subcommand(self, tmp_path):
        data = scenario_data("zero")
        del data["command"]
        config = config_for_command(Command.SOLVE_BSDE, _write(tmp_path / "zero.yaml", data))
        assert config.command == Command.SOLVE_BSDE

    def test_command_mismatch(self, tmp_path):
        path = _write(tmp_path / "zero.yaml", scenario_data("zero"))
        with pytest.raises(ConfigError, match="is for 'solve-bsde', not 'pde-compare'") as error:
            config_for_command(Command.PDE_COMPARE, path)
        assert error.value.key_path == "command"


class TestMain:
    def test_list(self, capsys):
        assert main(["list"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == len(list_scenarios())
        assert "zero\tsolve-bsde" in lines

    def test_run(self, tmp_path, capsys):
        assert main(["run", "zero", "--out", str(tmp_path)]) == 0
        assert "1 scenario(s): zero=pass" in capsys.readouterr().out
        result = json.loads((tmp_path / "zero" / "result.json").read_text(encoding="utf-8"))
        assert result["verdict"] == "pass"

    def test_output_root_from_the_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
        assert main(["run", "zero"]) == 0
        assert (tmp_path / "zero" / "result.json").is_file()

    def test_subcommand_with_config(self, tmp_path):
        data = {**scenario_data("zero"), "scenario": "zero-from-file"}
        path = _write(tmp_path / "config.yaml", data)
        assert main(["solve-bsde", "--config", str(path), "--out", str(tmp_path / "out")]) == 0
        assert (tmp_path / "out" / "zero-from-file" / "config.yaml").is_file()

    def test_concurrent_jobs(self, tmp_path):
        path = _write(tmp_path / "config.yaml", {**scenario_data("zero"), "scenario": "zero-copy"})
        assert main(["run", "zero", "--config", str(path), "--jobs", "2", "--out", str(tmp_path / "out")]) == 0
        first = json.loads((tmp_path / "out" / "zero" / "result.json").read_text(encoding="utf-8"))
        second = json.loads((tmp_path / "out" / "zero-copy" / "result.json").read_text(encoding="utf-8"))
        assert first["metrics"] == second["metrics"]

    def test_failing_verdict_exits_with_2(self, tmp_path):
        data = {
            **scenario_data("example1-oracle"),
            "scenario": "coarse",
            "time_grid": {"t0": 0.0, "T": 1.0, "n_steps": 2},
            "solver": {"n_paths": 2, "scheme": "explicit"},
            "bsde": {"tolerance": 1e-9},
        }
        path = _write(tmp_path / "coarse.yaml", data)
        assert main(["solve-bsde", "--config", str(path), "--out", str(tmp_path / "out")]) == 2

    @pytest.mark.parametrize(
        "argv, message",
        [
            (["run", "nope"], "Unknown scenario 'nope'"),
            (["run"], "Name at least one scenario"),
            (["run", "zero", "--jobs", "0"], "--jobs must be at least 1"),
            (["run", "zero", "zero"], "must be unique"),
            (["run", "zero", "--seed", "-1"], "Invalid configuration at 'seed'"),
        ],
    )
    def test_errors_exit_with_1(self, argv, message, tmp_path, capsys):
        assert main([*argv, "--out", str(tmp_path)]) == 1
        assert message in capsys.readouterr().err
