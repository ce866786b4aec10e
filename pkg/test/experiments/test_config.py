# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0
import json

import pytest
import yaml

from logbsde_lab.errors import ConfigError
from logbsde_lab.experiments import Command, config_hash, load_config, parse_config, read_config_data


class TestParseConfig:
    def test_defaults_are_filled_in(self):
        config = parse_config({"command": "solve-bsde"})
        assert config.command == Command.SOLVE_BSDE
        assert config.scenario == "custom"
        assert config.seed == 0
        assert config.generator.kind == "zero"
        assert config.x0 == [0.0]
        resolved = config.resolved()
        assert resolved["command"] == "solve-bsde"
        assert resolved["schema_version"] == 1
        assert resolved["solver"]["n_paths"] == 10_000

    @pytest.mark.parametrize(
        "data, key_path",
        [
            ({"command": "solve-bsde", "solver": {"n_pathz": 3}}, "solver.n_pathz"),
            ({"command": "solve-bsde", "generator": {"kind": "quartic"}}, "generator.kind"),
            ({"command": "solve-bsde", "seed": -1}, "seed"),
            ({"command": "solve-bsde", "time_grid": {"n_steps": -1}}, "time_grid.n_steps"),
            ({"command": "fly"}, "command"),
            ({"command": "solve-bsde", "schema_version": 2}, "schema_version"),
        ],
    )
    def test_errors_name_the_key_path(self, data, key_path):
        with pytest.raises(ConfigError) as error:
            parse_config(data)
        assert error.value.key_path == key_path
        assert f"'{key_path}'" in str(error.value)

    def test_cross_field_errors(self):
        with pytest.raises(ConfigError, match="x0 has 2 entries"):
            parse_config({"command": "solve-bsde", "x0": [0.0, 1.0]})
        with pytest.raises(ConfigError, match="at least one case"):
            parse_config({"command": "check-assumptions"})
        with pytest.raises(ConfigError, match="calibration case"):
            parse_config({"command": "apriori-check", "apriori": {"cases": [{"label": "only"}]}})
        with pytest.raises(ConfigError, match="only available to pde-compare"):
            parse_config({"command": "solve-bsde", "generator": {"kind": "linear_log"}})

    def test_not_a_mapping(self):
        with pytest.raises(ConfigError, match="mapping"):
            parse_config(["solve-bsde"])

    def test_with_overrides(self):
        config = parse_config({"command": "solve-bsde"})
        assert config.with_overrides(seed=7).seed == 7
        with pytest.raises(ConfigError):
            config.with_overrides(seed=2**64)

    def test_unknown_command_name(self):
        with pytest.raises(ValueError, match="Unknown command"):
            Command.from_str("fly")
        assert Command.from_str("pde-compare") == Command.PDE_COMPARE
        assert str(Command.MOLLIFY_DEMO) == "mollify-demo"


class TestConfigHash:
    def test_is_stable(self):
        first = parse_config({"command": "solve-bsde", "seed": 3})
        second = parse_config({"seed": 3, "command": "solve-bsde"})
        assert config_hash(first) == config_hash(second)
        assert len(config_hash(first)) == 64

    def test_depends_on_the_experiment(self):
        base = parse_config({"command": "solve-bsde"})
        assert config_hash(base) != config_hash(base.with_overrides(seed=1))
        assert config_hash(base) != config_hash(base.with_overrides(scenario="other"))

    def test_ignores_the_output_directory(self):
        base = parse_config({"command": "solve-bsde"})
        assert config_hash(base) == config_hash(base.with_overrides(output_dir="/tmp/elsewhere"))

    def test_defaults_hash_like_explicit_values(self):
        implicit = parse_config({"command": "solve-bsde"})
        explicit = parse_config({"command": "solve-bsde", "solver": {"n_paths": 10_000}, "x0": [0.0]})
        assert config_hash(implicit) == config_hash(explicit)


class TestReadConfig:
    def test_yaml(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text(yaml.safe_dump({"command": "solve-bsde", "seed": 4}), encoding="utf-8")
        assert load_config(path).seed == 4

    def test_json(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"command": "mollify-demo", "mollify": {"schedule": [2, 4]}}), encoding="utf-8")
        assert load_config(path).mollify.schedule == [2.0, 4.0]

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="Cannot read configuration"):
            read_config_data(tmp_path / "missing.yaml")

    def test_malformed_yaml(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("command: [solve-bsde\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="Cannot read configuration"):
            read_config_data(path)

    def test_not_a_mapping(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- solve-bsde\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="must hold a mapping"):
            read_config_data(path)
