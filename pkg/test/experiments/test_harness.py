# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0
import json
from pathlib import Path

import pytest
from haystack import Pipeline

from logbsde_lab.dataclasses import Verdict
from logbsde_lab.errors import ScenarioError
from logbsde_lab.experiments import (
    OUTPUT_DIR_ENV,
    Command,
    ResultRecord,
    ScenarioHarness,
    StageOverrides,
    combined_exit_code,
    config_hash,
    get_scenario,
    parse_config,
    resolve_output_root,
    run_scenario,
    scenario_data,
)


def _record(*verdicts):
    return ResultRecord(
        scenario="s",
        command=Command.SOLVE_BSDE,
        config_hash="0" * 64,
        seed=0,
        verdicts={f"c{index}": verdict for index, verdict in enumerate(verdicts)},
    )


class TestResultRecord:
    def test_exit_codes(self):
        assert _record().exit_code == 0
        assert _record(Verdict.PASS, Verdict.INCONCLUSIVE).exit_code == 3
        assert _record(Verdict.INCONCLUSIVE, Verdict.FAIL).exit_code == 2
        assert combined_exit_code([_record(Verdict.PASS), _record(Verdict.INCONCLUSIVE)]) == 3
        assert combined_exit_code([_record(Verdict.PASS), _record(Verdict.FAIL)]) == 2

    def test_to_dict(self):
        data = _record(Verdict.PASS, Verdict.FAIL).to_dict()
        assert data["command"] == "solve-bsde"
        assert data["verdicts"] == {"c0": "pass", "c1": "fail"}
        assert data["verdict"] == "fail"


class TestScenarioHarness:
    def test_run_zero(self, tmp_path):
        config = get_scenario("zero")
        record = ScenarioHarness(config).run(output_dir=tmp_path)

        assert record.verdict == Verdict.PASS
        assert record.verdicts == {"checker": Verdict.PASS}
        assert record.metrics["checker.y0"] == 0.0
        assert record.metrics["checker.oracle_y0"] == 0.0
        assert record.config_hash == config_hash(config)
        for name in ("config.yaml", "solve_pipeline.yaml", "check_pipeline.yaml", "result.json"):
            assert (tmp_path / name).is_file()
        result = json.loads((tmp_path / "result.json").read_text(encoding="utf-8"))
        assert result["verdict"] == "pass"
        assert result["artifacts"]["result"] == str(tmp_path / "result.json")

    def test_without_output_dir_writes_nothing(self):
        record = ScenarioHarness(get_scenario("zero")).run()
        assert record.artifacts == {}

    def test_serialized_stages_round_trip(self):
        record = ScenarioHarness(get_scenario("zero")).run()
        assert "builder" in Pipeline.loads(record.solve_pipeline).to_dict()["components"]
        assert "checker" in Pipeline.loads(record.check_pipeline).to_dict()["components"]

    def test_overrides(self):
        record = ScenarioHarness(get_scenario("zero")).run(
            overrides=StageOverrides(check={"checker": {"tolerance": 0.5}})
        )
        checker = Pipeline.loads(record.check_pipeline).to_dict()["components"]["checker"]
        assert checker["init_parameters"]["tolerance"] == 0.5

    def test_override_of_a_component_without_inputs(self):
        terminal = {"kind": "constant", "params": {"c": 1.0}}
        overrides = StageOverrides(solve={"builder": {"terminal": terminal}})
        record = ScenarioHarness(get_scenario("zero")).run(overrides=overrides)
        assert record.metrics["checker.y0"] == pytest.approx(1.0)
        assert record.verdict == Verdict.PASS

    def test_overrides_from_the_config(self):
        data = scenario_data("zero")
        data["overrides"] = {"check": {"checker": {"tolerance": 0.25}}}
        record = ScenarioHarness(parse_config(data)).run()
        checker = Pipeline.loads(record.check_pipeline).to_dict()["components"]["checker"]
        assert checker["init_parameters"]["tolerance"] == 0.25

    def test_override_of_a_missing_component(self):
        harness = ScenarioHarness(get_scenario("zero"))
        with pytest.raises(ScenarioError, match="Cannot override non-existent component 'nope'") as error:
            harness.run(overrides=StageOverrides(solve={"nope": {"seed": 1}}))
        assert error.value.scenario == "zero"

    def test_per_case_verdicts_come_from_the_checking_stage(self, tiny_assumption_config, tmp_path):
        record = ScenarioHarness(parse_config(tiny_assumption_config)).run(output_dir=tmp_path)

        assert record.verdicts == {"collector": Verdict.PASS}
        assert record.exit_code == 0
        rows = (tmp_path / "collector.csv").read_text(encoding="utf-8").splitlines()
        assert rows[0].split(",") == ["case", "observed", "expected", "matches"]
        assert len(rows) == 3
        reports = json.loads((tmp_path / "checker_reports.json").read_text(encoding="utf-8"))
        assert set(reports) == {"log_drift", "cubic"}


class TestRunner:
    def test_output_root_precedence(self, monkeypatch, tmp_path):
        config = parse_config({"command": "solve-bsde", "output_dir": str(tmp_path / "config")})
        assert resolve_output_root() == Path("out")
        assert resolve_output_root(config=config) == tmp_path / "config"
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "env"))
        assert resolve_output_root(config=config) == tmp_path / "env"
        assert resolve_output_root(tmp_path / "explicit", config) == tmp_path / "explicit"

    def test_run_scenario_writes_below_the_scenario_id(self, tmp_path):
        record = run_scenario(get_scenario("zero"), output_root=tmp_path)
        assert (tmp_path / "zero" / "result.json").is_file()
        assert record.artifacts["result"] == str(tmp_path / "zero" / "result.json")

    def test_seed_override(self, tmp_path):
        config = get_scenario("zero")
        record = run_scenario(config, seed=5, write=False)
        assert record.seed == 5
        assert record.config_hash == config_hash(config.with_overrides(seed=5))
        assert record.config_hash != config_hash(config)
        assert not (tmp_path / "zero").exists()

    def test_reruns_are_byte_identical(self, tiny_assumption_config, tmp_path):
        config = parse_config(tiny_assumption_config)
        run_scenario(config, output_root=tmp_path / "first")
        run_scenario(config, output_root=tmp_path / "second")
        for name in ("collector.csv", "checker_reports.json", "config.yaml", "solve_pipeline.yaml"):
            first = (tmp_path / "first" / "tiny-assumptions" / name).read_bytes()
            second = (tmp_path / "second" / "tiny-assumptions" / name).read_bytes()
            assert first == second
