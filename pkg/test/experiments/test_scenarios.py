# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0
import math

import pytest

from logbsde_lab.dataclasses import Verdict
from logbsde_lab.experiments import get_scenario, list_scenarios, run_scenario


@pytest.mark.integration
@pytest.mark.parametrize("name", list_scenarios())
def test_builtin_scenario_passes(name, tmp_path):
    record = run_scenario(get_scenario(name), output_root=tmp_path)
    assert record.verdict == Verdict.PASS, record.to_dict()
    assert (tmp_path / name / "result.json").is_file()


@pytest.mark.integration
def test_example1_matches_the_oracle():
    record = run_scenario(get_scenario("example1-oracle"), write=False)
    assert record.metrics["checker.oracle_y0"] == pytest.approx(math.exp(math.exp(-1.0)), rel=1e-6)
    assert record.metrics["checker.relative_error"] <= 1e-3


@pytest.mark.integration
def test_assumption_discrimination_rows(tmp_path):
    run_scenario(get_scenario("assumption-discrimination"), output_root=tmp_path)
    rows = (tmp_path / "assumption-discrimination" / "collector.csv").read_text(encoding="utf-8").splitlines()
    assert len(rows) == 8
    assert all(row.endswith("true") for row in rows[1:])
