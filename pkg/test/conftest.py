# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0
import pytest

from haystack.testing.test_utils import set_all_seeds

from logbsde_lab.experiments import OUTPUT_DIR_ENV

set_all_seeds(0)


@pytest.fixture(autouse=True)
def no_output_dir_env(monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)


@pytest.fixture()
def tiny_assumption_config():
    return {
        "scenario": "tiny-assumptions",
        "command": "check-assumptions",
        "assumptions": {
            "checks": ["H2"],
            "n_samples": 500,
            "cases": [
                {"generator": {"kind": "log_drift"}, "expect": "pass", "label": "log_drift"},
                {"generator": {"kind": "cubic_violator"}, "expect": "fail", "label": "cubic"},
            ],
        },
    }
