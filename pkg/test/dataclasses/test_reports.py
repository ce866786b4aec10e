# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0
import pytest

from logbsde_lab.dataclasses.reports import CheckReport, EstimateReport, Verdict


class TestVerdict:
    def test_combine_failure_dominates(self):
        assert Verdict.combine([Verdict.PASS, Verdict.INCONCLUSIVE, Verdict.FAIL]) == Verdict.FAIL

    def test_combine_inconclusive_over_pass(self):
        assert Verdict.combine([Verdict.PASS, Verdict.INCONCLUSIVE]) == Verdict.INCONCLUSIVE

    def test_combine_empty_passes(self):
        assert Verdict.combine([]) == Verdict.PASS

    def test_from_str(self):
        assert Verdict.from_str("fail") == Verdict.FAIL
        assert str(Verdict.PASS) == "pass"
        with pytest.raises(ValueError, match="Unknown verdict"):
            Verdict.from_str("maybe")


def test_check_report_verdict_and_dict():
    report = CheckReport(assumption="H2", passed=False, margin=0.5, witness={"y": [2.0]}, n_samples=10)
    assert report.verdict == Verdict.FAIL
    data = report.to_dict()
    assert data["assumption"] == "H2"
    assert data["witness"] == {"y": [2.0]}


def test_estimate_report_worst_ratio():
    report = EstimateReport(
        name="apriori", lhs=[1.0, 3.0, 1.0], rhs=[2.0, 4.0, 0.0], fitted_constant=1.0, verdict=Verdict.PASS
    )
    assert report.passed
    assert report.worst_ratio == pytest.approx(0.75)
    assert report.to_dict()["verdict"] == "pass"


def test_estimate_report_worst_ratio_without_positive_rhs():
    report = EstimateReport(name="x", lhs=[1.0], rhs=[0.0], fitted_constant=1.0, verdict=Verdict.INCONCLUSIVE)
    assert report.worst_ratio is None
