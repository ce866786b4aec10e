# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional


class Verdict(Enum):
    """
    Outcome of a check or an experiment.
    """

    #: Every inequality held.
    PASS = "pass"

    #: At least one inequality was violated.
    FAIL = "fail"

    #: A quantity diverged, so the inequality could not be evaluated.
    INCONCLUSIVE = "inconclusive"

    def __str__(self):
        return self.value

    @staticmethod
    def from_str(string: str) -> "Verdict":
        """
        Create a verdict from a string.

        :param string:
            String to convert.
        :returns:
            The verdict.
        """
        mapping = {e.value: e for e in Verdict}
        verdict = mapping.get(string)
        if verdict is None:
            raise ValueError(f"Unknown verdict '{string}'. Supported verdicts are: {list(mapping.keys())}")
        return verdict

    @staticmethod
    def combine(verdicts: List["Verdict"]) -> "Verdict":
        """
        Fold several verdicts into one, failures dominating divergences.

        :param verdicts:
            The verdicts to combine.
        :returns:
            `FAIL` if any failed, else `INCONCLUSIVE` if any was inconclusive, else `PASS`.
        """
        if Verdict.FAIL in verdicts:
            return Verdict.FAIL
        if Verdict.INCONCLUSIVE in verdicts:
            return Verdict.INCONCLUSIVE
        return Verdict.PASS


@dataclass(frozen=True)
class CheckReport:
    """
    Result of a sampled assumption check.

    A pass is evidence on the sampled box, not a proof.

    :param assumption:
        Identifier of the checked assumption, e.g. `"H2"`.
    :param passed:
        Whether no sample violated the inequality beyond the slack.
    :param margin:
        Largest observed `lhs - rhs` over all samples.
    :param witness:
        Coordinates of the worst sample, keyed by argument name.
    :param n_samples:
        Number of evaluated samples, including hill-climbing steps.
    :param box:
        Description of the sampled box.
    :param details:
        Check-specific extra information.
    """

    assumption: str
    passed: bool
    margin: float
    witness: Dict[str, List[float]]
    n_samples: int
    box: Dict[str, Any] = field(default_factory=dict)
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def verdict(self) -> Verdict:
        return Verdict.PASS if self.passed else Verdict.FAIL

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes the report to a dictionary.

        :returns:
            Dictionary with all fields.
        """
        return asdict(self)


@dataclass(frozen=True)
class EstimateReport:
    """
    Result of an estimate experiment comparing a left-hand functional with a right-hand bound.

    :param name:
        Name of the estimate.
    :param lhs:
        Left-hand values, one per instance.
    :param rhs:
        Right-hand values, one per instance.
    :param fitted_constant:
        Constant multiplying the right-hand side, `1.0` for absolute bounds.
    :param verdict:
        Overall verdict.
    :param table:
        Sweep table, one row per instance.
    :param notes:
        Scope statements attached to the report.
    """

    name: str
    lhs: List[float]
    rhs: List[float]
    fitted_constant: float
    verdict: Verdict
    table: List[Dict[str, Any]] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == Verdict.PASS

    @property
    def worst_ratio(self) -> Optional[float]:
        """
        Largest `lhs / rhs` over instances with a positive right-hand side.
        """
        ratios = [left / right for left, right in zip(self.lhs, self.rhs) if right > 0]
        return max(ratios) if ratios else None

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes the report to a dictionary.

        :returns:
            Dictionary with all fields, the verdict as a string.
        """
        data = asdict(self)
        data["verdict"] = str(self.verdict)
        data["worst_ratio"] = self.worst_ratio
        return data
