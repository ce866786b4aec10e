# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

from logbsde_lab.dataclasses.reports import Verdict

#: Process exit codes of the verdicts; errors exit with 1.
EXIT_CODES = {Verdict.PASS: 0, Verdict.FAIL: 2, Verdict.INCONCLUSIVE: 3}


class Command(Enum):
    """
    The experiments the laboratory runs, one per subcommand.
    """

    SIMULATE_FORWARD = "simulate-forward"
    CHECK_ASSUMPTIONS = "check-assumptions"
    MOLLIFY_DEMO = "mollify-demo"
    SOLVE_BSDE = "solve-bsde"
    APRIORI_CHECK = "apriori-check"
    STABILITY_SWEEP = "stability-sweep"
    PDE_COMPARE = "pde-compare"

    def __str__(self):
        return self.value

    @property
    def summary(self) -> str:
        """
        One line describing the experiment, used as help of its subcommand.
        """
        return _SUMMARIES[self.value]

    @staticmethod
    def from_str(string: str) -> "Command":
        """
        Create a command from its subcommand name.

        :param string:
            String to convert.
        :returns:
            The command.
        """
        mapping = {e.value: e for e in Command}
        command = mapping.get(string)
        if command is None:
            raise ValueError(f"Unknown command '{string}'. Supported commands are: {list(mapping.keys())}")
        return command


_SUMMARIES = {
    "simulate-forward": "Simulate forward paths and estimate exponential moments of their displacement.",
    "check-assumptions": "Run the sampled assumption checks on a list of generators.",
    "mollify-demo": "Certify the approximation properties of mollified drivers.",
    "solve-bsde": "Solve a backward equation and compare it with its oracle.",
    "apriori-check": "Fit and check the constant of the weighted a-priori estimate.",
    "stability-sweep": "Measure the convergence of approximating problems.",
    "pde-compare": "Compare two solution fields of a semilinear PDE.",
}


@dataclass(frozen=True)
class StageOverrides:
    """
    Overrides of the init parameters of stage components.

    :param solve:
        Overrides for the first stage. Each key is a component name and its value a dictionary with init parameters
        to override.
    :param check:
        Overrides for the second stage, in the same format.
    """

    solve: Optional[Dict[str, Dict[str, Any]]] = None
    check: Optional[Dict[str, Dict[str, Any]]] = None


@dataclass
class ResultRecord:  # pylint: disable=too-many-instance-attributes
    """
    The record of one scenario run.

    :param scenario:
        Id of the scenario.
    :param command:
        The command that ran.
    :param config_hash:
        SHA-256 of the canonical JSON of the resolved configuration.
    :param seed:
        The master seed.
    :param metrics:
        Scalar metrics keyed by `component.metric`.
    :param verdicts:
        Verdict of every checking component.
    :param wall_time:
        Seconds spent running the stages.
    :param artifacts:
        Paths of the files written for the run, keyed by artifact name.
    :param solve_pipeline:
        The serialized first stage, overrides included.
    :param check_pipeline:
        The serialized second stage, overrides included.
    """

    scenario: str
    command: Command
    config_hash: str
    seed: int
    metrics: Dict[str, float] = field(default_factory=dict)
    verdicts: Dict[str, Verdict] = field(default_factory=dict)
    wall_time: float = 0.0
    artifacts: Dict[str, str] = field(default_factory=dict)
    solve_pipeline: str = ""
    check_pipeline: str = ""

    @property
    def verdict(self) -> Verdict:
        """
        The combined verdict of the run, failures dominating divergences.
        """
        return Verdict.combine(list(self.verdicts.values()))

    @property
    def exit_code(self) -> int:
        """
        Process exit code of the run: 0 when everything passed, 2 on a failure and 3 when only inconclusive.
        """
        return EXIT_CODES[self.verdict]

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes the record to a dictionary.

        :returns:
            Dictionary with all fields, verdicts as strings.
        """
        return {
            "scenario": self.scenario,
            "command": str(self.command),
            "config_hash": self.config_hash,
            "seed": self.seed,
            "metrics": dict(self.metrics),
            "verdicts": {name: str(verdict) for name, verdict in self.verdicts.items()},
            "verdict": str(self.verdict),
            "wall_time": self.wall_time,
            "artifacts": dict(self.artifacts),
        }


def combined_exit_code(records: List[ResultRecord]) -> int:
    """
    Exit code of several runs, computed from their combined verdict.
    """
    return EXIT_CODES[Verdict.combine([record.verdict for record in records])]
