# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from typing import Any, Dict, List, Optional

from haystack import component, default_from_dict, default_to_dict, logging

from logbsde_lab.components.specs import build_generator, build_sampler
from logbsde_lab.dataclasses.reports import CheckReport, Verdict
from logbsde_lab.errors import InvalidParametersError
from logbsde_lab.generators.assumptions import check_h1, check_h2, check_h3, check_h4, check_h4_stochastic_monotone
from logbsde_lab.generators.examples import monotone_certificate

logger = logging.getLogger(__name__)

SUPPORTED_CHECKS = ("H1", "H2", "H3", "H4")


@component
class AssumptionChecker:
    """
    Runs the sampled assumption checks on a generator given by its kind and parameters.

    Drivers of the stochastic-monotone kind are also checked against their pointwise monotonicity certificate
    whenever `H4` is requested.

    Usage example:
    ```python
    from logbsde_lab.components import AssumptionChecker

    checker = AssumptionChecker(checks=["H2", "H4"], n_samples=2000)
    result = checker.run(generator={"kind": "cubic_violator"}, seed=0)
    result["verdict"]  # Verdict.FAIL, the witness is in result["reports"]
    ```
    """

    def __init__(
        self,
        checks: Optional[List[str]] = None,
        sampler: Optional[Dict[str, Any]] = None,
        n_samples: int = 2000,
        N_list: Optional[List[float]] = None,
        dim_k: int = 1,
        t_range: Optional[List[float]] = None,
    ):
        """
        Create an AssumptionChecker component.

        :param checks:
            Assumptions to check, a subset of `H1` to `H4`; defaults to all.
        :param sampler:
            Half-widths and log fraction of the sampled box.
        :param n_samples:
            Quasi-random samples per check.
        :param N_list:
            Localization levels of the `H4` check.
        :param dim_k:
            State dimension of the sampled points.
        :param t_range:
            Time interval of the sampled points.
        """
        self.checks = list(checks or SUPPORTED_CHECKS)
        unknown = set(self.checks) - set(SUPPORTED_CHECKS)
        if unknown:
            raise InvalidParametersError(f"Unknown checks {sorted(unknown)}. Supported checks are: {SUPPORTED_CHECKS}")
        self.sampler = dict(sampler or {})
        self.n_samples = n_samples
        self.N_list = list(N_list or [10.0, 100.0])
        self.dim_k = dim_k
        self.t_range = list(t_range or [0.0, 1.0])

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes the component to a dictionary.

        :returns:
            Dictionary with serialized data.
        """
        return default_to_dict(
            self,
            checks=self.checks,
            sampler=self.sampler,
            n_samples=self.n_samples,
            N_list=self.N_list,
            dim_k=self.dim_k,
            t_range=self.t_range,
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AssumptionChecker":
        """
        Deserializes the component from a dictionary.

        :param data:
            The dictionary to deserialize from.
        :returns:
            The deserialized component.
        """
        return default_from_dict(cls, data)

    @component.output_types(reports=List[Dict[str, Any]], verdict=Verdict)
    def run(self, generator: Dict[str, Any], seed: int):
        """
        Check one generator.

        :param generator:
            Generator section with `kind`, `params` and optional `envelope` overrides.
        :param seed:
            Seed of the sampled points.
        :returns:
            A dictionary with the following keys:
            - `reports`: One serialized check report per assumption, with the worst sampled point as witness.
            - `verdict`: `PASS` if every check passed.
        """
        driver, envelope = build_generator(generator)
        sampler = build_sampler({**self.sampler, "seed": seed}, self.dim_k, (self.t_range[0], self.t_range[1]))
        reports: List[CheckReport] = []
        for check in self.checks:
            if check == "H1":
                reports.append(check_h1(driver, sampler, self.n_samples))
            elif check == "H2":
                reports.append(check_h2(driver, envelope, sampler, self.n_samples))
            elif check == "H3":
                reports.append(check_h3(driver, envelope, sampler, self.n_samples))
            else:
                reports.append(check_h4(driver, envelope, sampler, self.n_samples, self.N_list))
                if driver.kind == "stochastic_monotone":
                    process, K_prime = monotone_certificate(driver)
                    reports.append(check_h4_stochastic_monotone(driver, process, K_prime, sampler, self.n_samples))

        verdict = Verdict.PASS if all(report.passed for report in reports) else Verdict.FAIL
        logger.info(
            "Checked {assumptions} on {label}: {verdict}",
            assumptions=[report.assumption for report in reports],
            label=driver.label,
            verdict=str(verdict),
        )
        return {"reports": [report.to_dict() for report in reports], "verdict": verdict}


@component
class VerdictCollector:
    """
    Compares observed verdicts with expected ones, e.g. planted violators that must fail.
    """

    @component.output_types(rows=List[Dict[str, Any]], verdict=Verdict)
    def run(self, verdicts: List[Verdict], labels: Optional[List[str]] = None, expected: Optional[List[str]] = None):
        """
        Tabulate the verdicts.

        :param verdicts:
            Observed verdicts.
        :param labels:
            Names of the cases; defaults to their positions.
        :param expected:
            Expected verdicts as strings; defaults to `pass` everywhere.
        :returns:
            A dictionary with the following keys:
            - `rows`: One row per case with `case`, `observed`, `expected` and `matches`.
            - `verdict`: `PASS` if every case matched, `INCONCLUSIVE` if a mismatch was inconclusive, else `FAIL`.
        """
        labels = labels or [str(index) for index in range(len(verdicts))]
        expected = expected or [str(Verdict.PASS)] * len(verdicts)
        if not len(labels) == len(expected) == len(verdicts):
            raise InvalidParametersError(
                f"Got {len(verdicts)} verdicts, {len(labels)} labels and {len(expected)} expectations."
            )
        rows, outcomes = [], []
        for label, observed, wanted in zip(labels, verdicts, expected):
            matches = observed == Verdict.from_str(wanted)
            rows.append({"case": label, "observed": str(observed), "expected": wanted, "matches": matches})
            if matches:
                outcomes.append(Verdict.PASS)
            else:
                outcomes.append(Verdict.INCONCLUSIVE if observed == Verdict.INCONCLUSIVE else Verdict.FAIL)
        return {"rows": rows, "verdict": Verdict.combine(outcomes)}
