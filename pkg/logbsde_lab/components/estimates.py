# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from typing import Any, Dict, List, Optional

import numpy as np
from haystack import component, default_from_dict, default_to_dict, logging

from logbsde_lab.components.specs import build_problem
from logbsde_lab.dataclasses.envelope import AssumptionEnvelope
from logbsde_lab.dataclasses.reports import EstimateReport, Verdict
from logbsde_lab.errors import InvalidParametersError
from logbsde_lab.estimates.apriori import SAFETY_FACTOR, AprioriInstance, apriori_check
from logbsde_lab.estimates.stability import StabilityReport, stability_sweep
from logbsde_lab.solvers.config import SolverConfig
from logbsde_lab.solvers.problem import BsdeProblem

logger = logging.getLogger(__name__)


def _merge(base: Dict[str, Any], section: str, case: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    if case.get(section):
        merged["params"] = {**(base.get("params") or {}), **case[section]}
    return merged


@component
class AprioriInstances:
    """
    Builds the problem family of the a-priori experiment from a base problem and per-case parameter overrides.

    The first case is the calibration instance, the others form the sweep.

    Usage example:
    ```python
    from logbsde_lab.components import AprioriInstances

    instances = AprioriInstances(
        generator={"kind": "log_drift", "params": {"K": 1.0}},
        terminal={"kind": "constant", "params": {"c": 2.718281828459045}},
        diffusion={"kind": "brownian"},
        time_grid={"T": 1.0, "n_steps": 50},
        x0=[0.0],
        cases=[
            {"label": "calibration"},
            {"label": "K=0.5", "generator": {"K": 0.5}, "terminal": {"c": 2.0}},
        ],
    )
    family = instances.run()
    ```
    """

    def __init__(  # pylint: disable=too-many-positional-arguments
        self,
        generator: Dict[str, Any],
        terminal: Dict[str, Any],
        diffusion: Dict[str, Any],
        time_grid: Dict[str, Any],
        x0: List[float],
        cases: List[Dict[str, Any]],
    ):
        """
        Create an AprioriInstances component.

        :param generator:
            Base generator section.
        :param terminal:
            Base terminal section.
        :param diffusion:
            Diffusion section shared by all instances.
        :param time_grid:
            Time grid section shared by all instances.
        :param x0:
            Initial state.
        :param cases:
            One dictionary per instance with a `label` and optional `generator` and `terminal` parameter overrides.
        :raises InvalidParametersError:
            If there are fewer than two cases.
        """
        if len(cases) < 2:
            raise InvalidParametersError("The a-priori experiment needs a calibration case and at least one more.")
        self.generator = generator
        self.terminal = terminal
        self.diffusion = diffusion
        self.time_grid = time_grid
        self.x0 = list(x0)
        self.cases = [dict(case) for case in cases]

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes the component to a dictionary.

        :returns:
            Dictionary with serialized data.
        """
        return default_to_dict(
            self,
            generator=self.generator,
            terminal=self.terminal,
            diffusion=self.diffusion,
            time_grid=self.time_grid,
            x0=self.x0,
            cases=self.cases,
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AprioriInstances":
        """
        Deserializes the component from a dictionary.

        :param data:
            The dictionary to deserialize from.
        :returns:
            The deserialized component.
        """
        return default_from_dict(cls, data)

    @component.output_types(calibration=AprioriInstance, sweep=List[AprioriInstance])
    def run(self):
        """
        Build the instances.

        :returns:
            A dictionary with the following keys:
            - `calibration`: The instance the constant is fitted on.
            - `sweep`: The remaining instances.
        """
        instances = []
        for index, case in enumerate(self.cases):
            problem, envelope = build_problem(
                _merge(self.generator, "generator", case),
                _merge(self.terminal, "terminal", case),
                self.diffusion,
                self.time_grid,
                self.x0,
            )
            instances.append(AprioriInstance(label=case.get("label", str(index)), problem=problem, envelope=envelope))
        return {"calibration": instances[0], "sweep": instances[1:]}


@component
class AprioriEstimator:
    """
    Fits the constant of the weighted a-priori estimate on the calibration instance and checks it on the sweep.
    """

    def __init__(
        self,
        solver: Optional[Dict[str, Any]] = None,
        p: Optional[float] = None,
        gamma: Optional[float] = None,
        safety_factor: float = SAFETY_FACTOR,
    ):
        """
        Create an AprioriEstimator component.

        :param solver:
            Fields of `SolverConfig`; its seed is replaced by the seed given to `run`.
        :param p:
            Exponent overriding the envelopes' `p`.
        :param gamma:
            Weight exponent overriding the envelopes' `γ`.
        :param safety_factor:
            Factor between the calibrated ratio and the fitted constant.
        """
        self.solver = dict(solver or {})
        SolverConfig(**self.solver)
        self.p = p
        self.gamma = gamma
        self.safety_factor = safety_factor

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes the component to a dictionary.

        :returns:
            Dictionary with serialized data.
        """
        return default_to_dict(
            self, solver=self.solver, p=self.p, gamma=self.gamma, safety_factor=self.safety_factor
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AprioriEstimator":
        """
        Deserializes the component from a dictionary.

        :param data:
            The dictionary to deserialize from.
        :returns:
            The deserialized component.
        """
        return default_from_dict(cls, data)

    @component.output_types(report=EstimateReport, rows=List[Dict[str, Any]], verdict=Verdict)
    def run(self, calibration: AprioriInstance, sweep: List[AprioriInstance], seed: int):
        """
        Run the a-priori check.

        :param calibration:
            The calibration instance.
        :param sweep:
            The sweep instances.
        :param seed:
            Master seed of the shared paths.
        :returns:
            A dictionary with the following keys:
            - `report`: The estimate report with the fitted constant.
            - `rows`: Its table, one row per instance.
            - `verdict`: `PASS` if the constant bounds every sweep instance.
        """
        config = SolverConfig(**{**self.solver, "seed": seed})
        report = apriori_check(
            calibration, sweep, config, p=self.p, gamma=self.gamma, safety_factor=self.safety_factor
        )
        rows = [{**row, "fitted_constant": report.fitted_constant} for row in report.table]
        return {"report": report, "rows": rows, "verdict": report.verdict}


@component
class StabilitySweeper:
    """
    Solves the mollified and truncated problems along a schedule and measures their distance to a reference.
    """

    def __init__(  # pylint: disable=too-many-positional-arguments
        self,
        schedule: List[float],
        solver: Optional[Dict[str, Any]] = None,
        p_prime: float = 1.5,
        N: float = 1.0,
        burn_in: int = 0,
        threshold: float = 1e-2,
        grid_density: int = 101,
        reference: str = "auto",
    ):
        """
        Create a StabilitySweeper component.

        :param schedule:
            Increasing approximation indices.
        :param solver:
            Fields of `SolverConfig`; its seed is replaced by the seed given to `run`.
        :param p_prime:
            Exponent of the error norms.
        :param N:
            Radius of the `ρ_N` column.
        :param burn_in:
            Leading rows exempt from the monotonicity requirement.
        :param threshold:
            Bound on the final error of `Y`.
        :param grid_density:
            Grid points per axis of `ρ_N`.
        :param reference:
            One of `auto`, `oracle`, `direct` and `largest`.
        """
        if reference not in ("auto", "oracle", "direct", "largest"):
            raise InvalidParametersError(f"Unknown reference mode '{reference}'.")
        self.schedule = list(schedule)
        self.solver = dict(solver or {})
        SolverConfig(**self.solver)
        self.p_prime = p_prime
        self.N = N
        self.burn_in = burn_in
        self.threshold = threshold
        self.grid_density = grid_density
        self.reference = reference

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes the component to a dictionary.

        :returns:
            Dictionary with serialized data.
        """
        return default_to_dict(
            self,
            schedule=self.schedule,
            solver=self.solver,
            p_prime=self.p_prime,
            N=self.N,
            burn_in=self.burn_in,
            threshold=self.threshold,
            grid_density=self.grid_density,
            reference=self.reference,
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "StabilitySweeper":
        """
        Deserializes the component from a dictionary.

        :param data:
            The dictionary to deserialize from.
        :returns:
            The deserialized component.
        """
        return default_from_dict(cls, data)

    @component.output_types(report=StabilityReport, rows=List[Dict[str, Any]], verdict=Verdict)
    def run(self, problem: BsdeProblem, envelope: AssumptionEnvelope, seed: int):
        """
        Run the sweep.

        :param problem:
            The problem to approximate.
        :param envelope:
            Envelope of its driver.
        :param seed:
            Master seed of the shared paths.
        :returns:
            A dictionary with the following keys:
            - `report`: The stability report.
            - `rows`: Its error curve, one row per index.
            - `verdict`: The report's verdict.
        """
        report = stability_sweep(
            problem,
            self.schedule,
            SolverConfig(**{**self.solver, "seed": seed}),
            envelope=envelope,
            reference=self.reference,  # type: ignore[arg-type]
            p_prime=self.p_prime,
            N=self.N,
            burn_in=self.burn_in,
            threshold=self.threshold,
            grid_density=self.grid_density,
        )
        return {"report": report, "rows": report.rows, "verdict": report.verdict}


@component
class DecayRate:
    """
    Fits the decay rate of a column of a sweep table against the approximation index.

    The rate is the negated slope of `log(value)` against `log(n)` over the rows with positive finite values. The
    column is also checked for monotone decay; with `strict` a column that grows fails, otherwise the rate is only
    reported.
    """

    def __init__(self, column: str, index_column: str = "n", strict: bool = False):
        """
        Create a DecayRate component.

        :param column:
            The column to fit.
        :param index_column:
            The column holding the approximation index.
        :param strict:
            Whether growth of the column fails the verdict.
        """
        self.column = column
        self.index_column = index_column
        self.strict = strict

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes the component to a dictionary.

        :returns:
            Dictionary with serialized data.
        """
        return default_to_dict(self, column=self.column, index_column=self.index_column, strict=self.strict)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DecayRate":
        """
        Deserializes the component from a dictionary.

        :param data:
            The dictionary to deserialize from.
        :returns:
            The deserialized component.
        """
        return default_from_dict(cls, data)

    @component.output_types(metrics=Dict[str, float], verdict=Verdict)
    def run(self, rows: List[Dict[str, Any]]):
        """
        Fit the rate.

        :param rows:
            The sweep table.
        :returns:
            A dictionary with the following keys:
            - `metrics`: `{column}_rate` (NaN with fewer than two usable rows), `{column}_first` and `{column}_last`.
            - `verdict`: `INCONCLUSIVE` on non-finite values, `FAIL` on growth when strict, else `PASS`.
        """
        index = np.array([float(row[self.index_column]) for row in rows])
        values = np.array([float(row[self.column]) for row in rows])
        usable = np.isfinite(values) & (values > 0) & (index > 0)
        rate = float("nan")
        if usable.sum() >= 2:
            slope, _ = np.polyfit(np.log(index[usable]), np.log(values[usable]), 1)
            rate = float(-slope)
        metrics = {
            f"{self.column}_rate": rate,
            f"{self.column}_first": float(values[0]) if len(values) else float("nan"),
            f"{self.column}_last": float(values[-1]) if len(values) else float("nan"),
        }
        if not len(values) or not np.all(np.isfinite(values)):
            return {"metrics": metrics, "verdict": Verdict.INCONCLUSIVE}
        growing = bool(np.any(np.diff(values) > 1e-12 * (1.0 + np.abs(values[:-1]))))
        if growing:
            logger.warning("The column {column} grows along the schedule", column=self.column)
        verdict = Verdict.FAIL if growing and self.strict else Verdict.PASS
        logger.info("Decay rate of {column}: {rate}", column=self.column, rate=rate)
        return {"metrics": metrics, "verdict": verdict}
