# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from typing import Any, Dict, List, Optional

import numpy as np
from haystack import component, default_from_dict, default_to_dict, logging

from logbsde_lab.components.specs import build_problem
from logbsde_lab.dataclasses.envelope import AssumptionEnvelope
from logbsde_lab.dataclasses.path_batch import PathBatch
from logbsde_lab.dataclasses.reports import Verdict
from logbsde_lab.dataclasses.solution import BsdeSolution
from logbsde_lab.estimates.functionals import integrability_check, theta_p
from logbsde_lab.solvers.backward import solve_backward
from logbsde_lab.solvers.config import SolverConfig
from logbsde_lab.solvers.oracles import ode_reduction_solve
from logbsde_lab.solvers.problem import BsdeProblem
from logbsde_lab.solvers.residuals import martingale_residual
from logbsde_lab.util.seeding import derive_seed

logger = logging.getLogger(__name__)


@component
class ProblemBuilder:
    """
    Assembles a backward problem and the envelope of its driver from configuration sections.

    Usage example:
    ```python
    from logbsde_lab.components import ProblemBuilder

    builder = ProblemBuilder(
        generator={"kind": "log_drift", "params": {"K": 1.0}},
        terminal={"kind": "constant", "params": {"c": 2.718281828459045}},
        diffusion={"kind": "zero"},
        time_grid={"t0": 0.0, "T": 1.0, "n_steps": 1000},
        x0=[0.0],
    )
    problem = builder.run()["problem"]
    ```
    """

    def __init__(
        self,
        generator: Dict[str, Any],
        terminal: Dict[str, Any],
        diffusion: Dict[str, Any],
        time_grid: Dict[str, Any],
        x0: List[float],
    ):
        """
        Create a ProblemBuilder component.

        :param generator:
            Generator section with `kind`, `params` and `envelope` overrides.
        :param terminal:
            Terminal section with `kind` and `params`.
        :param diffusion:
            Diffusion section with `kind`, `dim_k`, `dim_r` and `params`.
        :param time_grid:
            Time grid section with `t0`, `T` and `n_steps`.
        :param x0:
            Initial state.
        """
        self.generator = generator
        self.terminal = terminal
        self.diffusion = diffusion
        self.time_grid = time_grid
        self.x0 = list(x0)

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
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ProblemBuilder":
        """
        Deserializes the component from a dictionary.

        :param data:
            The dictionary to deserialize from.
        :returns:
            The deserialized component.
        """
        return default_from_dict(cls, data)

    @component.output_types(problem=BsdeProblem, envelope=AssumptionEnvelope)
    def run(self):
        """
        Build the problem.

        :returns:
            A dictionary with the following keys:
            - `problem`: The backward problem.
            - `envelope`: The envelope of its driver, with the configured overrides.
        """
        problem, envelope = build_problem(self.generator, self.terminal, self.diffusion, self.time_grid, self.x0)
        return {"problem": problem, "envelope": envelope}


@component
class BackwardSolver:
    """
    Simulates the forward paths of a problem and solves its backward equation on them.
    """

    def __init__(self, solver: Optional[Dict[str, Any]] = None):
        """
        Create a BackwardSolver component.

        :param solver:
            Fields of `SolverConfig`; its seed is replaced by the seed given to `run`.
        """
        self.solver = dict(solver or {})
        SolverConfig(**self.solver)

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes the component to a dictionary.

        :returns:
            Dictionary with serialized data.
        """
        return default_to_dict(self, solver=self.solver)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BackwardSolver":
        """
        Deserializes the component from a dictionary.

        :param data:
            The dictionary to deserialize from.
        :returns:
            The deserialized component.
        """
        return default_from_dict(cls, data)

    @component.output_types(solution=BsdeSolution, paths=PathBatch)
    def run(self, problem: BsdeProblem, seed: int):
        """
        Solve the problem.

        :param problem:
            The problem.
        :param seed:
            Master seed; the path stream is derived from it.
        :returns:
            A dictionary with the following keys:
            - `solution`: The backward solution.
            - `paths`: The forward paths it was computed on.
        """
        config = SolverConfig(**{**self.solver, "seed": seed})
        paths = problem.simulate(config.n_paths, derive_seed(seed, "solvers", "paths"), n_jobs=config.n_jobs)
        solution = solve_backward(problem, paths, config)
        return {"solution": solution, "paths": paths}


def _relative_gap(value: float, reference: float) -> float:
    gap = abs(value - reference)
    if reference == 0:
        return gap
    return gap / abs(reference)


@component
class SolutionChecker:
    """
    Summarizes a backward solution and compares it with the ODE oracle when the problem is deterministic.

    A problem is deterministic when its driver ignores `x` and `z` and its terminal map is constant. Other
    problems are checked against the absolute integrability bound of the driver along the solution.
    """

    def __init__(self, tolerance: float = 1e-3, p: float = 2.0):
        """
        Create a SolutionChecker component.

        :param tolerance:
            Bound on the relative error of `Y_0` against the oracle, absolute when the oracle vanishes.
        :param p:
            Exponent of the size functional `Θ_p`.
        """
        self.tolerance = tolerance
        self.p = p

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes the component to a dictionary.

        :returns:
            Dictionary with serialized data.
        """
        return default_to_dict(self, tolerance=self.tolerance, p=self.p)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SolutionChecker":
        """
        Deserializes the component from a dictionary.

        :param data:
            The dictionary to deserialize from.
        :returns:
            The deserialized component.
        """
        return default_from_dict(cls, data)

    @component.output_types(metrics=Dict[str, float], verdict=Verdict)
    def run(self, problem: BsdeProblem, solution: BsdeSolution, paths: PathBatch, envelope: AssumptionEnvelope):
        """
        Check the solution.

        :param problem:
            The solved problem.
        :param solution:
            Its solution.
        :param paths:
            The paths of the solution.
        :param envelope:
            Envelope of the driver.
        :returns:
            A dictionary with the following keys:
            - `metrics`: `y0`, its standard error, `Θ_p`, the largest projected martingale residual and, for
              deterministic problems, the oracle value and the errors against it.
            - `verdict`: The outcome of the oracle comparison or of the integrability bound.
        """
        y0 = float(solution.y0[0])
        metrics = {
            "y0": y0,
            "y0_stderr": float(solution.y0_stderr[0]),
            "theta_p": theta_p(solution, self.p).value,
            "martingale_residual": martingale_residual(solution, problem, paths).max_projected,
        }
        generator = problem.generator
        if not (generator.x_free and generator.z_free and problem.terminal.kind == "constant"):
            report = integrability_check(solution, generator, envelope, paths.states)
            metrics["integrability_lhs"], metrics["integrability_rhs"] = report.lhs[0], report.rhs[0]
            return {"metrics": metrics, "verdict": report.verdict}

        xi = problem.terminal(problem.x0[None, :])[0]
        oracle = float(ode_reduction_solve(generator, xi, problem.grid)[0, 0])
        metrics.update(
            {"oracle_y0": oracle, "absolute_error": abs(y0 - oracle), "relative_error": _relative_gap(y0, oracle)}
        )
        if not np.isfinite(y0):
            verdict = Verdict.INCONCLUSIVE
        else:
            verdict = Verdict.PASS if metrics["relative_error"] <= self.tolerance else Verdict.FAIL
        logger.info("Y0 = {y0} against the oracle {oracle}: {verdict}", y0=y0, oracle=oracle, verdict=str(verdict))
        return {"metrics": metrics, "verdict": verdict}
