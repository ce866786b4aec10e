# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from haystack import logging

from logbsde_lab.dataclasses.path_batch import PathBatch
from logbsde_lab.dataclasses.reports import Verdict
from logbsde_lab.dataclasses.solution import BsdeSolution
from logbsde_lab.generators.assumptions import estimate_lipschitz
from logbsde_lab.generators.sampling import BoxSampler
from logbsde_lab.solvers.backward import driver_values, solve_backward
from logbsde_lab.solvers.config import SolverConfig
from logbsde_lab.solvers.problem import BsdeProblem
from logbsde_lab.solvers.regression import regress

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ResidualReport:
    """
    Per-step residuals of the discrete dynamic programming equation
    `Y_{t_i} - Y_{t_{i+1}} - f·Δt + Z_{t_i}·ΔW_i = 0`.

    :param mean_residual:
        Norm of the sample mean of the full residual, one entry per step.
    :param projected_norm:
        Root mean square of the basis projection of the drift part `Y_{t_i} - Y_{t_{i+1}} - f·Δt`.
    :param increment_projection:
        Root mean square of the basis projection of `Z_{t_i}·ΔW_i`, whose conditional mean is zero.
    """

    mean_residual: List[float]
    projected_norm: List[float]
    increment_projection: List[float]

    @property
    def max_projected(self) -> float:
        return max(self.projected_norm, default=0.0)

    @property
    def worst_step(self) -> Optional[int]:
        """
        Step with the largest projected norm, `None` on a degenerate grid.
        """
        return int(np.argmax(self.projected_norm)) if self.projected_norm else None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def martingale_residual(
    solution: BsdeSolution, problem: BsdeProblem, paths: PathBatch, config: Optional[SolverConfig] = None
) -> ResidualReport:
    """
    Check a solution against the discrete dynamic programming equation it was computed from.

    The driver enters with the weights of the scheme that produced the solution: `f(t_i, X, Ŷ, Z)` for the
    explicit scheme, `θ·f(t_i, X, Y_{t_i}, Z_{t_i}) + (1-θ)·f(t_{i+1}, ...)` for the implicit one. At a converged
    least-squares fixed point without clipping the projected norms vanish up to round-off.

    :param solution:
        The solution.
    :param problem:
        The problem it solves.
    :param paths:
        The paths it was computed on.
    :param config:
        The solver settings used, for the basis and `θ`; defaults to `SolverConfig()`.
    :returns:
        The per-step residuals.
    """
    config = config or SolverConfig()
    grid = solution.grid
    theta = config.theta if solution.scheme == "implicit" else 1.0
    n_steps = grid.n_steps
    Y, Z = solution.Y, solution.Z
    mean_residual, projected, increment = [], [], []

    for step in range(n_steps):
        dt = float(grid.dt[step])
        t = float(grid.points[step])
        x = paths.states[:, step]
        if solution.scheme == "explicit":
            y_hat = regress(x, Y[:, step + 1], config.basis).fitted
            drive = driver_values(problem.generator, t, x, y_hat, Z[:, step], step)
        else:
            drive = theta * driver_values(problem.generator, t, x, Y[:, step], Z[:, step], step)
            if theta < 1.0:
                z_next = Z[:, step + 1] if step + 1 < n_steps else Z[:, step]
                t_next, x_next = float(grid.points[step + 1]), paths.states[:, step + 1]
                drive = drive + (1.0 - theta) * driver_values(
                    problem.generator, t_next, x_next, Y[:, step + 1], z_next, step + 1
                )
        drift = Y[:, step] - Y[:, step + 1] - drive * dt
        martingale = np.einsum("ndr,nr->nd", Z[:, step], paths.increments[:, step])
        mean_residual.append(float(np.linalg.norm(np.mean(drift + martingale, axis=0))))
        projected.append(float(np.sqrt(np.mean(regress(x, drift, config.basis).fitted ** 2))))
        increment.append(float(np.sqrt(np.mean(regress(x, martingale, config.basis).fitted ** 2))))

    if n_steps:
        logger.debug(
            "Largest projected residual {value} at step {step}",
            value=max(projected),
            step=int(np.argmax(projected)),
        )
    return ResidualReport(mean_residual=mean_residual, projected_norm=projected, increment_projection=increment)


@dataclass(frozen=True)
class BaselineReport:
    """
    Comparison of the explicit and the implicit scheme on a globally Lipschitz problem.

    :param explicit_y0:
        Initial value of the explicit scheme.
    :param implicit_y0:
        Initial value of the implicit scheme.
    :param difference:
        Norm of their difference.
    :param tolerance:
        Accepted difference, `Δt·(1 + L)·(1 + |Y_0|)` plus three standard errors.
    :param dt:
        Largest time step.
    :param stderr:
        Standard error of the implicit initial value.
    :param lipschitz_estimate:
        Sampled Lipschitz constant of the driver.
    :param verdict:
        `PASS` if the schemes agree within the tolerance.
    """

    explicit_y0: List[float]
    implicit_y0: List[float]
    difference: float
    tolerance: float
    dt: float
    stderr: float
    lipschitz_estimate: float
    verdict: Verdict
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == Verdict.PASS

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["verdict"] = str(self.verdict)
        return data


def lipschitz_baseline_compare(
    problem: BsdeProblem,
    config: Optional[SolverConfig] = None,
    *,
    paths: Optional[PathBatch] = None,
    sampler: Optional[BoxSampler] = None,
    lipschitz_samples: int = 2_000,
) -> BaselineReport:
    """
    Run the explicit and the implicit scheme on the same paths and check that they agree to first order in `Δt`.

    :param problem:
        A problem with a globally Lipschitz driver.
    :param config:
        Solver settings; the scheme field is overridden.
    :param paths:
        Paths to share between the schemes; simulated from `config.seed` when absent.
    :param sampler:
        Box of the Lipschitz estimate; defaults to the standard box in the problem's state dimension.
    :param lipschitz_samples:
        Sampled pairs of the Lipschitz estimate.
    :returns:
        The comparison report.
    """
    config = config or SolverConfig()
    sampler = sampler or BoxSampler(dim_k=problem.diffusion.dim_k)
    lipschitz = estimate_lipschitz(problem.generator, sampler, lipschitz_samples)
    if paths is None:
        paths = problem.simulate(config.n_paths, config.seed, n_jobs=config.n_jobs)

    explicit = solve_backward(problem, paths, config.model_copy(update={"scheme": "explicit"}))
    implicit = solve_backward(problem, paths, config.model_copy(update={"scheme": "implicit"}))
    difference = float(np.linalg.norm(explicit.y0 - implicit.y0))
    dt = float(np.max(problem.grid.dt)) if problem.grid.n_steps else 0.0
    stderr = float(np.linalg.norm(implicit.y0_stderr))
    tolerance = dt * (1.0 + lipschitz) * (1.0 + float(np.linalg.norm(implicit.y0))) + 3.0 * stderr
    passed = difference <= tolerance
    logger.info(
        "Explicit and implicit schemes differ by {difference} (tolerance {tolerance})",
        difference=difference,
        tolerance=tolerance,
    )
    return BaselineReport(
        explicit_y0=explicit.y0.tolist(),
        implicit_y0=implicit.y0.tolist(),
        difference=difference,
        tolerance=tolerance,
        dt=dt,
        stderr=stderr,
        lipschitz_estimate=lipschitz,
        verdict=Verdict.PASS if passed else Verdict.FAIL,
        notes=[f"Lipschitz constant sampled at {lipschitz_samples} pairs on {sampler.describe()}."],
    )
