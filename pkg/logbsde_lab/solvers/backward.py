# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from typing import Optional, Tuple

import numpy as np
from haystack import logging

from logbsde_lab.dataclasses.generator import Generator
from logbsde_lab.dataclasses.path_batch import PathBatch
from logbsde_lab.dataclasses.solution import BsdeSolution, StepDiagnostics
from logbsde_lab.errors import FixedPointDivergenceError, InvalidParametersError, NumericFaultError
from logbsde_lab.generators.sampling import project_to_ball
from logbsde_lab.solvers.config import SolverConfig
from logbsde_lab.solvers.problem import BsdeProblem
from logbsde_lab.solvers.regression import RegressionResult, regress

logger = logging.getLogger(__name__)


def default_y_clip(terminal: np.ndarray) -> float:
    """
    The clipping radius `10·(1 + max|ξ|)` used when the configuration leaves it open.
    """
    return 10.0 * (1.0 + float(np.max(np.linalg.norm(terminal, axis=1), initial=0.0)))


def driver_values(
    generator: Generator, t: float, x: np.ndarray, y: np.ndarray, z: np.ndarray, step: int
) -> np.ndarray:
    """
    Evaluate a driver on all paths at one time step.

    :param generator:
        The driver.
    :param t:
        The time `t_i`.
    :param x:
        States of shape `(n, k)`.
    :param y:
        Values of shape `(n, d)`.
    :param z:
        Controls of shape `(n, d, r)`.
    :param step:
        Index of the time step, reported on failure.
    :returns:
        Driver values of shape `(n, d)`.
    :raises NumericFaultError:
        If the driver returns a non-finite value.
    """
    values = generator.evaluate(np.full(x.shape[0], t), x, y, z)
    finite = np.isfinite(values).all(axis=1)
    if not finite.all():
        path_index = int(np.argmin(finite))
        raise NumericFaultError(
            f"Non-finite driver value on path {path_index} at step {step} (t={t}).",
            path_index=path_index,
            step_index=step,
        )
    return values


def _clip(values: np.ndarray, radius: float) -> Tuple[np.ndarray, np.ndarray]:
    clipped = np.linalg.norm(values, axis=1) > radius
    return project_to_ball(values, radius), clipped


def _fixed_point(
    problem: BsdeProblem,
    config: SolverConfig,
    step: int,
    x: np.ndarray,
    continuation: np.ndarray,
    z: np.ndarray,
    weight: float,
) -> Tuple[np.ndarray, int]:
    # Damped iteration of y -> c + weight·f(t_i, x, y, z), started at the continuation value.
    t = float(problem.grid.points[step])
    y = continuation.copy()
    residual = np.zeros(len(y))
    for iteration in range(1, config.picard_iters + 1):
        target = continuation + weight * driver_values(problem.generator, t, x, y, z, step)
        gap = target - y
        residual = np.linalg.norm(gap, axis=1) / (1.0 + np.linalg.norm(y, axis=1))
        if np.max(residual) <= config.picard_tol:
            return target, iteration
        y = y + config.damping * gap
    worst = int(np.argmax(residual))
    raise FixedPointDivergenceError(
        f"The implicit step at t={t} did not converge in {config.picard_iters} iterations; "
        f"largest relative update {residual[worst]:.3e} on path {worst}.",
        path_index=worst,
        step_index=step,
        residual=float(residual[worst]),
    )


def solve_backward(  # pylint: disable=too-many-locals
    problem: BsdeProblem, paths: PathBatch, config: Optional[SolverConfig] = None
) -> BsdeSolution:
    """
    Solve a backward equation on simulated paths by least-squares Monte Carlo.

    Going backward from `Y_T = g(X_T)`, every step regresses on the basis functions of `X_{t_i}`:
    - `Z_{t_i}` is the regression of `(Y_{t_{i+1}} - Ŷ)·ΔW_iᵀ/Δt`, `Ŷ` being the regressed continuation of
      `Y_{t_{i+1}}`;
    - explicit: `Y_{t_i} = Ŷ + f(t_i, X, Ŷ, Z)·Δt`;
    - implicit: `Y_{t_i}` solves `y = c + θ·Δt·f(t_i, X, y, Z)` by damped fixed-point iteration, with `c` the
      regressed continuation of `Y_{t_{i+1}} + (1-θ)·Δt·f(t_{i+1}, X, Y_{t_{i+1}}, Z_{t_{i+1}})`.

    Regressed values and solutions are clipped to `|y| ≤ y_clip`.

    :param problem:
        The problem.
    :param paths:
        Paths simulated from the problem's diffusion on its grid.
    :param config:
        Solver settings; defaults to `SolverConfig()`.
    :returns:
        The solution, whose last value slice is the terminal data itself.
    :raises InvalidParametersError:
        If the paths do not match the problem.
    :raises FixedPointDivergenceError:
        If an implicit step does not converge.
    :raises NumericFaultError:
        If the driver or the terminal map return a non-finite value.
    """
    config = config or SolverConfig()
    grid = problem.grid
    if len(paths.grid.points) != len(grid.points) or not np.array_equal(paths.grid.points, grid.points):
        raise InvalidParametersError("The paths were simulated on another time grid than the problem's.")
    if (paths.dim_k, paths.dim_r) != (problem.diffusion.dim_k, problem.dim_r):
        raise InvalidParametersError(
            f"The paths have k={paths.dim_k}, r={paths.dim_r}; the problem needs "
            f"k={problem.diffusion.dim_k}, r={problem.dim_r}."
        )

    n_paths, n_steps, dim_d, dim_r = paths.n_paths, grid.n_steps, problem.dim_d, problem.dim_r
    Y = np.empty((n_paths, n_steps + 1, dim_d))
    Z = np.zeros((n_paths, n_steps, dim_d, dim_r))
    Y[:, n_steps] = problem.terminal_values(paths.terminal_states)
    y_clip = config.y_clip or default_y_clip(Y[:, n_steps])
    theta = config.theta if config.scheme == "implicit" else 1.0
    diagnostics = []

    for step in reversed(range(n_steps)):
        dt = float(grid.dt[step])
        t = float(grid.points[step])
        x = paths.states[:, step]
        y_next = Y[:, step + 1]

        continuation = regress(x, y_next, config.basis)
        z_targets = (y_next - continuation.fitted)[:, :, None] * paths.increments[:, step, None, :] / dt
        z_fit = regress(x, z_targets.reshape(n_paths, dim_d * dim_r), config.basis)
        Z[:, step] = z_fit.fitted.reshape(n_paths, dim_d, dim_r)

        fits: Tuple[RegressionResult, ...] = (continuation, z_fit)
        iterations = 0
        if config.scheme == "explicit":
            y_hat, clipped = _clip(continuation.fitted, y_clip)
            y_new = y_hat + dt * driver_values(problem.generator, t, x, y_hat, Z[:, step], step)
        else:
            if theta < 1.0:
                z_next = Z[:, step + 1] if step + 1 < n_steps else Z[:, step]
                t_next, x_next = float(grid.points[step + 1]), paths.states[:, step + 1]
                f_next = driver_values(problem.generator, t_next, x_next, y_next, z_next, step + 1)
                continuation = regress(x, y_next + (1.0 - theta) * dt * f_next, config.basis)
                fits = (continuation, z_fit)
            c, clipped = _clip(continuation.fitted, y_clip)
            y_new, iterations = _fixed_point(problem, config, step, x, c, Z[:, step], theta * dt)
        Y[:, step], clipped_after = _clip(y_new, y_clip)
        clip_count = int(np.count_nonzero(clipped | clipped_after))

        diagnostics.append(
            StepDiagnostics(
                step=step,
                residual_rms=continuation.residual_rms,
                condition_number=max(fit.condition_number for fit in fits),
                rank_deficient=any(fit.rank_deficient for fit in fits),
                clip_count=clip_count,
                iterations=iterations,
            )
        )
        logger.debug(
            "Step {step}: residual {residual}, {iterations} fixed-point iterations",
            step=step,
            residual=continuation.residual_rms,
            iterations=iterations,
        )

    diagnostics.reverse()
    deficient = sum(d.rank_deficient for d in diagnostics)
    if deficient:
        logger.warning("{count} regressions were rank deficient and fell back to cell means", count=deficient)
    clips = sum(d.clip_count for d in diagnostics)
    if clips:
        logger.warning("Clipped {count} values to |y| <= {radius}", count=clips, radius=y_clip)
    logger.info(
        "Solved {label} backward over {steps} steps on {n_paths} paths",
        label=problem.generator.label,
        steps=n_steps,
        n_paths=n_paths,
    )
    return BsdeSolution(grid=grid, Y=Y, Z=Z, scheme=config.scheme, diagnostics=diagnostics)
