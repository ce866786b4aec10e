# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Literal, Optional, Tuple

import numpy as np
from haystack import logging
from tqdm import tqdm

from logbsde_lab.dataclasses.pde_field import PdeField, Provenance, tensor_nodes
from logbsde_lab.errors import DivergenceError, FixedPointDivergenceError, InvalidParametersError, NumericFaultError
from logbsde_lab.pde.problem import PdeProblem
from logbsde_lab.solvers.backward import solve_backward
from logbsde_lab.solvers.config import SolverConfig
from logbsde_lab.util.seeding import derive_seed

logger = logging.getLogger(__name__)

FieldMode = Literal["per_node", "shared"]

# Matrices with a larger condition number are not inverted when reading ∇u from σ*∇u.
_MAX_CONDITION = 1e12

_NODE_FAILURES = (FixedPointDivergenceError, NumericFaultError, DivergenceError)


@dataclass
class _NodeValue:
    u: np.ndarray
    stderr: np.ndarray
    z: np.ndarray
    missing: bool


def as_axes(x_grid) -> List[np.ndarray]:
    """
    Normalize a spatial grid given as one 1-d array (for `k = 1`) or a sequence of per-axis arrays.
    """
    if isinstance(x_grid, np.ndarray) and x_grid.ndim == 1:
        return [x_grid.astype(float)]
    if len(x_grid) and np.ndim(x_grid[0]) == 0:
        return [np.asarray(x_grid, dtype=float)]
    return [np.atleast_1d(np.asarray(axis, dtype=float)) for axis in x_grid]


def _check_times(t_grid: np.ndarray, horizon: float) -> np.ndarray:
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if np.any(np.diff(t_grid) <= 0):
        raise InvalidParametersError("The time grid must be increasing.")
    if t_grid[0] < 0 or t_grid[-1] > horizon:
        raise InvalidParametersError(f"The time grid must lie in [0, {horizon}], got [{t_grid[0]}, {t_grid[-1]}].")
    return t_grid


def _steps(t: float, horizon: float, steps_per_unit: float) -> int:
    return max(1, math.ceil((horizon - t) * steps_per_unit - 1e-9))


def _solve_node(
    problem: PdeProblem, t: float, x: np.ndarray, config: SolverConfig, steps_per_unit: float, purpose: str
) -> _NodeValue:
    bsde = problem.bsde_problem(t, x, _steps(t, problem.T, steps_per_unit))
    nan_z = np.full((problem.dim_d, problem.dim_r), np.nan)
    try:
        paths = bsde.simulate(config.n_paths, derive_seed(config.seed, "pde", purpose))
        solution = solve_backward(bsde, paths, config)
    except _NODE_FAILURES as error:
        logger.warning("Node t={t}, x={x} diverged: {error}", t=t, x=x.tolist(), error=str(error))
        return _NodeValue(np.full(problem.dim_d, np.nan), np.full(problem.dim_d, np.nan), nan_z, True)

    u = solution.y0
    if not np.all(np.isfinite(u)) or solution.clip_count > 0:
        logger.warning(
            "Node t={t}, x={x} marked missing: {clips} clipped values", t=t, x=x.tolist(), clips=solution.clip_count
        )
        return _NodeValue(np.full(problem.dim_d, np.nan), np.full(problem.dim_d, np.nan), nan_z, True)
    z = solution.Z[:, 0].mean(axis=0) if solution.grid.n_steps else nan_z
    return _NodeValue(u, solution.y0_stderr, z, False)


def _per_node(
    problem: PdeProblem,
    t_grid: np.ndarray,
    nodes: np.ndarray,
    config: SolverConfig,
    steps_per_unit: float,
    show_progress: bool,
) -> List[List[_NodeValue]]:
    tasks = [(i, j) for i in range(len(t_grid)) for j in range(len(nodes))]

    def run(task: Tuple[int, int]) -> _NodeValue:
        i, j = task
        return _solve_node(problem, float(t_grid[i]), nodes[j], config, steps_per_unit, f"node-{i}-{j}")

    if config.n_jobs > 1:
        with ThreadPoolExecutor(max_workers=config.n_jobs) as executor:
            values = list(tqdm(executor.map(run, tasks), total=len(tasks), desc="Nodes", disable=not show_progress))
    else:
        values = [run(task) for task in tqdm(tasks, desc="Nodes", disable=not show_progress)]
    return [values[i * len(nodes) : (i + 1) * len(nodes)] for i in range(len(t_grid))]


def _shared(
    problem: PdeProblem,
    t_grid: np.ndarray,
    nodes: np.ndarray,
    config: SolverConfig,
    steps_per_unit: float,
    show_progress: bool,
) -> List[List[_NodeValue]]:
    n_nodes, d, r = len(nodes), problem.dim_d, problem.dim_r
    if config.n_paths < 2 * n_nodes:
        raise InvalidParametersError(f"The shared mode needs at least two paths per node, got {config.n_paths}.")
    labels = np.arange(config.n_paths) % n_nodes
    counts = np.bincount(labels, minlength=n_nodes).astype(float)
    slices = []
    for i in tqdm(range(len(t_grid)), desc="Time slices", disable=not show_progress):
        t = float(t_grid[i])
        bsde = problem.bsde_problem(t, nodes[0], _steps(t, problem.T, steps_per_unit))
        try:
            paths = bsde.simulate(
                config.n_paths, derive_seed(config.seed, "pde", f"slice-{i}"), n_jobs=config.n_jobs, x0=nodes[labels]
            )
            solution = solve_backward(bsde, paths, config)
        except _NODE_FAILURES as error:
            logger.warning("Time slice t={t} diverged: {error}", t=t, error=str(error))
            nan_value = _NodeValue(np.full(d, np.nan), np.full(d, np.nan), np.full((d, r), np.nan), True)
            slices.append([nan_value] * n_nodes)
            continue

        sums = np.zeros((n_nodes, d))
        np.add.at(sums, labels, solution.Y[:, 0])
        u = sums / counts[:, None]
        if solution.grid.n_steps:
            ahead = solution.Y[:, 1]
            means = np.zeros((n_nodes, d))
            np.add.at(means, labels, ahead)
            means /= counts[:, None]
            squares = np.zeros((n_nodes, d))
            np.add.at(squares, labels, (ahead - means[labels]) ** 2)
            stderr = np.sqrt(squares / (counts[:, None] - 1.0) / counts[:, None])
            z = np.zeros((n_nodes, d, r))
            np.add.at(z, labels, solution.Z[:, 0])
            z /= counts[:, None, None]
        else:
            stderr = np.zeros((n_nodes, d))
            z = np.full((n_nodes, d, r), np.nan)
        slices.append([_NodeValue(u[j], stderr[j], z[j], not np.all(np.isfinite(u[j]))) for j in range(n_nodes)])
    return slices


def _gradients(problem: PdeProblem, nodes: np.ndarray, sigma_grad_u: np.ndarray) -> Optional[np.ndarray]:
    if problem.dim_k != problem.dim_r:
        return None
    sigma = problem.diffusion.sigma_at(nodes)
    with np.errstate(divide="ignore", invalid="ignore"):
        invertible = np.linalg.cond(sigma) < _MAX_CONDITION
    if not np.any(invertible):
        return None
    grad_u = np.full(sigma_grad_u.shape[:3] + (problem.dim_k,), np.nan)
    # σ*∇u = ∇u·σ row-wise, so ∇uᵀ solves σᵀ·∇uᵀ = (σ*∇u)ᵀ.
    for j in np.flatnonzero(invertible):
        for i in range(sigma_grad_u.shape[0]):
            grad_u[i, j] = np.linalg.solve(sigma[j].T, sigma_grad_u[i, j].T).T
    return grad_u


def mc_field(  # pylint: disable=too-many-locals
    problem: PdeProblem,
    x_grid,
    t_grid,
    config: Optional[SolverConfig] = None,
    *,
    steps_per_unit: float = 100.0,
    mode: FieldMode = "per_node",
    show_progress: bool = False,
) -> PdeField:
    """
    Evaluate `u(t, x) = Y_t^{t,x}` and `σ*∇u(t, x) = Z_t^{t,x}` on a tensor grid by Monte Carlo.

    In the `per_node` mode every node solves its own backward equation on paths started at the node, from a
    seed derived from the node's indices; nodes are independent. The `shared` mode starts the paths of one
    backward equation per time slice at the nodes in turn and reads the node values from the regressed first
    step; it is faster but carries the bias of the regression basis across nodes.

    `σ*∇u` is read from `Z` directly and `∇u` is recovered where `σ` is square and invertible. At `t = T`, `u = g`
    and `σ*∇u` is not estimated. Nodes whose backward equation diverges or clips are marked missing.

    :param problem:
        The problem.
    :param x_grid:
        Per-axis coordinates, or a 1-d array when `k = 1`.
    :param t_grid:
        Increasing times in `[0, T]`.
    :param config:
        Solver settings; `n_jobs` parallelizes over nodes.
    :param steps_per_unit:
        Time steps per unit of time of every backward equation.
    :param mode:
        `per_node` or `shared`.
    :param show_progress:
        Whether to show a progress bar.
    :returns:
        The field, with standard errors and the missing mask.
    :raises InvalidParametersError:
        If the grids are malformed.
    """
    config = config or SolverConfig()
    x_axes = as_axes(x_grid)
    if len(x_axes) != problem.dim_k:
        raise InvalidParametersError(f"The spatial grid has {len(x_axes)} axes, the problem has k={problem.dim_k}.")
    t_grid = _check_times(t_grid, problem.T)
    nodes = tensor_nodes(x_axes)
    if mode == "per_node":
        values = _per_node(problem, t_grid, nodes, config, steps_per_unit, show_progress)
    elif mode == "shared":
        values = _shared(problem, t_grid, nodes, config, steps_per_unit, show_progress)
    else:
        raise InvalidParametersError(f"Unknown mode '{mode}', expected 'per_node' or 'shared'.")

    u = np.array([[value.u for value in row] for row in values])
    stderr = np.array([[value.stderr for value in row] for row in values])
    sigma_grad_u = np.array([[value.z for value in row] for row in values])
    missing = np.array([[value.missing for value in row] for row in values], dtype=bool)
    if missing.any():
        logger.warning("{count} of {total} nodes are missing", count=int(missing.sum()), total=missing.size)
    logger.info(
        "Monte Carlo field on {nt} times x {nodes} nodes ({mode})", nt=len(t_grid), nodes=len(nodes), mode=mode
    )
    return PdeField(
        t_grid=t_grid,
        x_axes=x_axes,
        u=u,
        provenance=Provenance.MONTE_CARLO,
        sigma_grad_u=sigma_grad_u,
        grad_u=_gradients(problem, nodes, sigma_grad_u),
        stderr=stderr,
        missing=missing,
    )
