# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from typing import Callable, Optional

import numpy as np
from haystack import logging
from scipy.integrate import solve_ivp
from tqdm import tqdm

from logbsde_lab.dataclasses.pde_field import PdeField, Provenance, tensor_nodes
from logbsde_lab.errors import DivergenceError, InvalidParametersError
from logbsde_lab.pde.monte_carlo import as_axes
from logbsde_lab.pde.problem import PdeProblem
from logbsde_lab.solvers.oracles import BLOW_UP_LEVEL

logger = logging.getLogger(__name__)

Flow = Callable[[float], np.ndarray]


def _blow_up(s: float, y: np.ndarray) -> float:
    return BLOW_UP_LEVEL - float(np.max(np.abs(y)))


_blow_up.terminal = True  # type: ignore[attr-defined]


def drift_flow(problem: PdeProblem, x: np.ndarray, duration: float, ode_tol: float = 1e-10) -> Flow:
    """
    The flow `τ -> φ_τ(x)` of `Ẋ = b(X)` on `[0, duration]`.

    :param problem:
        The problem providing `b`.
    :param x:
        Start state of shape `(k,)`.
    :param duration:
        Length of the flow interval.
    :param ode_tol:
        Relative tolerance of the integrator.
    :returns:
        The dense flow.
    :raises DivergenceError:
        If the flow leaves `|x| ≤ 1e10` within the interval.
    """
    x = np.asarray(x, dtype=float)
    if duration <= 0:
        return lambda tau: x.copy()

    def rhs(s: float, state: np.ndarray) -> np.ndarray:
        return problem.diffusion.drift_at(state[None, :])[0]

    flow = solve_ivp(
        rhs,
        (0.0, duration),
        x,
        method="DOP853",
        dense_output=True,
        rtol=ode_tol,
        atol=ode_tol * 1e-2,
        events=_blow_up,
    )
    if flow.status == 1 or not flow.success:
        raise DivergenceError(f"The flow of b from x={x.tolist()} blew up before {duration}.")
    return lambda tau: flow.sol(min(max(tau, 0.0), duration))


def characteristic_value(
    problem: PdeProblem, t: float, x: np.ndarray, ode_tol: float = 1e-10, flow: Optional[Flow] = None
) -> np.ndarray:
    """
    `u(t, x)` along the characteristic of `b` through `(t, x)`, the diffusion being ignored.

    Integrates `Y′(s) = -F(s, X_s, Y_s, 0)` backward from `Y_T = g(X_T)`, where `X_s = φ_{s-t}(x)`.

    :param problem:
        The problem.
    :param t:
        Time in `[0, T]`.
    :param x:
        State of shape `(k,)`.
    :param ode_tol:
        Relative tolerance of the integrators.
    :param flow:
        Precomputed flow from `x` covering `[0, T - t]`.
    :returns:
        The value of shape `(d,)`.
    :raises DivergenceError:
        If the flow or the backward equation blows up.
    """
    x = np.asarray(x, dtype=float)
    horizon = problem.T
    flow = flow or drift_flow(problem, x, horizon - t, ode_tol)
    terminal = problem.terminal(flow(horizon - t)[None, :])[0]
    if t == horizon:
        return terminal
    zero_z = np.zeros((1, problem.dim_d, problem.dim_r))

    def rhs(s: float, y: np.ndarray) -> np.ndarray:
        state = flow(s - t)[None, :]
        return -problem.F.evaluate(np.array([s]), state, y[None, :], zero_z)[0]

    solution = solve_ivp(
        rhs, (horizon, t), terminal, method="DOP853", rtol=ode_tol, atol=ode_tol * 1e-2, events=_blow_up
    )
    if solution.status == 1 or not solution.success or not np.all(np.isfinite(solution.y[:, -1])):
        raise DivergenceError(f"The backward equation along the characteristic of x={x.tolist()} blew up.")
    return solution.y[:, -1]


def characteristics_oracle(
    problem: PdeProblem, x_grid, t_grid, *, ode_tol: float = 1e-10, show_progress: bool = False
) -> PdeField:
    """
    Solve a first order system (`σ ≡ 0`) exactly along the characteristics of the drift.

    Every node integrates the flow of `b` once and then the backward equation of `Y` from every time of the grid.
    Nodes whose flow or backward equation blows up are marked missing. The terminal slice is `g` itself and
    `σ*∇u ≡ 0`.

    :param problem:
        A problem whose diffusion vanishes on the grid.
    :param x_grid:
        Per-axis coordinates, or a 1-d array when `k = 1`.
    :param t_grid:
        Increasing times in `[0, T]`.
    :param ode_tol:
        Relative tolerance of the integrators.
    :param show_progress:
        Whether to show a progress bar over the nodes.
    :returns:
        The field.
    :raises InvalidParametersError:
        If `σ` does not vanish on the nodes or the grids are malformed.
    """
    x_axes = as_axes(x_grid)
    if len(x_axes) != problem.dim_k:
        raise InvalidParametersError(f"The spatial grid has {len(x_axes)} axes, the problem has k={problem.dim_k}.")
    nodes = tensor_nodes(x_axes)
    if not problem.diffusion.is_degenerate_at(nodes):
        raise InvalidParametersError("The characteristics oracle needs a vanishing diffusion coefficient.")
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if np.any(np.diff(t_grid) <= 0) or t_grid[0] < 0 or t_grid[-1] > problem.T:
        raise InvalidParametersError(f"The time grid must be increasing within [0, {problem.T}].")

    u = np.full((len(t_grid), len(nodes), problem.dim_d), np.nan)
    missing = np.zeros((len(t_grid), len(nodes)), dtype=bool)
    for j in tqdm(range(len(nodes)), desc="Characteristics", disable=not show_progress):
        try:
            flow = drift_flow(problem, nodes[j], problem.T - float(t_grid[0]), ode_tol)
        except DivergenceError as error:
            logger.warning("Flow from node {x} blew up: {error}", x=nodes[j].tolist(), error=str(error))
            missing[:, j] = True
            continue
        for i, t in enumerate(t_grid):
            if t == problem.T:
                u[i, j] = problem.terminal(nodes[j][None, :])[0]
                continue
            try:
                u[i, j] = characteristic_value(problem, float(t), nodes[j], ode_tol, flow=flow)
            except DivergenceError as error:
                logger.warning("Node t={t}, x={x} blew up: {error}", t=float(t), x=nodes[j].tolist(), error=str(error))
                missing[i, j] = True

    if missing.any():
        logger.warning("{count} of {total} nodes are missing", count=int(missing.sum()), total=missing.size)
    return PdeField(
        t_grid=t_grid,
        x_axes=x_axes,
        u=u,
        provenance=Provenance.CHARACTERISTICS,
        sigma_grad_u=np.zeros((len(t_grid), len(nodes), problem.dim_d, problem.dim_r)),
        missing=missing,
    )
