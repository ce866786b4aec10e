# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from logbsde_lab.dataclasses.envelope import AssumptionEnvelope
from logbsde_lab.dataclasses.time_grid import TimeGrid
from logbsde_lab.errors import InvalidParametersError
from logbsde_lab.generators.examples import lambda_weight


@dataclass(frozen=True)
class WeightedProcesses:
    """
    The discounting weight `e_t = exp(∫_0^t λ_s ds)` and the process
    `Λ_t = |Y_t|²·e_t + 2∫_0^t e_s·η_s ds + (∫_0^t e_s^{1/2}·f⁰_s ds)²` on every path.

    All arrays have shape `(n_paths, n_steps + 1)`.

    :param grid:
        The time grid.
    :param log_e:
        `∫_0^t λ_s ds`.
    :param e:
        The weight `e_t`.
    :param Lambda:
        The process `Λ_t`.
    :param eta_part:
        The component `2∫_0^t e_s·η_s ds`.
    :param f0_part:
        The component `(∫_0^t e_s^{1/2}·f⁰_s ds)²`.
    :param p:
        Integrability exponent of the envelope.
    :param gamma:
        Weight exponent of the envelope.
    """

    grid: TimeGrid
    log_e: np.ndarray = field(repr=False)
    e: np.ndarray = field(repr=False)
    Lambda: np.ndarray = field(repr=False)
    eta_part: np.ndarray = field(repr=False)
    f0_part: np.ndarray = field(repr=False)
    p: float = 2.0
    gamma: float = 0.25

    @property
    def n_paths(self) -> int:
        return self.Lambda.shape[0]

    def is_consistent(self, rtol: float = 1e-12) -> bool:
        """
        Whether `Λ ≥ 0` and both integral components are nondecreasing in time on every path.

        :param rtol:
            Relative tolerance of the monotonicity test.
        :returns:
            `True` if all three properties hold.
        """
        if np.any(self.Lambda < 0):
            return False
        for part in (self.eta_part, self.f0_part):
            steps = np.diff(part, axis=1)
            if np.any(steps < -rtol * (1.0 + np.abs(part[:, 1:]))):
                return False
        return True


def _as_path_values(values: np.ndarray, n_points: int) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[None, :, None]
    elif values.ndim == 2:
        values = values[None, :, :] if values.shape[0] == n_points else values[:, :, None]
    return values


def lambda_path(
    Y: np.ndarray, env: AssumptionEnvelope, states: Optional[np.ndarray], grid: TimeGrid
) -> WeightedProcesses:
    """
    Evaluate the weight `e` and the process `Λ` along paths by trapezoidal quadrature.

    :param Y:
        Values of shape `(n_paths, n_steps + 1, d)`; a single path may be given as `(n_steps + 1, d)` or, for
        `d = 1`, as `(n_steps + 1,)`.
    :param env:
        Envelope providing `λ = 2M + K²/(2γ)`, `η` and `f⁰`.
    :param states:
        Forward states of shape `(n_paths, n_steps + 1, k)`; `None` evaluates the envelope at `x = 0`.
    :param grid:
        The time grid.
    :returns:
        The weighted processes.
    :raises InvalidParametersError:
        If the lengths of `Y`, `states` and `grid` disagree.
    """
    n_points = len(grid.points)
    Y = _as_path_values(Y, n_points)
    n_paths = Y.shape[0]
    if Y.shape[1] != n_points:
        raise InvalidParametersError(f"Y has {Y.shape[1]} time points, the grid has {n_points}.")
    if states is None:
        states = np.zeros((n_paths, n_points, 1))
    states = np.asarray(states, dtype=float)
    if states.shape[:2] != (n_paths, n_points):
        raise InvalidParametersError(
            f"states have shape {states.shape[:2]} in (paths, times), expected {(n_paths, n_points)}."
        )

    t = np.broadcast_to(grid.points, (n_paths, n_points)).ravel()
    x = states.reshape(n_paths * n_points, -1)
    weight = lambda_weight(env, t, x).reshape(n_paths, n_points)
    eta = np.asarray(env.eta(t, x), dtype=float).reshape(n_paths, n_points)
    f0 = np.asarray(env.f0(t, x), dtype=float).reshape(n_paths, n_points)

    with np.errstate(over="ignore"):
        log_e = cumulative_trapezoid(weight, grid.points, axis=1, initial=0.0)
        e = np.exp(log_e)
        eta_part = 2.0 * cumulative_trapezoid(e * eta, grid.points, axis=1, initial=0.0)
        f0_part = cumulative_trapezoid(np.sqrt(e) * f0, grid.points, axis=1, initial=0.0) ** 2
        Lambda = np.sum(Y**2, axis=2) * e + eta_part + f0_part
    return WeightedProcesses(
        grid=grid,
        log_e=log_e,
        e=e,
        Lambda=Lambda,
        eta_part=eta_part,
        f0_part=f0_part,
        p=env.p,
        gamma=env.gamma,
    )
