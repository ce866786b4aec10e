# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from typing import Union

import numpy as np
from haystack import logging
from scipy.integrate import solve_ivp

from logbsde_lab.dataclasses.generator import Generator
from logbsde_lab.dataclasses.time_grid import TimeGrid
from logbsde_lab.errors import DivergenceError, InvalidParametersError, OracleMismatchError

logger = logging.getLogger(__name__)

#: Values beyond this magnitude count as a blow-up of the backward ODE.
BLOW_UP_LEVEL = 1e10

_LOG_DRIFT_KINDS = ("log_drift", "neveu")


def log_drift_closed_form(
    xi: np.ndarray, K: float, t: Union[float, np.ndarray], T: float
) -> np.ndarray:
    """
    Solution of `Y′ = K·Y·log|Y|`, `Y(T) = ξ`, that is `Y_t = ξ/|ξ|·exp(e^{-K(T-t)}·log|ξ|)`.

    The direction of `ξ` is preserved and `ξ = 0` stays at zero.

    :param xi:
        Terminal value of shape `(d,)`.
    :param K:
        The coefficient.
    :param t:
        Times, a scalar or shape `(m,)`.
    :param T:
        The horizon.
    :returns:
        Values of shape `(m, d)`, or `(d,)` for a scalar time.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    norm = float(np.linalg.norm(xi))
    times = np.asarray(t, dtype=float)
    if norm == 0:
        return np.zeros(times.shape + xi.shape)
    radius = np.exp(np.exp(-K * (T - times)) * np.log(norm))
    return np.multiply.outer(radius, xi / norm)


def ode_reduction_solve(
    generator: Generator,
    xi: np.ndarray,
    grid: TimeGrid,
    integrator_tol: float = 1e-10,
    cross_check: bool = True,
) -> np.ndarray:
    """
    Deterministic solution of a backward equation with constant terminal data and a driver free of `x` and `z`.

    Then `Z ≡ 0` and `Y` solves the backward ODE `Y′(t) = -f(Y(t))`, `Y(T) = ξ`, integrated here with an
    adaptive eighth-order Runge-Kutta method. For the logarithmic drift `-K·y·log|y|` the result is compared with
    the closed form `Y_t = exp(e^{-K(T-t)}·log ξ)`.

    :param generator:
        The driver, free of `x` and `z`.
    :param xi:
        Terminal value of shape `(d,)`.
    :param grid:
        The time grid.
    :param integrator_tol:
        Relative tolerance of the integrator.
    :param cross_check:
        Whether to compare logarithmic drifts with their closed form.
    :returns:
        Values of shape `(n_steps + 1, d)` on the grid.
    :raises InvalidParametersError:
        If the driver depends on `x` or `z`, or `ξ` has the wrong dimension.
    :raises DivergenceError:
        If `|Y|` exceeds `1e10`.
    :raises OracleMismatchError:
        If the closed-form cross-check fails.
    """
    if not (generator.x_free and generator.z_free):
        raise InvalidParametersError(f"The ODE reduction needs a driver free of x and z, got {generator.label}.")
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape != (generator.dim_d,):
        raise InvalidParametersError(f"xi must have {generator.dim_d} components, got shape {xi.shape}.")
    if grid.is_degenerate:
        return xi[None, :].copy()

    zero_x = np.zeros((1, 1))
    zero_z = np.zeros((1, generator.dim_d, generator.dim_r))

    # In reversed time s = T - t the equation reads dY/ds = f(Y).
    def rhs(s: float, y: np.ndarray) -> np.ndarray:
        return generator.evaluate(np.array([grid.T - s]), zero_x, y[None, :], zero_z)[0]

    def blow_up(s: float, y: np.ndarray) -> float:
        return BLOW_UP_LEVEL - float(np.max(np.abs(y)))

    blow_up.terminal = True  # type: ignore[attr-defined]

    reversed_times = grid.T - grid.points[::-1]
    reversed_times[0] = 0.0
    solution = solve_ivp(
        rhs,
        (0.0, float(reversed_times[-1])),
        xi,
        method="DOP853",
        t_eval=reversed_times,
        rtol=integrator_tol,
        atol=integrator_tol * 1e-2,
        events=blow_up,
    )
    if solution.status == 1 or not np.all(np.isfinite(solution.y)):
        raise DivergenceError(f"The backward ODE of {generator.label} blew up beyond {BLOW_UP_LEVEL:g}.")
    if not solution.success:
        raise DivergenceError(f"The backward ODE of {generator.label} failed: {solution.message}")
    values = solution.y.T[::-1].copy()
    values[-1] = xi

    if cross_check and generator.kind in _LOG_DRIFT_KINDS:
        K = float(generator.params.get("K", 1.0))
        exact = log_drift_closed_form(xi, K, grid.points, grid.T)
        error = float(np.max(np.abs(values - exact) / (1.0 + np.abs(exact))))
        if error > 1e3 * integrator_tol + 1e-12:
            raise OracleMismatchError(
                f"ODE reduction of {generator.label} deviates from the closed form by {error:.3e}."
            )
        logger.debug("Closed-form cross-check passed with relative error {error}", error=error)
    return values
