# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from typing import Optional, Tuple

import numpy as np
from haystack import logging
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.linalg import solve_banded

from logbsde_lab.dataclasses.pde_field import PdeField, Provenance
from logbsde_lab.errors import NewtonConvergenceError, UnsupportedDimensionError
from logbsde_lab.pde.characteristics import characteristic_value, drift_flow
from logbsde_lab.pde.problem import PdeProblem

logger = logging.getLogger(__name__)

#: Cell Péclet number above which central differences of the drift may oscillate.
PECLET_LIMIT = 2.0


class FdMesh(BaseModel):
    """
    Mesh and time stepping of the one-dimensional finite difference reference.

    `theta = 1` is backward Euler in reverse time, `theta = 0.5` Crank-Nicolson.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    nx: int = Field(default=201, ge=3)
    nt: int = Field(default=200, ge=1)
    x_min: float = -8.0
    x_max: float = 8.0
    theta: float = Field(default=1.0, ge=0.5, le=1.0)
    newton_tol: float = Field(default=1e-12, gt=0)
    newton_iters: int = Field(default=50, ge=1)

    @model_validator(mode="after")
    def _check_interval(self) -> "FdMesh":
        if not self.x_min < self.x_max:
            raise ValueError(f"x_min must lie below x_max, got {self.x_min} and {self.x_max}")
        return self


class _Stencil:
    """
    Central-difference operator `Lv = b·v′ + ½a·v″` and the nonlinearity on the interior nodes of one time slice.
    """

    def __init__(self, problem: PdeProblem, x: np.ndarray):
        states = x[:, None]
        self.problem = problem
        self.x = x
        self.h = float(x[1] - x[0])
        self.b = problem.diffusion.drift_at(states)[:, 0]
        self.sigma = problem.diffusion.sigma_at(states)[:, 0, :]
        self.a = np.sum(self.sigma**2, axis=1)

    def slope(self, v: np.ndarray) -> np.ndarray:
        return (v[2:] - v[:-2]) / (2.0 * self.h)

    def apply(self, v: np.ndarray) -> np.ndarray:
        curvature = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / self.h**2
        return self.b[1:-1] * self.slope(v) + 0.5 * self.a[1:-1] * curvature

    def nonlinearity(self, t: float, y: np.ndarray, slope: np.ndarray) -> np.ndarray:
        sigma = self.sigma[1:-1]
        z = (slope[:, None] * sigma)[:, None, :]
        states = self.x[1:-1, None]
        return self.problem.F.evaluate(np.full(len(y), t), states, y[:, None], z)[:, 0]

    def partials(self, t: float, y: np.ndarray, slope: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Central-difference derivatives of the nonlinearity in `y` and in the slope `v′`.
        """
        eps_y = 1e-7 * (1.0 + np.abs(y))
        eps_s = 1e-7 * (1.0 + np.abs(slope))
        d_y = (self.nonlinearity(t, y + eps_y, slope) - self.nonlinearity(t, y - eps_y, slope)) / (2.0 * eps_y)
        if self.problem.F.z_free or not np.any(self.sigma):
            return d_y, np.zeros_like(y)
        d_s = (self.nonlinearity(t, y, slope + eps_s) - self.nonlinearity(t, y, slope - eps_s)) / (2.0 * eps_s)
        return d_y, d_s

    def explicit_part(self, t: float, v: np.ndarray) -> np.ndarray:
        return self.apply(v) + self.nonlinearity(t, v[1:-1], self.slope(v))

    def peclet(self) -> float:
        with np.errstate(divide="ignore", invalid="ignore"):
            numbers = np.where(self.b == 0, 0.0, np.abs(self.b) * self.h / self.a)
        return float(np.max(numbers))


def _newton_step(  # pylint: disable=too-many-locals
    stencil: _Stencil, mesh: FdMesh, t: float, guess: np.ndarray, rhs: np.ndarray, weight: float
) -> np.ndarray:
    """
    Solve `v - weight·(Lv + F(t, x, v, σ*v′)) = rhs` on the interior nodes, the boundary values of `guess` fixed.
    """
    v = guess.copy()
    h, b, a = stencil.h, stencil.b[1:-1], stencil.a[1:-1]
    for _ in range(mesh.newton_iters):
        residual = v[1:-1] - weight * stencil.explicit_part(t, v) - rhs
        scale = 1.0 + float(np.max(np.abs(v)))
        if not np.all(np.isfinite(residual)):
            break
        if float(np.max(np.abs(residual))) <= mesh.newton_tol * scale:
            return v
        d_y, d_s = stencil.partials(t, v[1:-1], stencil.slope(v))
        diagonal = 1.0 - weight * (-a / h**2 + d_y)
        upper = -weight * ((b + d_s) / (2.0 * h) + a / (2.0 * h**2))
        lower = -weight * (-(b + d_s) / (2.0 * h) + a / (2.0 * h**2))
        banded = np.zeros((3, len(diagonal)))
        banded[0, 1:] = upper[:-1]
        banded[1] = diagonal
        banded[2, :-1] = lower[1:]
        v[1:-1] -= solve_banded((1, 1), banded, residual)

    residual = v[1:-1] - weight * stencil.explicit_part(t, v) - rhs
    worst = int(np.nanargmax(np.where(np.isfinite(residual), np.abs(residual), np.inf)))
    raise NewtonConvergenceError(
        f"Newton iteration did not converge at t={t}, x={stencil.x[worst + 1]} after {mesh.newton_iters} iterations.",
        time=t,
        x=float(stencil.x[worst + 1]),
    )


def fd_reference_1d(  # pylint: disable=too-many-locals
    problem: PdeProblem, mesh: Optional[FdMesh] = None
) -> PdeField:
    """
    Finite difference reference solution of a scalar problem in one space dimension.

    Time runs backward from `u(T) = g` with the θ-scheme
    `u^n - θΔt(Lu^n + F^n(u^n)) = u^{n+1} + (1-θ)Δt(Lu^{n+1} + F^{n+1}(u^{n+1}))`, central differences in space
    and a Newton iteration on tridiagonal systems for the nonlinearity. The edge values follow the characteristics
    of the drift, the diffusion being ignored there; the domain should be wide enough for that error to vanish
    under the weight of the norms.

    :param problem:
        A problem with `k = d = 1`.
    :param mesh:
        The mesh; defaults to `FdMesh()`.
    :returns:
        The field on `nt + 1` times and `nx` nodes, with `σ*∇u` and `∇u` by central differences.
    :raises UnsupportedDimensionError:
        If `k` or `d` is not one.
    :raises NewtonConvergenceError:
        If a Newton iteration fails, carrying the time and the worst node.
    """
    if problem.dim_k != 1 or problem.dim_d != 1:
        raise UnsupportedDimensionError(
            f"The finite difference reference needs k = d = 1, got k={problem.dim_k}, d={problem.dim_d}."
        )
    mesh = mesh or FdMesh()
    x = np.linspace(mesh.x_min, mesh.x_max, mesh.nx)
    times = np.linspace(0.0, problem.T, mesh.nt + 1)
    times[-1] = problem.T
    dt = problem.T / mesh.nt
    stencil = _Stencil(problem, x)
    peclet = stencil.peclet()
    if peclet > PECLET_LIMIT:
        logger.warning(
            "Mesh Péclet number {peclet} exceeds {limit}; central differences may oscillate",
            peclet=peclet,
            limit=PECLET_LIMIT,
        )

    edges = [drift_flow(problem, np.array([x[index]]), problem.T) for index in (0, -1)]
    u = np.empty((mesh.nt + 1, mesh.nx))
    u[-1] = problem.terminal(x[:, None])[:, 0]
    theta = mesh.theta
    for n in reversed(range(mesh.nt)):
        t, t_next = float(times[n]), float(times[n + 1])
        rhs = u[n + 1, 1:-1].copy()
        if theta < 1.0:
            rhs += (1.0 - theta) * dt * stencil.explicit_part(t_next, u[n + 1])
        guess = u[n + 1].copy()
        for index, flow in zip((0, -1), edges):
            guess[index] = characteristic_value(problem, t, np.array([x[index]]), flow=flow)[0]
        u[n] = _newton_step(stencil, mesh, t, guess, rhs, theta * dt)

    slope = np.gradient(u, x, axis=1)
    logger.info(
        "Finite difference reference on {nx} nodes and {nt} steps (theta={theta})",
        nx=mesh.nx,
        nt=mesh.nt,
        theta=theta,
    )
    return PdeField(
        t_grid=times,
        x_axes=[x],
        u=u[:, :, None],
        provenance=Provenance.FINITE_DIFFERENCE,
        sigma_grad_u=slope[:, :, None, None] * stencil.sigma[None, :, None, :],
        grad_u=slope[:, :, None, None],
        missing=np.zeros(u.shape, dtype=bool),
    )
