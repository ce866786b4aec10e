# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

import numpy as np
from haystack import logging

from logbsde_lab.dataclasses.generator import Generator
from logbsde_lab.dataclasses.pde_field import tensor_nodes
from logbsde_lab.errors import IncompatibleGeneratorsError, InvalidParametersError

logger = logging.getLogger(__name__)

# Largest number of (y, z) points evaluated at once.
_CHUNK = 200_000


def _ball_grid(level: float, dim: int, density: int) -> np.ndarray:
    axis = np.linspace(-level, level, density)
    nodes = tensor_nodes([axis] * dim)
    return nodes[np.linalg.norm(nodes, axis=1) <= level * (1 + 1e-12)]


def rho_N(g1: Generator, g2: Generator, N: float, t: float, x, grid_density: int = 101) -> float:
    """
    Sampled `sup_{|y|, |z| ≤ N} |f1(t, x, y, z) - f2(t, x, y, z)|`.

    The supremum runs over the points of the tensor grid `linspace(-N, N, grid_density)` in every
    coordinate that lie in the balls, so it is a lower bound of the true supremum. When both drivers
    ignore `z` the control is fixed to zero.

    :param g1:
        First generator.
    :param g2:
        Second generator.
    :param N:
        Radius, `N > 0`.
    :param t:
        Time.
    :param x:
        State of shape `(k,)`, or a scalar.
    :param grid_density:
        Grid points per axis.
    :returns:
        The sampled distance.
    :raises IncompatibleGeneratorsError:
        If the generators differ in `d` or `r`.
    """
    if (g1.dim_d, g1.dim_r) != (g2.dim_d, g2.dim_r):
        raise IncompatibleGeneratorsError(
            f"Cannot compare generators of dimensions (d={g1.dim_d}, r={g1.dim_r}) and (d={g2.dim_d}, r={g2.dim_r})."
        )
    if N <= 0:
        raise InvalidParametersError(f"N must be positive, got {N}.")
    if grid_density < 2:
        raise InvalidParametersError(f"grid_density must be at least 2, got {grid_density}.")
    dim_d, dim_r = g1.dim_d, g1.dim_r
    x = np.atleast_1d(np.asarray(x, dtype=float))

    y_points = _ball_grid(N, dim_d, grid_density)
    if g1.z_free and g2.z_free:
        z_points = np.zeros((1, dim_d * dim_r))
    else:
        z_points = _ball_grid(N, dim_d * dim_r, grid_density)

    total = len(y_points) * len(z_points)
    logger.debug("rho_N over {total} grid points", total=total)
    best = 0.0
    for start in range(0, total, _CHUNK):
        index = np.arange(start, min(start + _CHUNK, total))
        y = y_points[index // len(z_points)]
        z = z_points[index % len(z_points)].reshape(-1, dim_d, dim_r)
        t_batch = np.full(len(index), float(t))
        x_batch = np.broadcast_to(x, (len(index), x.shape[0]))
        difference = g1.evaluate(t_batch, x_batch, y, z) - g2.evaluate(t_batch, x_batch, y, z)
        best = max(best, float(np.max(np.linalg.norm(difference, axis=1))))
    return best
