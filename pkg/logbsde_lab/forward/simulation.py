# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from concurrent.futures import ThreadPoolExecutor
from typing import List, Tuple

import numpy as np
from haystack import logging

from logbsde_lab.dataclasses.diffusion import DiffusionSpec
from logbsde_lab.dataclasses.path_batch import PathBatch
from logbsde_lab.dataclasses.time_grid import TimeGrid
from logbsde_lab.errors import InvalidParametersError, NumericFaultError
from logbsde_lab.util.seeding import block_generator

logger = logging.getLogger(__name__)

#: Paths are drawn in blocks of this size, each block from its own counter-based stream.
PATH_BLOCK_SIZE = 1024

_NON_FINITE_COEFFICIENT = "Non-finite {name} on path {path_index} at step {step_index} (t={time})."


def _initial_states(x0: np.ndarray, dim_k: int, n_paths: int) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim <= 1:
        x0 = np.broadcast_to(np.atleast_1d(x0), (n_paths, x0.size if x0.ndim else 1))
    if x0.shape != (n_paths, dim_k):
        raise InvalidParametersError(f"x0 must have {dim_k} coordinates per path, got shape {x0.shape}.")
    return np.array(x0, dtype=float)


def brownian_increments(
    seed: int, grid: TimeGrid, n_paths: int, dim_r: int, block_size: int = PATH_BLOCK_SIZE
) -> np.ndarray:
    """
    Draw Brownian increments for a batch of paths.

    Path `p` takes its draws from block `p // block_size`, at a fixed offset inside that block, so
    the increments of a path do not depend on `n_paths` or on how blocks are split between workers.

    :param seed:
        Seed of the batch.
    :param grid:
        The time grid.
    :param n_paths:
        Number of paths.
    :param dim_r:
        Brownian dimension.
    :param block_size:
        Paths per stream.
    :returns:
        Increments of shape `(n_paths, n_steps, dim_r)`.
    """
    n_steps = grid.n_steps
    increments = np.empty((n_paths, n_steps, dim_r))
    if n_steps == 0:
        return increments
    scale = np.sqrt(grid.dt)[None, :, None]
    for block, start in enumerate(range(0, n_paths, block_size)):
        stop = min(start + block_size, n_paths)
        rng = block_generator(seed, block)
        increments[start:stop] = rng.standard_normal((stop - start, n_steps, dim_r)) * scale
    return increments


def _euler_chunk(
    spec: DiffusionSpec, grid: TimeGrid, x0: np.ndarray, increments: np.ndarray, offset: int
) -> np.ndarray:
    n_paths = x0.shape[0]
    states = np.empty((n_paths, grid.n_steps + 1, spec.dim_k))
    states[:, 0, :] = x0
    dt = grid.dt
    for step in range(grid.n_steps):
        x = states[:, step, :]
        drift = spec.drift_at(x)
        sigma = spec.sigma_at(x)
        for name, values in (("drift", drift), ("diffusion", sigma)):
            finite = np.isfinite(values).reshape(n_paths, -1).all(axis=1)
            if not finite.all():
                path_index = offset + int(np.argmin(finite))
                raise NumericFaultError(
                    _NON_FINITE_COEFFICIENT.format(
                        name=name, path_index=path_index, step_index=step, time=grid.points[step]
                    ),
                    path_index=path_index,
                    step_index=step,
                )
        states[:, step + 1, :] = x + drift * dt[step] + np.einsum("nkr,nr->nk", sigma, increments[:, step, :])
    return states


def _chunk_bounds(n_paths: int, n_jobs: int, block_size: int) -> List[Tuple[int, int]]:
    n_blocks = -(-n_paths // block_size)
    per_job = -(-n_blocks // max(1, n_jobs))
    bounds = []
    for first_block in range(0, n_blocks, per_job):
        start = first_block * block_size
        stop = min((first_block + per_job) * block_size, n_paths)
        bounds.append((start, stop))
    return bounds


def simulate_paths(
    spec: DiffusionSpec,
    grid: TimeGrid,
    x0: np.ndarray,
    n_paths: int,
    seed: int,
    *,
    n_jobs: int = 1,
    block_size: int = PATH_BLOCK_SIZE,
) -> PathBatch:
    """
    Simulate the forward diffusion with the Euler-Maruyama scheme.

    Each path follows `X_{i+1} = X_i + b(X_i)Δt_i + σ(X_i)ΔW_i`. The result is bit-identical for
    identical arguments, whatever the value of `n_jobs`.

    :param spec:
        The diffusion coefficients.
    :param grid:
        The time grid.
    :param x0:
        Initial state of shape `(k,)`, or one initial state per path of shape `(n_paths, k)`.
    :param n_paths:
        Number of paths.
    :param seed:
        64-bit seed.
    :param n_jobs:
        Number of worker threads; work is split along whole path blocks.
    :param block_size:
        Paths per random stream.
    :returns:
        The path batch.
    :raises NumericFaultError:
        If the drift or the diffusion returns a non-finite value.
    """
    if n_paths < 1:
        raise InvalidParametersError(f"n_paths must be at least 1, got {n_paths}.")
    initial = _initial_states(x0, spec.dim_k, n_paths)
    increments = brownian_increments(seed, grid, n_paths, spec.dim_r, block_size=block_size)

    bounds = _chunk_bounds(n_paths, n_jobs, block_size)
    if n_jobs > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as executor:
            chunks = list(
                executor.map(
                    lambda b: _euler_chunk(spec, grid, initial[b[0] : b[1]], increments[b[0] : b[1]], b[0]), bounds
                )
            )
        states = np.concatenate(chunks, axis=0)
    else:
        states = _euler_chunk(spec, grid, initial, increments, 0)

    logger.debug(
        "Simulated {n_paths} paths over {n_steps} steps with seed {seed}",
        n_paths=n_paths,
        n_steps=grid.n_steps,
        seed=seed,
    )
    return PathBatch(grid=grid, states=states, increments=increments, seed=seed)
