# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from logbsde_lab.dataclasses.time_grid import TimeGrid

_DUMP_MAGIC = b"LBSDEPB1"


@dataclass(frozen=True)
class PathBatch:
    """
    Forward trajectories on a time grid with their Brownian increments.

    The batch is immutable once built and can be shared read-only between workers.

    :param grid:
        The time grid.
    :param states:
        Array of shape `(n_paths, n_steps + 1, k)`.
    :param increments:
        Brownian increments of shape `(n_paths, n_steps, r)`.
    :param seed:
        Seed the batch was generated from.
    """

    grid: TimeGrid
    states: np.ndarray = field(repr=False)
    increments: np.ndarray = field(repr=False)
    seed: int = 0

    def __post_init__(self):
        for array in (self.states, self.increments):
            array.setflags(write=False)

    @property
    def n_paths(self) -> int:
        """
        Number of trajectories.
        """
        return self.states.shape[0]

    @property
    def dim_k(self) -> int:
        """
        State dimension.
        """
        return self.states.shape[2]

    @property
    def dim_r(self) -> int:
        """
        Brownian dimension.
        """
        return self.increments.shape[2]

    @property
    def x0(self) -> np.ndarray:
        """
        Initial states, shape `(n_paths, k)`.
        """
        return self.states[:, 0, :]

    @property
    def terminal_states(self) -> np.ndarray:
        """
        States at the final grid time, shape `(n_paths, k)`.
        """
        return self.states[:, -1, :]

    def dump(self, path: Union[str, Path]) -> None:
        """
        Write the batch as a binary dump.

        The file holds a magic tag, a JSON header with dimensions, grid and seed, and the row-major
        float64 payload of the states followed by the increments.

        :param path:
            Destination file.
        """
        header = json.dumps(
            {
                "n_paths": self.n_paths,
                "dim_k": self.dim_k,
                "dim_r": self.dim_r,
                "grid": self.grid.points.tolist(),
                "seed": self.seed,
            },
            sort_keys=True,
        ).encode("utf-8")
        with open(path, "wb") as handle:
            handle.write(_DUMP_MAGIC)
            handle.write(struct.pack("<Q", len(header)))
            handle.write(header)
            handle.write(np.ascontiguousarray(self.states, dtype="<f8").tobytes())
            handle.write(np.ascontiguousarray(self.increments, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path: Union[str, Path]) -> "PathBatch":
        """
        Read a batch written by `dump`.

        :param path:
            Source file.
        :returns:
            The batch.
        :raises ValueError:
            If the file is not a path batch dump.
        """
        with open(path, "rb") as handle:
            if handle.read(len(_DUMP_MAGIC)) != _DUMP_MAGIC:
                raise ValueError(f"'{path}' is not a path batch dump.")
            (header_length,) = struct.unpack("<Q", handle.read(8))
            header = json.loads(handle.read(header_length).decode("utf-8"))
            payload = np.frombuffer(handle.read(), dtype="<f8")

        points = np.asarray(header["grid"], dtype=float)
        n_paths, dim_k, dim_r = header["n_paths"], header["dim_k"], header["dim_r"]
        n_points = len(points)
        n_states = n_paths * n_points * dim_k
        states = payload[:n_states].reshape(n_paths, n_points, dim_k).astype(float)
        increments = payload[n_states:].reshape(n_paths, n_points - 1, dim_r).astype(float)
        grid = TimeGrid(t0=float(points[0]), T=float(points[-1]), points=points)
        return cls(grid=grid, states=states, increments=increments, seed=header["seed"])
