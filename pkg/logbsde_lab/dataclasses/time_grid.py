# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np

from logbsde_lab.errors import InvalidIntervalError, InvalidResolutionError


@dataclass(frozen=True)
class TimeGrid:
    """
    Strictly increasing discretization of `[t0, T]` shared by all processes of an experiment.

    :param t0:
        Initial time.
    :param T:
        Final time.
    :param points:
        Grid times, `points[0] == t0` and `points[-1] == T`.
    """

    t0: float
    T: float
    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        if points.ndim != 1 or len(points) == 0:
            raise InvalidResolutionError("A time grid needs at least one point.")
        if points[0] != self.t0 or points[-1] != self.T:
            raise InvalidIntervalError(f"Grid points must start at {self.t0} and end at {self.T}.")
        if len(points) > 1 and not np.all(np.diff(points) > 0):
            raise InvalidIntervalError("Grid points must be strictly increasing.")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @property
    def n_steps(self) -> int:
        """
        Number of intervals of the grid.
        """
        return len(self.points) - 1

    @property
    def dt(self) -> np.ndarray:
        """
        Interval lengths, one per step.
        """
        return np.diff(self.points)

    @property
    def is_degenerate(self) -> bool:
        """
        True for the single-point grid `{t0}`.
        """
        return self.n_steps == 0

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes the grid to a dictionary.

        :returns:
            Dictionary with `t0`, `T` and `n_steps`.
        """
        return {"t0": self.t0, "T": self.T, "n_steps": self.n_steps}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TimeGrid":
        """
        Deserializes a grid written by `to_dict`.

        :param data:
            Dictionary with `t0`, `T` and `n_steps`.
        :returns:
            The uniform grid.
        """
        return make_time_grid(data["t0"], data["T"], data["n_steps"])


def make_time_grid(t0: float, T: float, n_steps: int) -> TimeGrid:
    """
    Build a uniform grid with `n_steps` intervals on `[t0, T]`.

    `T == t0` yields the degenerate grid `{t0}` regardless of `n_steps`.

    :param t0:
        Initial time.
    :param T:
        Final time.
    :param n_steps:
        Number of intervals.
    :returns:
        The grid.
    :raises InvalidIntervalError:
        If `T < t0`.
    :raises InvalidResolutionError:
        If `n_steps < 1` while `T > t0`.
    """
    t0 = float(t0)
    T = float(T)
    if T < t0:
        raise InvalidIntervalError(f"Invalid interval: T={T} is before t0={t0}.")
    if T == t0:
        return TimeGrid(t0=t0, T=T, points=np.array([t0]))
    if n_steps < 1:
        raise InvalidResolutionError(f"A grid on [{t0}, {T}] needs at least one step, got {n_steps}.")
    points = np.linspace(t0, T, int(n_steps) + 1)
    # linspace can miss the end point by one ulp
    points[0] = t0
    points[-1] = T
    return TimeGrid(t0=t0, T=T, points=points)
