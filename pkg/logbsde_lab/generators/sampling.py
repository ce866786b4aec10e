# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

import numpy as np
from scipy.stats import qmc

from logbsde_lab.errors import InvalidParametersError

# Decades spanned by the logarithmic half of the samples.
LOG_DECADES = 6.0


@dataclass(frozen=True)
class Block:
    """
    One named group of coordinates of a sampled point.

    :param name:
        Name of the argument, e.g. `"y"`.
    :param size:
        Number of coordinates.
    :param low:
        Lower end of the sampled interval.
    :param high:
        Upper end of the sampled interval.
    :param log_scaled:
        Whether logarithmic rows map this block towards zero on a log scale.
    """

    name: str
    size: int
    low: float
    high: float
    log_scaled: bool = False


class Layout:
    """
    Ordered blocks of coordinates that make up a sampled point.
    """

    def __init__(self, blocks: List[Block]):
        self.blocks = [block for block in blocks if block.size > 0]

    @property
    def dim(self) -> int:
        return sum(block.size for block in self.blocks)

    def decode(self, unit: np.ndarray, log_rows: np.ndarray) -> Dict[str, np.ndarray]:
        """
        Map unit-cube coordinates to points of the box.

        Log-scaled blocks of rows flagged in `log_rows` map `s ∈ [0, 1]` through `s' = 2s - 1` to
        `sign(s')·h·10^{-6(1-|s'|)}` with `h` the half-width of the block, so that small magnitudes are explored.

        :param unit:
            Coordinates of shape `(n, dim)`.
        :param log_rows:
            Boolean mask of shape `(n,)`.
        :returns:
            One array of shape `(n, size)` per block name.
        """
        points = {}
        column = 0
        for block in self.blocks:
            s = unit[:, column : column + block.size]
            linear = block.low + s * (block.high - block.low)
            if block.log_scaled:
                half = 0.5 * (block.high - block.low)
                centered = 2.0 * s - 1.0
                logarithmic = np.sign(centered) * half * 10.0 ** (-LOG_DECADES * (1.0 - np.abs(centered)))
                linear = np.where(log_rows[:, None], logarithmic, linear)
            points[block.name] = linear
            column += block.size
        return points

    def describe(self) -> Dict[str, Any]:
        return {block.name: [block.low, block.high] for block in self.blocks}


@dataclass(frozen=True)
class BoxSampler:
    """
    Low-discrepancy sampler of the box `(t, x, y, z) ∈ [t_low, t_high] × [-x_half, x_half]^k × ...`.

    Points come from a scrambled Halton sequence; a fraction of them is mapped logarithmically towards
    `y = 0` and `z = 0`, where logarithmic drivers are singular.

    :param dim_k:
        State dimension.
    :param t_range:
        Time interval.
    :param x_half:
        Half-width of the state box.
    :param y_half:
        Half-width of the value box.
    :param z_half:
        Half-width of the control box.
    :param log_fraction:
        Fraction of the samples mapped on a logarithmic scale.
    :param seed:
        Seed of the scrambling and of the hill-climbing steps.
    """

    dim_k: int = 1
    t_range: Tuple[float, float] = (0.0, 1.0)
    x_half: float = 2.0
    y_half: float = 5.0
    z_half: float = 5.0
    log_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.t_range[1] < self.t_range[0]:
            raise InvalidParametersError(f"Invalid time range {self.t_range}.")
        if not 0 <= self.log_fraction <= 1:
            raise InvalidParametersError(f"log_fraction must lie in [0, 1], got {self.log_fraction}.")

    def layout(self, dim_d: int, dim_r: int) -> Layout:
        """
        Layout of a single point `(t, x, y, z)`.
        """
        return Layout(
            [
                Block("t", 1, self.t_range[0], self.t_range[1]),
                Block("x", self.dim_k, -self.x_half, self.x_half),
                Block("y", dim_d, -self.y_half, self.y_half, log_scaled=True),
                Block("z", dim_d * dim_r, -self.z_half, self.z_half, log_scaled=True),
            ]
        )

    def pair_layout(self, dim_d: int, dim_r: int, level: float) -> Layout:
        """
        Layout of a pair of points sharing `(t, x)`, inside the radius-`level` box in `y` and `z`.

        The second point is the first plus a log-scaled offset, so near pairs straddling zero are explored.
        """
        return Layout(
            [
                Block("t", 1, self.t_range[0], self.t_range[1]),
                Block("x", self.dim_k, -self.x_half, self.x_half),
                Block("y", dim_d, -level, level, log_scaled=True),
                Block("z", dim_d * dim_r, -level, level, log_scaled=True),
                Block("dy", dim_d, -2.0 * level, 2.0 * level, log_scaled=True),
                Block("dz", dim_d * dim_r, -2.0 * level, 2.0 * level, log_scaled=True),
            ]
        )

    def unit_points(self, n_samples: int, dim: int) -> Tuple[np.ndarray, np.ndarray]:
        """
        Scrambled Halton points in the unit cube with their logarithmic-row flags.

        :param n_samples:
            Number of points.
        :param dim:
            Dimension of the cube.
        :returns:
            Points of shape `(n_samples, dim)` and a boolean mask of shape `(n_samples,)`.
        """
        if n_samples < 1:
            raise InvalidParametersError(f"n_samples must be at least 1, got {n_samples}.")
        engine = qmc.Halton(d=dim, scramble=True, seed=self.seed)
        unit = engine.random(n_samples)
        n_log = int(round(self.log_fraction * n_samples))
        log_rows = np.zeros(n_samples, dtype=bool)
        # Interleave so that any prefix of the sample holds both kinds of rows.
        if n_log:
            log_rows[np.linspace(0, n_samples - 1, n_log).round().astype(int)] = True
        return unit, log_rows

    def describe(self) -> Dict[str, Any]:
        return {
            "t": list(self.t_range),
            "x_half": self.x_half,
            "y_half": self.y_half,
            "z_half": self.z_half,
            "log_fraction": self.log_fraction,
        }


def project_to_ball(values: np.ndarray, radius: float) -> np.ndarray:
    """
    Radially shrink the rows of `values` whose Euclidean norm exceeds `radius`.

    :param values:
        Array of shape `(n, m)`.
    :param radius:
        The radius.
    :returns:
        Array of the same shape with all row norms at most `radius`.
    """
    norms = np.linalg.norm(values, axis=1)
    scale = np.where(norms > radius, radius / np.where(norms > 0, norms, 1.0), 1.0)
    return values * scale[:, None]
