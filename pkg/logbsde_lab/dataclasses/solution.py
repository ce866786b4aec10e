# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import dataclass, field
from typing import List

import numpy as np

from logbsde_lab.dataclasses.time_grid import TimeGrid


@dataclass(frozen=True)
class StepDiagnostics:
    """
    Regression and fixed-point diagnostics of one backward step.

    :param step:
        Index `i` of the step `[t_i, t_{i+1}]`.
    :param residual_rms:
        Root mean square of the continuation regression residual.
    :param condition_number:
        Condition number of the design matrix, `inf` when it was rank deficient.
    :param rank_deficient:
        Whether the regression fell back to means.
    :param clip_count:
        Number of paths whose value was clipped.
    :param iterations:
        Fixed-point iterations used, `0` for the explicit scheme.
    """

    step: int
    residual_rms: float
    condition_number: float
    rank_deficient: bool
    clip_count: int
    iterations: int


@dataclass(frozen=True)
class BsdeSolution:
    """
    Discrete solution `(Y, Z)` of a backward equation on simulated paths.

    :param grid:
        The time grid.
    :param Y:
        Values of shape `(n_paths, n_steps + 1, d)`.
    :param Z:
        Controls of shape `(n_paths, n_steps, d, r)`, `Z[:, i]` being constant on `[t_i, t_{i+1})`.
    :param scheme:
        `"explicit"` or `"implicit"`.
    :param diagnostics:
        One entry per step, ordered by step index.
    """

    grid: TimeGrid
    Y: np.ndarray = field(repr=False)
    Z: np.ndarray = field(repr=False)
    scheme: str = "implicit"
    diagnostics: List[StepDiagnostics] = field(default_factory=list, repr=False)

    @property
    def n_paths(self) -> int:
        return self.Y.shape[0]

    @property
    def y0(self) -> np.ndarray:
        """
        Mean initial value, shape `(d,)`.
        """
        return self.Y[:, 0, :].mean(axis=0)

    @property
    def y0_stderr(self) -> np.ndarray:
        """
        Standard error of the initial value, from the spread of the one-step-ahead values.
        """
        if self.grid.n_steps == 0 or self.n_paths < 2:
            return np.zeros(self.Y.shape[2])
        return self.Y[:, 1, :].std(axis=0, ddof=1) / np.sqrt(self.n_paths)

    @property
    def clip_count(self) -> int:
        return sum(d.clip_count for d in self.diagnostics)
