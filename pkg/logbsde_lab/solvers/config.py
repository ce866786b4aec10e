# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class RegressionBasisConfig(BaseModel):
    """
    Basis of the least-squares regressions of the backward induction.

    `global_poly` uses all monomials of total degree at most `degree` in the standardized state.
    `local_partition` splits the state range into `n_cells` equal cells per axis and fits a polynomial of
    degree at most one on each cell.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["global_poly", "local_partition"] = "global_poly"
    degree: int = Field(default=2, ge=0, le=8)
    n_cells: int = Field(default=8, ge=1)
    domain: Optional[Tuple[float, float]] = None

    @model_validator(mode="after")
    def _check_partition(self) -> "RegressionBasisConfig":
        if self.kind == "local_partition" and self.degree > 1:
            raise ValueError(f"local_partition supports degree 0 or 1, got {self.degree}")
        if self.domain is not None and not self.domain[0] < self.domain[1]:
            raise ValueError(f"domain must be an increasing pair, got {self.domain}")
        return self


class SolverConfig(BaseModel):
    """
    Settings of the backward least-squares Monte Carlo solver.

    The implicit scheme solves `y = c + θ·Δt·f(t_i, X_i, y, Z_i)` by damped fixed-point iteration, where the
    continuation `c` carries the remaining `(1-θ)·Δt` share of the driver at `t_{i+1}`. `θ = 1` is backward Euler.
    `y_clip = None` clips at `10·(1 + max|ξ|)`.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    n_paths: int = Field(default=10_000, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    scheme: Literal["explicit", "implicit"] = "implicit"
    theta: float = Field(default=1.0, ge=0.5, le=1.0)
    picard_iters: int = Field(default=100, ge=1)
    picard_tol: float = Field(default=1e-12, gt=0)
    damping: float = Field(default=0.5, gt=0, le=1)
    basis: RegressionBasisConfig = Field(default_factory=RegressionBasisConfig)
    y_clip: Optional[float] = Field(default=None, gt=0)
    z_estimator: Literal["increment_regression"] = "increment_regression"
    n_jobs: int = Field(default=1, ge=1)
