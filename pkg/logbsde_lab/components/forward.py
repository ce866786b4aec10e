# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from typing import Any, Dict, List, Optional

import numpy as np
from haystack import component, default_from_dict, default_to_dict, logging

from logbsde_lab.components.specs import build_diffusion, build_time_grid
from logbsde_lab.dataclasses.path_batch import PathBatch
from logbsde_lab.dataclasses.reports import Verdict
from logbsde_lab.errors import DivergenceError
from logbsde_lab.forward.diagnostics import exp_moment_estimate, find_working_kappa, reflection_oracle
from logbsde_lab.forward.simulation import simulate_paths

logger = logging.getLogger(__name__)


@component
class PathSimulator:
    """
    Simulates Euler-Maruyama paths of a configured diffusion.

    Usage example:
    ```python
    from logbsde_lab.components import PathSimulator

    simulator = PathSimulator(
        diffusion={"kind": "brownian", "dim_k": 1},
        time_grid={"t0": 0.0, "T": 1.0, "n_steps": 100},
        x0=[0.0],
        n_paths=1000,
    )
    paths = simulator.run(seed=7)["paths"]
    ```
    """

    def __init__(
        self,
        diffusion: Dict[str, Any],
        time_grid: Dict[str, Any],
        x0: List[float],
        n_paths: int,
        n_jobs: int = 1,
    ):
        """
        Create a PathSimulator component.

        :param diffusion:
            Diffusion section with `kind`, `dim_k`, `dim_r` and `params`.
        :param time_grid:
            Time grid section with `t0`, `T` and `n_steps`.
        :param x0:
            Initial state.
        :param n_paths:
            Number of paths.
        :param n_jobs:
            Worker threads.
        """
        self.diffusion = diffusion
        self.time_grid = time_grid
        self.x0 = list(x0)
        self.n_paths = n_paths
        self.n_jobs = n_jobs
        self._spec = build_diffusion(diffusion)
        self._grid = build_time_grid(time_grid)

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes the component to a dictionary.

        :returns:
            Dictionary with serialized data.
        """
        return default_to_dict(
            self,
            diffusion=self.diffusion,
            time_grid=self.time_grid,
            x0=self.x0,
            n_paths=self.n_paths,
            n_jobs=self.n_jobs,
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PathSimulator":
        """
        Deserializes the component from a dictionary.

        :param data:
            The dictionary to deserialize from.
        :returns:
            The deserialized component.
        """
        return default_from_dict(cls, data)

    @component.output_types(paths=PathBatch)
    def run(self, seed: int):
        """
        Simulate the paths.

        :param seed:
            64-bit seed of the batch.
        :returns:
            A dictionary with the following keys:
            - `paths`: The simulated path batch.
        """
        paths = simulate_paths(self._spec, self._grid, np.asarray(self.x0), self.n_paths, seed, n_jobs=self.n_jobs)
        return {"paths": paths}


@component
class ForwardDiagnostics:
    """
    Exponential moments of the running displacement of simulated paths.

    With `reflection_tolerance` set the paths are taken to be a standard one-dimensional Brownian motion and the
    estimate is compared with the exact moment from the law of its running maximum.
    """

    def __init__(self, kappa: float, kappa_max: float = 10.0, reflection_tolerance: Optional[float] = None):
        """
        Create a ForwardDiagnostics component.

        :param kappa:
            Exponent of the estimated moment.
        :param kappa_max:
            Upper end of the search for a working exponent.
        :param reflection_tolerance:
            Relative tolerance of the comparison with the Brownian oracle; `None` skips it.
        """
        self.kappa = kappa
        self.kappa_max = kappa_max
        self.reflection_tolerance = reflection_tolerance

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes the component to a dictionary.

        :returns:
            Dictionary with serialized data.
        """
        return default_to_dict(
            self, kappa=self.kappa, kappa_max=self.kappa_max, reflection_tolerance=self.reflection_tolerance
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ForwardDiagnostics":
        """
        Deserializes the component from a dictionary.

        :param data:
            The dictionary to deserialize from.
        :returns:
            The deserialized component.
        """
        return default_from_dict(cls, data)

    @component.output_types(metrics=Dict[str, float], verdict=Verdict)
    def run(self, paths: PathBatch):
        """
        Estimate the moment and the largest working exponent.

        :param paths:
            The simulated paths.
        :returns:
            A dictionary with the following keys:
            - `metrics`: The estimate, its tail fraction, the working exponent and, with an oracle, its error.
            - `verdict`: `INCONCLUSIVE` if the estimate diverged, else the outcome of the oracle comparison.
        """
        estimate = exp_moment_estimate(paths, self.kappa)
        metrics = {
            "exp_moment": estimate.value,
            "tail_fraction": estimate.tail_fraction,
            "working_kappa": find_working_kappa(paths, kappa_max=self.kappa_max),
        }
        if estimate.divergent:
            return {"metrics": metrics, "verdict": Verdict.INCONCLUSIVE}
        if self.reflection_tolerance is None:
            return {"metrics": metrics, "verdict": Verdict.PASS}

        try:
            oracle = reflection_oracle(self.kappa, paths.grid.T - float(paths.grid.points[0]))
        except DivergenceError as error:
            logger.warning("No finite oracle moment: {error}", error=str(error))
            return {"metrics": metrics, "verdict": Verdict.INCONCLUSIVE}
        relative = abs(estimate.value - oracle) / oracle
        metrics.update({"oracle": oracle, "relative_error": relative})
        verdict = Verdict.PASS if relative <= self.reflection_tolerance else Verdict.FAIL
        logger.info(
            "Exponential moment {value} against the oracle {oracle}: {verdict}",
            value=estimate.value,
            oracle=oracle,
            verdict=str(verdict),
        )
        return {"metrics": metrics, "verdict": verdict}
