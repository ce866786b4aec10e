# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from typing import Any, Dict, List, Optional

from haystack import component, default_from_dict, default_to_dict

from logbsde_lab.components.specs import build_generator, build_sampler
from logbsde_lab.dataclasses.reports import Verdict
from logbsde_lab.mollify.certification import ApproxPropertiesReport, verify_approx_properties


@component
class MollificationCertifier:  # pylint: disable=too-many-instance-attributes
    """
    Certifies the approximation properties of the mollified drivers `f_n` along a schedule.
    """

    def __init__(  # pylint: disable=too-many-positional-arguments
        self,
        generator: Dict[str, Any],
        schedule: List[float],
        n_samples: int = 10_000,
        N: float = 1.0,
        threshold: float = 1e-2,
        grid_density: int = 101,
        quad_nodes: int = 16,
        h: Optional[float] = None,
        sampler: Optional[Dict[str, Any]] = None,
        reference: Optional[List[float]] = None,
    ):
        """
        Create a MollificationCertifier component.

        :param generator:
            Generator section of the driver to mollify.
        :param schedule:
            Increasing approximation indices.
        :param n_samples:
            Sampled points per index.
        :param N:
            Radius of the distance `ρ_N`.
        :param threshold:
            Largest accepted distance at the last index.
        :param grid_density:
            Grid points per axis of `ρ_N`.
        :param quad_nodes:
            Gauss-Legendre nodes per axis of the convolution.
        :param h:
            Constant weight; `None` uses `e^{-|x|}`.
        :param sampler:
            Half-widths and log fraction of the sampled box.
        :param reference:
            The point `[t, x_1, ..., x_k]` of the convergence check; defaults to the origin at time 0.
        """
        self.generator = generator
        self.schedule = list(schedule)
        self.n_samples = n_samples
        self.N = N
        self.threshold = threshold
        self.grid_density = grid_density
        self.quad_nodes = quad_nodes
        self.h = h
        self.sampler = dict(sampler or {})
        self.reference = list(reference or [0.0, 0.0])

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes the component to a dictionary.

        :returns:
            Dictionary with serialized data.
        """
        return default_to_dict(
            self,
            generator=self.generator,
            schedule=self.schedule,
            n_samples=self.n_samples,
            N=self.N,
            threshold=self.threshold,
            grid_density=self.grid_density,
            quad_nodes=self.quad_nodes,
            h=self.h,
            sampler=self.sampler,
            reference=self.reference,
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MollificationCertifier":
        """
        Deserializes the component from a dictionary.

        :param data:
            The dictionary to deserialize from.
        :returns:
            The deserialized component.
        """
        return default_from_dict(cls, data)

    @component.output_types(report=ApproxPropertiesReport, rows=List[Dict[str, Any]], verdict=Verdict)
    def run(self, seed: int):
        """
        Mollify the driver at every index of the schedule and check the properties on sampled points.

        :param seed:
            Seed of the sampled points.
        :returns:
            A dictionary with the following keys:
            - `report`: The certification report.
            - `rows`: Its table, one row per index.
            - `verdict`: The report's verdict.
        """
        driver, envelope = build_generator(self.generator)
        t_point, x_point = self.reference[0], self.reference[1:]
        sampler = build_sampler({**self.sampler, "seed": seed}, len(x_point), (0.0, 1.0))
        report = verify_approx_properties(
            driver,
            envelope,
            self.schedule,
            h=self.h,
            sampler=sampler,
            n_samples=self.n_samples,
            N=self.N,
            threshold=self.threshold,
            grid_density=self.grid_density,
            quad_nodes=self.quad_nodes,
            reference=(t_point, x_point),
        )
        return {"report": report, "rows": report.rows, "verdict": report.verdict}
