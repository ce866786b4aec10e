# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from logbsde_lab.dataclasses.diffusion import DiffusionSpec
from logbsde_lab.dataclasses.envelope import AssumptionEnvelope, ConstantMap
from logbsde_lab.dataclasses.generator import Generator
from logbsde_lab.dataclasses.path_batch import PathBatch
from logbsde_lab.dataclasses.pde_field import PdeField, Provenance, tensor_nodes
from logbsde_lab.dataclasses.reports import CheckReport, EstimateReport, Verdict
from logbsde_lab.dataclasses.solution import BsdeSolution, StepDiagnostics
from logbsde_lab.dataclasses.time_grid import TimeGrid, make_time_grid

__all__ = [
    "AssumptionEnvelope",
    "BsdeSolution",
    "CheckReport",
    "ConstantMap",
    "DiffusionSpec",
    "EstimateReport",
    "Generator",
    "PathBatch",
    "PdeField",
    "Provenance",
    "StepDiagnostics",
    "TimeGrid",
    "Verdict",
    "make_time_grid",
    "tensor_nodes",
]
