# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from .assumptions import AssumptionChecker, VerdictCollector
from .bsde import BackwardSolver, ProblemBuilder, SolutionChecker
from .estimates import AprioriEstimator, AprioriInstances, DecayRate, StabilitySweeper
from .forward import ForwardDiagnostics, PathSimulator
from .mollify import MollificationCertifier
from .pde import FieldComparator, FieldSolver, PdeProblemBuilder

_all_ = [
    "AprioriEstimator",
    "AprioriInstances",
    "AssumptionChecker",
    "BackwardSolver",
    "DecayRate",
    "FieldComparator",
    "FieldSolver",
    "ForwardDiagnostics",
    "MollificationCertifier",
    "PathSimulator",
    "PdeProblemBuilder",
    "ProblemBuilder",
    "SolutionChecker",
    "StabilitySweeper",
    "VerdictCollector",
]
