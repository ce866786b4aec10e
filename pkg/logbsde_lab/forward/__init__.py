# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from .diagnostics import (
    ExpMomentEstimate,
    NormEquivalenceReport,
    exp_moment_estimate,
    find_working_kappa,
    norm_equivalence_check,
    reflection_oracle,
)
from .diffusions import DIFFUSION_KINDS, make_diffusion
from .simulation import PATH_BLOCK_SIZE, brownian_increments, simulate_paths

_all_ = [
    "DIFFUSION_KINDS",
    "ExpMomentEstimate",
    "NormEquivalenceReport",
    "PATH_BLOCK_SIZE",
    "brownian_increments",
    "exp_moment_estimate",
    "find_working_kappa",
    "make_diffusion",
    "norm_equivalence_check",
    "reflection_oracle",
    "simulate_paths",
]
