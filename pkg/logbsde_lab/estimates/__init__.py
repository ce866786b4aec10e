# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from .apriori import SAFETY_FACTOR, AprioriInstance, apriori_check, apriori_sides, lambda_process_check
from .functionals import ThetaEstimate, beta_hat, bootstrap_interval, integrability_check, theta_p, z_energy
from .stability import StabilityReport, default_approximation, solution_distance, stability_sweep
from .weights import WeightedProcesses, lambda_path

_all_ = [
    "AprioriInstance",
    "SAFETY_FACTOR",
    "StabilityReport",
    "ThetaEstimate",
    "WeightedProcesses",
    "apriori_check",
    "apriori_sides",
    "beta_hat",
    "bootstrap_interval",
    "default_approximation",
    "integrability_check",
    "lambda_path",
    "lambda_process_check",
    "solution_distance",
    "stability_sweep",
    "theta_p",
    "z_energy",
]
