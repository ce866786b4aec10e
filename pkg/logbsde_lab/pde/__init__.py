# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from .characteristics import characteristic_value, characteristics_oracle, drift_flow
from .consistency import FieldDiscrepancy, ZConsistencyReport, field_discrepancy, reference_sigma_grad, z_consistency
from .finite_difference import PECLET_LIMIT, FdMesh, fd_reference_1d
from .linear_log import linear_log_assumptions, make_linear_log_pde, verify_coefficients
from .monte_carlo import mc_field
from .norms import TAIL_TOLERANCE, WeightedNorms, outside_mass, weighted_lp_norm
from .problem import PdeAssumptions, PdeProblem, delta_prime, kappa_prime

_all_ = [
    "FdMesh",
    "FieldDiscrepancy",
    "PECLET_LIMIT",
    "PdeAssumptions",
    "PdeProblem",
    "TAIL_TOLERANCE",
    "WeightedNorms",
    "ZConsistencyReport",
    "characteristic_value",
    "characteristics_oracle",
    "delta_prime",
    "drift_flow",
    "fd_reference_1d",
    "field_discrepancy",
    "kappa_prime",
    "linear_log_assumptions",
    "make_linear_log_pde",
    "mc_field",
    "outside_mass",
    "reference_sigma_grad",
    "verify_coefficients",
    "weighted_lp_norm",
    "z_consistency",
]
