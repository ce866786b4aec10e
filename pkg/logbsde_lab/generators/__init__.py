# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from .assumptions import (
    RELATIVE_SLACK,
    check_h0,
    check_h1,
    check_h2,
    check_h3,
    check_h4,
    check_h4_stochastic_monotone,
    estimate_lipschitz,
    h2_sides,
    h3_sides,
    h4_sides,
)
from .bounds import log_growth_constant, young_constant
from .distance import rho_N
from .examples import SUPPORTED_KINDS, lambda_weight, make_example, monotone_certificate
from .sampling import BoxSampler

_all_ = [
    "BoxSampler",
    "RELATIVE_SLACK",
    "SUPPORTED_KINDS",
    "check_h0",
    "check_h1",
    "check_h2",
    "check_h3",
    "check_h4",
    "check_h4_stochastic_monotone",
    "estimate_lipschitz",
    "h2_sides",
    "h3_sides",
    "h4_sides",
    "lambda_weight",
    "log_growth_constant",
    "make_example",
    "monotone_certificate",
    "rho_N",
    "young_constant",
]
