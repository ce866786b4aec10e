# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from .approximation import ApproxGenerator, default_weight, mollify_generator, truncate_terminal
from .certification import ApproxPropertiesReport, verify_approx_properties
from .kernel import MollifierKernel, bump_normalization, psi

_all_ = [
    "ApproxGenerator",
    "ApproxPropertiesReport",
    "MollifierKernel",
    "bump_normalization",
    "default_weight",
    "mollify_generator",
    "psi",
    "truncate_terminal",
    "verify_approx_properties",
]
