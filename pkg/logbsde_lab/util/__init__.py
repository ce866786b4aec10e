# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from logbsde_lab.util.io import FLOAT_FORMAT, dump_config, format_value, write_csv, write_json
from logbsde_lab.util.quadrature import tensor_trapezoid_weights, trapezoid_weights
from logbsde_lab.util.seeding import block_generator, derive_seed

__all__ = [
    "FLOAT_FORMAT",
    "block_generator",
    "derive_seed",
    "dump_config",
    "format_value",
    "tensor_trapezoid_weights",
    "trapezoid_weights",
    "write_csv",
    "write_json",
]
