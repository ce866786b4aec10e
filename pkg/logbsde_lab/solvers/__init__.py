# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from .backward import default_y_clip, driver_values, solve_backward
from .config import RegressionBasisConfig, SolverConfig
from .oracles import BLOW_UP_LEVEL, log_drift_closed_form, ode_reduction_solve
from .problem import TERMINAL_KINDS, BsdeProblem, TerminalMap, bump_heat_oracle, make_terminal
from .regression import RegressionResult, regress
from .residuals import BaselineReport, ResidualReport, lipschitz_baseline_compare, martingale_residual

_all_ = [
    "BLOW_UP_LEVEL",
    "BaselineReport",
    "BsdeProblem",
    "RegressionBasisConfig",
    "RegressionResult",
    "ResidualReport",
    "SolverConfig",
    "TERMINAL_KINDS",
    "TerminalMap",
    "bump_heat_oracle",
    "default_y_clip",
    "driver_values",
    "lipschitz_baseline_compare",
    "log_drift_closed_form",
    "make_terminal",
    "martingale_residual",
    "ode_reduction_solve",
    "regress",
    "solve_backward",
]
