# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from functools import lru_cache

import numpy as np

from logbsde_lab.errors import InvalidParametersError

# Relative margin added to numerically maximized constants.
_MARGIN = 1.01


def young_constant(a: np.ndarray, alpha: float, weight: float = 1.0) -> np.ndarray:
    """
    Smallest `c` with `a·ρ ≤ c + weight·ρ^α` for all `ρ ≥ 0`.

    :param a:
        Nonnegative coefficients, any shape.
    :param alpha:
        Exponent, `α > 1`.
    :param weight:
        Positive weight of the power term.
    :returns:
        `(α-1)·weight·ρ*^α` with `ρ* = (a/(α·weight))^{1/(α-1)}`, same shape as `a`.
    """
    if alpha <= 1 or weight <= 0:
        raise InvalidParametersError(f"Young's inequality needs alpha > 1 and weight > 0, got {alpha}, {weight}.")
    a = np.maximum(np.asarray(a, dtype=float), 0.0)
    rho = (a / (alpha * weight)) ** (1.0 / (alpha - 1.0))
    return (alpha - 1.0) * weight * rho**alpha


@lru_cache(maxsize=128)
def log_growth_constant(K: float, alpha: float, weight: float = 1.0) -> float:
    """
    Numerical `sup_{y > 0} (K·y·|log y| - weight·y^α)₊`, with a 1% margin.

    The supremum is taken on a dense logarithmic grid covering `y ∈ [e^{-50}, e^{200}]`.

    :param K:
        Nonnegative coefficient of the logarithmic term.
    :param alpha:
        Exponent, `α > 1`.
    :param weight:
        Positive weight of the power term.
    :returns:
        The constant.
    """
    if alpha <= 1 or weight <= 0:
        raise InvalidParametersError(f"The growth constant needs alpha > 1 and weight > 0, got {alpha}, {weight}.")
    if K == 0:
        return 0.0
    u = np.linspace(-50.0, 200.0, 250_001)
    with np.errstate(over="ignore"):
        values = K * np.exp(u) * np.abs(u) - weight * np.exp(alpha * u)
    return float(_MARGIN * max(0.0, float(np.nanmax(values))))
