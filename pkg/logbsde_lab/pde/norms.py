# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from haystack import logging
from scipy.integrate import trapezoid

from logbsde_lab.dataclasses.pde_field import PdeField
from logbsde_lab.errors import InvalidExponentsError, InvalidParametersError
from logbsde_lab.util.quadrature import tensor_trapezoid_weights

logger = logging.getLogger(__name__)

#: Relative weight of the mass outside the grid above which a norm is flagged.
TAIL_TOLERANCE = 0.01


@dataclass(frozen=True)
class WeightedNorms:
    """
    `sup_t ∫|u(t,x)|^p e^{-δ′|x|} dx` and `∫∫|σ*∇u|^{p∧2} e^{-δ′|x|} dt dx` of a field.

    :param sup_spatial_norm:
        The first functional, the supremum taken over the field's times.
    :param grad_norm:
        The second functional; `None` if the field carries no `σ*∇u`.
    :param delta_prime:
        The weight exponent.
    :param p:
        The exponent.
    :param tail_estimate:
        Bound on the part of the first functional outside the grid, relative to its value.
    :param warnings:
        Human readable warnings.
    """

    sup_spatial_norm: float
    grad_norm: Optional[float]
    delta_prime: float
    p: float
    tail_estimate: float
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sup_spatial_norm": self.sup_spatial_norm,
            "grad_norm": self.grad_norm,
            "delta_prime": self.delta_prime,
            "p": self.p,
            "tail_estimate": self.tail_estimate,
            "warnings": list(self.warnings),
        }


def spatial_weights(x_axes: List[np.ndarray], delta_prime: float) -> np.ndarray:
    """
    Trapezoid weights of the tensor grid times the weight `e^{-δ′|x|}`, in `tensor_nodes` order.
    """
    mesh = np.meshgrid(*x_axes, indexing="ij")
    radius = np.sqrt(sum(m.ravel() ** 2 for m in mesh))
    return tensor_trapezoid_weights(x_axes) * np.exp(-delta_prime * radius)


def _half_line_mass(edge: float, rate: float) -> float:
    # ∫_edge^∞ e^{-rate|s|} ds for the weight restricted to one axis.
    if edge >= 0:
        return float(np.exp(-rate * edge) / rate)
    return float((2.0 - np.exp(rate * edge)) / rate)


def outside_mass(x_axes: List[np.ndarray], delta_prime: float) -> float:
    """
    Upper bound of `∫ e^{-δ′|x|} dx` over the complement of the grid's hull.

    Uses `e^{-δ′|x|} ≤ Π_i e^{-δ′|x_i|/√k}`; exact for `k = 1`.

    :param x_axes:
        Per-axis coordinates.
    :param delta_prime:
        The weight exponent.
    :returns:
        The bound, infinite when `δ′ = 0`.
    """
    if delta_prime <= 0:
        return float("inf")
    rate = delta_prime / np.sqrt(len(x_axes))
    full = 2.0 / rate
    total = 0.0
    for axis in x_axes:
        outside = _half_line_mass(float(axis[-1]), rate) + _half_line_mass(-float(axis[0]), rate)
        total += outside * full ** (len(x_axes) - 1)
    return total


def _boundary_mask(shape: tuple) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    for axis, length in enumerate(shape):
        index = [slice(None)] * len(shape)
        for end in (0, length - 1):
            index[axis] = end
            mask[tuple(index)] = True
    return mask.ravel()


def weighted_lp_norm(
    field_values: PdeField, delta_prime: float, p: float, tail_tolerance: float = TAIL_TOLERANCE
) -> WeightedNorms:
    """
    Weighted norms of a field by tensor trapezoid quadrature in space and time.

    Missing nodes are left out of the quadrature. The part outside the grid is bounded by the largest boundary
    value times the outside mass of the weight; a warning is attached when it exceeds `tail_tolerance` of the
    value.

    :param field_values:
        The field.
    :param delta_prime:
        The weight exponent `δ′ ≥ 0`.
    :param p:
        The exponent, `p > 1`.
    :param tail_tolerance:
        Relative tail above which a warning is attached.
    :returns:
        The norms.
    :raises InvalidExponentsError:
        If `p ≤ 1`.
    :raises InvalidParametersError:
        If `δ′ < 0`.
    """
    if not p > 1:
        raise InvalidExponentsError(f"p must exceed 1, got {p}.")
    if delta_prime < 0:
        raise InvalidParametersError(f"delta' must be nonnegative, got {delta_prime}.")
    warnings = []
    weights = spatial_weights(field_values.x_axes, delta_prime)
    missing = field_values.missing if field_values.missing is not None else np.zeros(field_values.u.shape[:2], bool)
    if missing.any():
        warnings.append(f"{int(missing.sum())} missing nodes were left out of the quadrature.")

    with np.errstate(invalid="ignore"):
        powers = np.where(missing, 0.0, np.linalg.norm(np.nan_to_num(field_values.u), axis=2) ** p)
    spatial = powers @ weights
    sup_spatial = float(np.max(spatial))

    grad_norm = None
    if field_values.sigma_grad_u is not None:
        nt, n_nodes = field_values.sigma_grad_u.shape[:2]
        z = field_values.sigma_grad_u.reshape(nt, n_nodes, -1)
        usable = ~missing & np.all(np.isfinite(z), axis=2)
        z_powers = np.where(usable, np.linalg.norm(np.nan_to_num(z), axis=2) ** min(p, 2.0), 0.0)
        in_time = z_powers @ weights
        grad_norm = float(trapezoid(in_time, field_values.t_grid)) if nt > 1 else 0.0

    boundary = _boundary_mask(field_values.axis_shape)
    edge_values = powers[:, boundary]
    tail = float(np.max(edge_values)) * outside_mass(field_values.x_axes, delta_prime) if edge_values.size else 0.0
    if tail == 0.0 or np.isnan(tail):
        relative_tail = 0.0
    else:
        relative_tail = tail / sup_spatial if sup_spatial > 0 else float("inf")
    if relative_tail > tail_tolerance:
        message = f"The weight's mass outside the grid may carry {relative_tail:.2%} of the spatial norm."
        warnings.append(message)
        logger.warning("Weighted norm tail {tail} above {tolerance}", tail=relative_tail, tolerance=tail_tolerance)
    return WeightedNorms(
        sup_spatial_norm=sup_spatial,
        grad_norm=grad_norm,
        delta_prime=float(delta_prime),
        p=float(p),
        tail_estimate=relative_tail,
        warnings=warnings,
    )
