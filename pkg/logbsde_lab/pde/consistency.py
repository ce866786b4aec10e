# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import asdict, dataclass
from typing import Any, Dict

import numpy as np
from haystack import logging
from scipy.interpolate import RegularGridInterpolator

from logbsde_lab.dataclasses.diffusion import DiffusionSpec
from logbsde_lab.dataclasses.pde_field import PdeField
from logbsde_lab.dataclasses.reports import Verdict
from logbsde_lab.errors import IncompatibleGeneratorsError
from logbsde_lab.pde.norms import spatial_weights
from logbsde_lab.util.quadrature import trapezoid_weights

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ZConsistencyReport:
    """
    Weighted `L²` discrepancy between a Monte Carlo `Z` and `σ*∇u` of a reference field.

    :param relative_error:
        `‖Z - σ*∇u_ref‖ / ‖σ*∇u_ref‖`, zero when both vanish.
    :param absolute_error:
        `‖Z - σ*∇u_ref‖`.
    :param reference_norm:
        `‖σ*∇u_ref‖`.
    :param max_abs_z:
        Largest entry of the Monte Carlo `Z` on the compared nodes.
    :param n_nodes:
        Number of compared time-space nodes.
    :param tolerance:
        Bound on the relative error.
    :param verdict:
        `PASS` if the relative error is within the tolerance, `INCONCLUSIVE` without comparable nodes.
    """

    relative_error: float
    absolute_error: float
    reference_norm: float
    max_abs_z: float
    n_nodes: int
    tolerance: float
    verdict: Verdict

    @property
    def passed(self) -> bool:
        return self.verdict == Verdict.PASS

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["verdict"] = str(self.verdict)
        return data


@dataclass(frozen=True)
class FieldDiscrepancy:
    """
    `sup_t (∫|u - u_ref|^p e^{-δ′|x|} dx)^{1/p}`, absolute and relative to the same norm of `u_ref`.
    """

    absolute: float
    relative: float
    n_nodes: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def field_interpolator(reference: PdeField, values: np.ndarray):
    """
    Linear interpolation of node values of shape `(nt, n_nodes, ...)` in time and space, `NaN` outside.
    """
    shaped = values.reshape((len(reference.t_grid), *reference.axis_shape) + values.shape[2:])
    if len(reference.t_grid) > 1:
        interpolate = RegularGridInterpolator(
            (reference.t_grid, *reference.x_axes), shaped, bounds_error=False, fill_value=np.nan
        )
        return lambda t, x: interpolate(np.column_stack([np.full(len(x), t), x]))
    spatial = RegularGridInterpolator(tuple(reference.x_axes), shaped[0], bounds_error=False, fill_value=np.nan)

    def at_single_time(t, x):
        result = spatial(x)
        return result if np.isclose(t, reference.t_grid[0]) else np.full_like(result, np.nan)

    return at_single_time


def _interior(field_values: PdeField) -> np.ndarray:
    mesh = np.meshgrid(*[np.arange(len(axis)) for axis in field_values.x_axes], indexing="ij")
    inside = np.ones(mesh[0].shape, dtype=bool)
    for index, axis in zip(mesh, field_values.x_axes):
        if len(axis) > 2:
            inside &= (index > 0) & (index < len(axis) - 1)
    return inside.ravel()


def _time_weights(t_grid: np.ndarray) -> np.ndarray:
    return trapezoid_weights(t_grid) if len(t_grid) > 1 else np.ones(1)


def reference_sigma_grad(reference: PdeField, diffusion: DiffusionSpec) -> np.ndarray:
    """
    `σ*∇u` of a reference field from central differences of `u` on its own grid.

    :param reference:
        The reference field.
    :param diffusion:
        The diffusion providing `σ`.
    :returns:
        Values of shape `(nt, n_nodes, d, r)`.
    """
    nt, d = len(reference.t_grid), reference.dim_d
    shaped = reference.u.reshape((nt, *reference.axis_shape, d))
    slopes = []
    for axis_index, axis in enumerate(reference.x_axes):
        if len(axis) < 2:
            slopes.append(np.zeros_like(shaped))
        else:
            slopes.append(np.gradient(shaped, axis, axis=1 + axis_index))
    grad = np.stack(slopes, axis=-1).reshape(nt, -1, d, reference.dim_k)
    sigma = diffusion.sigma_at(reference.nodes)
    return np.einsum("tndk,nkr->tndr", grad, sigma)


def z_consistency(  # pylint: disable=too-many-locals
    mc: PdeField,
    reference: PdeField,
    diffusion: DiffusionSpec,
    *,
    delta_prime: float = 1.0,
    tolerance: float = 0.1,
) -> ZConsistencyReport:
    """
    Compare the Monte Carlo `Z` of a field with `σ*∇u` of a deterministic reference.

    The reference gradient is taken by central differences on the reference grid and interpolated linearly to the
    interior nodes of the Monte Carlo grid. The discrepancy is measured in `L²(e^{-δ′|x|} dx dt)` by trapezoid
    quadrature; nodes that are missing, outside the reference grid or without `Z` are left out.

    :param mc:
        The Monte Carlo field, carrying `σ*∇u`.
    :param reference:
        The reference field on the same spatial dimension.
    :param diffusion:
        The diffusion providing `σ`.
    :param delta_prime:
        Weight exponent.
    :param tolerance:
        Bound on the relative error.
    :returns:
        The report.
    :raises IncompatibleGeneratorsError:
        If the fields have different dimensions or the Monte Carlo field has no `Z`.
    """
    if mc.sigma_grad_u is None:
        raise IncompatibleGeneratorsError("The Monte Carlo field carries no Z.")
    if (mc.dim_k, mc.dim_d) != (reference.dim_k, reference.dim_d):
        raise IncompatibleGeneratorsError(
            f"Fields of dimensions (k={mc.dim_k}, d={mc.dim_d}) and (k={reference.dim_k}, d={reference.dim_d})."
        )
    reference_z = reference_sigma_grad(reference, diffusion)
    interpolate = field_interpolator(reference, reference_z)
    nodes = mc.nodes
    weights = spatial_weights(mc.x_axes, delta_prime) * _interior(mc)
    time_weights = _time_weights(mc.t_grid)
    missing = mc.missing if mc.missing is not None else np.zeros(mc.u.shape[:2], dtype=bool)

    difference, norm, count, max_abs = 0.0, 0.0, 0, 0.0
    for i, t in enumerate(mc.t_grid):
        z_ref = interpolate(float(t), nodes)
        z_mc = mc.sigma_grad_u[i]
        usable = (weights > 0) & ~missing[i]
        usable &= np.all(np.isfinite(z_ref.reshape(len(nodes), -1)), axis=1)
        usable &= np.all(np.isfinite(z_mc.reshape(len(nodes), -1)), axis=1)
        if not usable.any():
            continue
        size = int(usable.sum())
        squared = np.sum((z_mc[usable] - z_ref[usable]).reshape(size, -1) ** 2, axis=1)
        reference_squared = np.sum(z_ref[usable].reshape(size, -1) ** 2, axis=1)
        difference += time_weights[i] * float(squared @ weights[usable])
        norm += time_weights[i] * float(reference_squared @ weights[usable])
        count += size
        max_abs = max(max_abs, float(np.max(np.abs(z_mc[usable]))))

    absolute, reference_norm = float(np.sqrt(difference)), float(np.sqrt(norm))
    if reference_norm > 0:
        relative = absolute / reference_norm
    else:
        relative = 0.0 if absolute == 0 else float("inf")
    if count == 0:
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.PASS if relative <= tolerance else Verdict.FAIL
    logger.info("Z consistency over {count} nodes: relative error {relative}", count=count, relative=relative)
    return ZConsistencyReport(
        relative_error=relative,
        absolute_error=absolute,
        reference_norm=reference_norm,
        max_abs_z=max_abs,
        n_nodes=count,
        tolerance=tolerance,
        verdict=verdict,
    )


def field_discrepancy(
    candidate: PdeField, reference: PdeField, *, delta_prime: float = 1.0, p: float = 2.0
) -> FieldDiscrepancy:
    """
    Weighted `L^p` distance of two fields at the candidate's times and nodes.

    The reference is interpolated linearly; candidate nodes that are missing or outside the reference grid are
    left out of both norms.

    :param candidate:
        The field to measure, e.g. a Monte Carlo field.
    :param reference:
        The reference field.
    :param delta_prime:
        Weight exponent.
    :param p:
        The exponent.
    :returns:
        The discrepancy.
    """
    if (candidate.dim_k, candidate.dim_d) != (reference.dim_k, reference.dim_d):
        raise IncompatibleGeneratorsError("The fields have different dimensions.")
    interpolate = field_interpolator(reference, reference.u)
    nodes = candidate.nodes
    weights = spatial_weights(candidate.x_axes, delta_prime)
    missing = candidate.missing if candidate.missing is not None else np.zeros(candidate.u.shape[:2], dtype=bool)
    errors, norms, count = [0.0], [0.0], 0
    for i, t in enumerate(candidate.t_grid):
        u_ref = interpolate(float(t), nodes)
        usable = ~missing[i] & np.all(np.isfinite(u_ref), axis=1) & np.all(np.isfinite(candidate.u[i]), axis=1)
        if not usable.any():
            continue
        delta = np.linalg.norm(candidate.u[i][usable] - u_ref[usable], axis=1) ** p
        errors.append(float(delta @ weights[usable]) ** (1.0 / p))
        norms.append(float(np.linalg.norm(u_ref[usable], axis=1) ** p @ weights[usable]) ** (1.0 / p))
        count += int(usable.sum())
    absolute, scale = max(errors), max(norms)
    relative = absolute / scale if scale > 0 else (0.0 if absolute == 0 else float("inf"))
    return FieldDiscrepancy(absolute=absolute, relative=relative, n_nodes=count)
