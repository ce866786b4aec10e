# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import List, Tuple

import numpy as np
from haystack import logging

from logbsde_lab.solvers.config import RegressionBasisConfig

logger = logging.getLogger(__name__)

# Singular values below this fraction of the largest one count as zero.
_RCOND = 1e-10


@dataclass(frozen=True)
class RegressionResult:
    """
    Fitted values of a least-squares regression.

    :param fitted:
        Fitted values, same shape as the targets.
    :param residual_rms:
        Root mean square of the residuals.
    :param condition_number:
        Largest condition number over the solved systems, `inf` if one was rank deficient.
    :param rank_deficient:
        Whether some system fell back to cell means.
    """

    fitted: np.ndarray
    residual_rms: float
    condition_number: float
    rank_deficient: bool


def _monomial_exponents(dim: int, degree: int) -> List[Tuple[int, ...]]:
    exponents = []
    for total in range(degree + 1):
        for combination in combinations_with_replacement(range(dim), total):
            exponents.append(tuple(combination))
    return exponents


def _standardize(states: np.ndarray) -> np.ndarray:
    center = states.mean(axis=0)
    scale = states.std(axis=0)
    return (states - center) / np.where(scale > 0, scale, 1.0)


def polynomial_design(states: np.ndarray, degree: int) -> np.ndarray:
    """
    Monomials of total degree at most `degree` in the standardized states.

    :param states:
        States of shape `(n, k)`.
    :param degree:
        Total degree.
    :returns:
        Design matrix of shape `(n, m)`, the first column constant.
    """
    standardized = _standardize(states)
    columns = [np.prod(standardized[:, list(combination)], axis=1) for combination in _monomial_exponents(
        states.shape[1], degree
    )]
    return np.stack(columns, axis=1)


def cell_labels(states: np.ndarray, n_cells: int, domain=None) -> np.ndarray:
    """
    Flat index of the partition cell of every state.

    :param states:
        States of shape `(n, k)`.
    :param n_cells:
        Cells per axis.
    :param domain:
        Range `(low, high)` shared by all axes; defaults to the per-axis range of the states.
    :returns:
        Labels of shape `(n,)`.
    """
    if domain is None:
        low, high = states.min(axis=0), states.max(axis=0)
    else:
        low, high = np.full(states.shape[1], domain[0]), np.full(states.shape[1], domain[1])
    width = np.where(high > low, high - low, 1.0)
    index = np.clip(np.floor((states - low) / width * n_cells), 0, n_cells - 1).astype(int)
    return np.ravel_multi_index(tuple(index.T), (n_cells,) * states.shape[1])


def _solve(design: np.ndarray, targets: np.ndarray) -> Tuple[np.ndarray, float, bool]:
    coefficients, _, rank, singular = np.linalg.lstsq(design, targets, rcond=_RCOND)
    if rank < design.shape[1]:
        return np.broadcast_to(targets.mean(axis=0), targets.shape).copy(), float("inf"), True
    condition = float(singular[0] / singular[-1]) if singular[-1] > 0 else float("inf")
    return design @ coefficients, condition, False


def regress(states: np.ndarray, targets: np.ndarray, basis: RegressionBasisConfig) -> RegressionResult:
    """
    Least-squares projection of `targets` on the basis functions of `states`.

    Targets that are constant across paths are returned exactly, and so are all targets when the states do
    not vary. Rank-deficient systems fall back to the mean of their cell.

    :param states:
        States of shape `(n, k)`.
    :param targets:
        Targets of shape `(n, m)`.
    :param basis:
        The regression basis.
    :returns:
        The regression result.
    """
    states = np.asarray(states, dtype=float)
    targets = np.asarray(targets, dtype=float)
    fitted = np.empty_like(targets)
    constant = np.all(targets == targets[:1], axis=0)
    fitted[:, constant] = targets[:1, constant]
    varying = ~constant
    condition, deficient = 1.0, False

    if varying.any():
        moving = targets[:, varying]
        if np.all(states == states[:1]):
            fitted[:, varying] = np.broadcast_to(moving.mean(axis=0), moving.shape)
        elif basis.kind == "global_poly":
            fitted[:, varying], condition, deficient = _solve(polynomial_design(states, basis.degree), moving)
        else:
            labels = cell_labels(states, basis.n_cells, basis.domain)
            values = np.empty_like(moving)
            for label in np.unique(labels):
                rows = labels == label
                cell_states = states[rows]
                design = np.ones((cell_states.shape[0], 1))
                if basis.degree == 1:
                    design = np.hstack([design, cell_states - cell_states.mean(axis=0)])
                if design.shape[0] < design.shape[1]:
                    values[rows] = moving[rows].mean(axis=0)
                    deficient = True
                    continue
                values[rows], cell_condition, cell_deficient = _solve(design, moving[rows])
                condition = max(condition, cell_condition)
                deficient = deficient or cell_deficient
            fitted[:, varying] = values

    residual = targets - fitted
    return RegressionResult(
        fitted=fitted,
        residual_rms=float(np.sqrt(np.mean(residual**2))) if residual.size else 0.0,
        condition_number=float("inf") if deficient else condition,
        rank_deficient=deficient,
    )
