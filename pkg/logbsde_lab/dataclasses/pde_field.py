# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np


class Provenance(Enum):
    """
    How a PDE field was computed.
    """

    MONTE_CARLO = "monte_carlo"
    FINITE_DIFFERENCE = "finite_difference"
    CHARACTERISTICS = "characteristics"

    def __str__(self):
        return self.value

    @property
    def is_deterministic(self) -> bool:
        return self != Provenance.MONTE_CARLO


def tensor_nodes(x_axes: List[np.ndarray]) -> np.ndarray:
    """
    Cartesian product of per-axis coordinates in row-major (`ij`) order.

    :param x_axes:
        One coordinate array per spatial axis.
    :returns:
        Nodes of shape `(n_nodes, k)`.
    """
    mesh = np.meshgrid(*[np.asarray(axis, dtype=float) for axis in x_axes], indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass(frozen=True)
class PdeField:  # pylint: disable=too-many-instance-attributes
    """
    Values of a PDE solution on a time-space tensor grid.

    :param t_grid:
        Times of shape `(nt,)`, increasing within `[0, T]`.
    :param x_axes:
        Per-axis spatial coordinates; the nodes are their tensor product.
    :param u:
        Values of shape `(nt, n_nodes, d)`, `NaN` at missing nodes.
    :param provenance:
        How the field was computed.
    :param sigma_grad_u:
        Optional `σ*∇u` of shape `(nt, n_nodes, d, r)`.
    :param grad_u:
        Optional `∇u` of shape `(nt, n_nodes, d, k)`, present when `σ` could be inverted.
    :param stderr:
        Optional Monte Carlo standard errors of `u`, same shape as `u`.
    :param missing:
        Boolean mask of shape `(nt, n_nodes)` marking nodes that could not be computed.
    """

    t_grid: np.ndarray
    x_axes: List[np.ndarray]
    u: np.ndarray = field(repr=False)
    provenance: Provenance
    sigma_grad_u: Optional[np.ndarray] = field(default=None, repr=False)
    grad_u: Optional[np.ndarray] = field(default=None, repr=False)
    stderr: Optional[np.ndarray] = field(default=None, repr=False)
    missing: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def nodes(self) -> np.ndarray:
        """
        Spatial nodes, shape `(n_nodes, k)`.
        """
        return tensor_nodes(self.x_axes)

    @property
    def dim_k(self) -> int:
        return len(self.x_axes)

    @property
    def dim_d(self) -> int:
        return self.u.shape[2]

    @property
    def axis_shape(self) -> tuple:
        return tuple(len(axis) for axis in self.x_axes)

    @property
    def missing_count(self) -> int:
        return 0 if self.missing is None else int(np.count_nonzero(self.missing))
