# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from functools import lru_cache
from typing import Tuple, Union

import numpy as np
from scipy import integrate, special

from logbsde_lab.errors import InvalidParametersError


def _bump(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1.0
    safe = np.where(inside, x, 0.0)
    return np.where(inside, np.exp(-1.0 / (1.0 - safe**2)), 0.0)


@lru_cache(maxsize=1)
def bump_normalization() -> float:
    """
    The constant `c₁ = ∫_{-1}^{1} exp(-1/(1-x²)) dx`, by adaptive quadrature.
    """
    value, _ = integrate.quad(lambda x: float(_bump(x)), -1.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200)
    return float(value)


def psi(x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """
    The normalized bump `ψ(x) = c₁⁻¹ exp(-1/(1-x²))` on `|x| < 1`, zero elsewhere.

    :param x:
        Scalar or array.
    :returns:
        Values of the same shape; a float for scalar input.
    """
    values = _bump(x) / bump_normalization()
    return float(values) if np.ndim(values) == 0 else values


class MollifierKernel:
    """
    The bump kernel `ψ` together with its tensor-product Gauss-Legendre discretization.

    The discrete weights `w_j ψ(ξ_j)` are renormalized to sum to one, so a constant is smoothed into itself
    exactly.
    """

    def __init__(self, quad_nodes: int = 16):
        """
        Create the kernel.

        :param quad_nodes:
            Gauss-Legendre nodes per axis, at least 8.
        """
        if quad_nodes < 8:
            raise InvalidParametersError(f"quad_nodes must be at least 8, got {quad_nodes}.")
        self.quad_nodes = int(quad_nodes)
        nodes, weights = special.roots_legendre(self.quad_nodes)
        kernel_weights = weights * _bump(nodes)
        self._nodes = nodes
        self._weights = kernel_weights / kernel_weights.sum()

    @property
    def c1(self) -> float:
        """
        The normalization constant `c₁`.
        """
        return bump_normalization()

    def eval(self, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """
        Evaluate `ψ`, see `psi`.
        """
        return psi(x)

    def __call__(self, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        return psi(x)

    def n_nodes(self, n_axes: int) -> int:
        """
        Number of tensor nodes over `n_axes` axes.
        """
        return self.quad_nodes**n_axes

    def tensor_slice(self, n_axes: int, start: int, stop: int) -> Tuple[np.ndarray, np.ndarray]:
        """
        A contiguous range of the tensor-product nodes on `[-1, 1]^{n_axes}`.

        The full tensor can be too large to hold, so it is addressed by flat index.

        :param n_axes:
            Number of axes.
        :param start:
            First flat node index.
        :param stop:
            One past the last flat node index.
        :returns:
            Nodes of shape `(stop - start, n_axes)` and their weights of shape `(stop - start,)`.
        """
        if n_axes == 0:
            return np.zeros((1, 0)), np.ones(1)
        index = np.unravel_index(np.arange(start, stop), (self.quad_nodes,) * n_axes)
        nodes = np.stack([self._nodes[i] for i in index], axis=-1)
        weights = np.prod(np.stack([self._weights[i] for i in index], axis=-1), axis=-1)
        return nodes, weights
