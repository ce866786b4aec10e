# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from typing import List

import numpy as np


def trapezoid_weights(axis: np.ndarray) -> np.ndarray:
    """
    Composite trapezoid weights of an increasing coordinate array.

    :param axis:
        Coordinates of shape `(m,)`.
    :returns:
        Weights of shape `(m,)`; a single node gets weight 1.
    """
    axis = np.asarray(axis, dtype=float)
    if axis.size == 1:
        return np.ones(1)
    gaps = np.diff(axis)
    weights = np.zeros_like(axis)
    weights[:-1] += gaps / 2
    weights[1:] += gaps / 2
    return weights


def tensor_trapezoid_weights(x_axes: List[np.ndarray]) -> np.ndarray:
    """
    Tensor-product trapezoid weights matching `tensor_nodes` ordering.

    :param x_axes:
        One coordinate array per axis.
    :returns:
        Weights of shape `(n_nodes,)`.
    """
    weights = np.ones(1)
    for axis in x_axes:
        weights = np.multiply.outer(weights, trapezoid_weights(axis)).ravel()
    return weights
