# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from typing import Any, List, Optional, Union

import numpy as np

from logbsde_lab.dataclasses.diffusion import DiffusionSpec
from logbsde_lab.errors import InvalidParametersError

DIFFUSION_KINDS = ("zero", "brownian", "constant", "ou")


def _vector(value: Union[float, List[float]], dim: int, name: str) -> np.ndarray:
    array = np.asarray(value, dtype=float)
    if array.ndim == 0:
        return np.full(dim, float(array))
    if array.shape != (dim,):
        raise InvalidParametersError(f"'{name}' must be a scalar or have length {dim}, got shape {array.shape}.")
    return array


def _matrix(value: Union[float, List[List[float]]], dim_k: int, dim_r: int) -> np.ndarray:
    array = np.asarray(value, dtype=float)
    if array.ndim == 0:
        return float(array) * np.eye(dim_k, dim_r)
    if array.shape != (dim_k, dim_r):
        raise InvalidParametersError(f"'sigma' must be a scalar or a {dim_k}x{dim_r} matrix, got {array.shape}.")
    return array


def make_diffusion(kind: str, dim_k: int = 1, dim_r: Optional[int] = None, **params: Any) -> DiffusionSpec:
    """
    Build a diffusion spec of a named kind.

    Supported kinds:
    - `zero`: `b ≡ 0`, `σ ≡ 0`.
    - `brownian`: `b ≡ drift` (default 0), `σ ≡ sigma` (default 1).
    - `constant`: constant `b ≡ drift` and `σ ≡ sigma`, both defaulting to 0.
    - `ou`: `b(x) = -theta (x - mean) + drift`, `σ ≡ sigma`; `theta=1, sigma=0` gives `b(x) = -x`.

    A scalar `sigma` stands for `sigma` times the `k x r` identity.

    :param kind:
        One of the kinds above.
    :param dim_k:
        State dimension.
    :param dim_r:
        Brownian dimension, defaults to `dim_k`.
    :param params:
        Parameters of the kind.
    :returns:
        The diffusion spec.
    :raises InvalidParametersError:
        If the kind is unknown or a parameter has the wrong shape.
    """
    dim_r = dim_k if dim_r is None else dim_r
    if kind not in DIFFUSION_KINDS:
        raise InvalidParametersError(f"Unknown diffusion kind '{kind}'. Supported kinds are: {list(DIFFUSION_KINDS)}")

    if kind == "zero":
        unexpected = set(params)
        if unexpected:
            raise InvalidParametersError(f"Diffusion kind 'zero' takes no parameters, got {sorted(unexpected)}.")
        drift_vector = np.zeros(dim_k)
        sigma_matrix = np.zeros((dim_k, dim_r))
        theta, mean = 0.0, np.zeros(dim_k)
    else:
        allowed = {"drift", "sigma"} | ({"theta", "mean"} if kind == "ou" else set())
        unexpected = set(params) - allowed
        if unexpected:
            raise InvalidParametersError(f"Unknown parameters {sorted(unexpected)} for diffusion kind '{kind}'.")
        default_sigma = 1.0 if kind == "brownian" else 0.0
        drift_vector = _vector(params.get("drift", 0.0), dim_k, "drift")
        sigma_matrix = _matrix(params.get("sigma", default_sigma), dim_k, dim_r)
        theta = float(params.get("theta", 0.0))
        mean = _vector(params.get("mean", 0.0), dim_k, "mean")

    def drift(x: np.ndarray) -> np.ndarray:
        if theta == 0.0:
            return np.broadcast_to(drift_vector, x.shape)
        return -theta * (x - mean) + drift_vector

    def diffusion(x: np.ndarray) -> np.ndarray:
        return np.broadcast_to(sigma_matrix, (x.shape[0], dim_k, dim_r))

    return DiffusionSpec(
        dim_k=dim_k,
        dim_r=dim_r,
        drift=drift,
        diffusion=diffusion,
        smoothness_tag="C3b" if theta == 0.0 else "Lipschitz",
        kind=kind,
        params=dict(params),
    )
