# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional

import numpy as np

from logbsde_lab.errors import InvalidParametersError

DriftMap = Callable[[np.ndarray], np.ndarray]
DiffusionMap = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DiffusionSpec:
    """
    Coefficients of the forward diffusion `dX = b(X)dt + σ(X)dW`.

    Both maps are vectorized: they receive states of shape `(n, k)` and return arrays of shape
    `(n, k)` for the drift and `(n, k, r)` for the diffusion.

    :param dim_k:
        State dimension.
    :param dim_r:
        Brownian dimension.
    :param drift:
        The drift map `b`.
    :param diffusion:
        The diffusion map `σ`.
    :param smoothness_tag:
        Declared regularity class of the coefficients, e.g. `"C3b"`.
    :param kind:
        Name of the factory that built the spec, used for serialization.
    :param params:
        Parameters given to the factory.
    """

    dim_k: int
    dim_r: int
    drift: DriftMap = field(repr=False)
    diffusion: DiffusionMap = field(repr=False)
    smoothness_tag: str = "C3b"
    kind: str = "custom"
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.dim_k < 1 or self.dim_r < 1:
            raise InvalidParametersError(f"Dimensions must be positive, got k={self.dim_k}, r={self.dim_r}.")

    def drift_at(self, x: np.ndarray) -> np.ndarray:
        """
        Evaluate the drift on a batch of states.

        :param x:
            States of shape `(n, k)`.
        :returns:
            Drift values of shape `(n, k)`.
        """
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(self.drift(x), dtype=float), (x.shape[0], self.dim_k))

    def sigma_at(self, x: np.ndarray) -> np.ndarray:
        """
        Evaluate the diffusion matrix on a batch of states.

        :param x:
            States of shape `(n, k)`.
        :returns:
            Matrices of shape `(n, k, r)`.
        """
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(
            np.asarray(self.diffusion(x), dtype=float), (x.shape[0], self.dim_k, self.dim_r)
        )

    def is_degenerate_at(self, x: np.ndarray) -> bool:
        """
        Whether `σ` vanishes identically on the given states.

        :param x:
            States of shape `(n, k)`.
        :returns:
            True if every entry of `σ(x)` is zero.
        """
        return bool(np.all(self.sigma_at(x) == 0.0))

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes the spec to its factory arguments.

        :returns:
            Dictionary with the factory kind, the dimensions and its parameters.
        """
        return {"kind": self.kind, "dim_k": self.dim_k, "dim_r": self.dim_r, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DiffusionSpec":
        """
        Rebuilds a spec from the output of `to_dict`.

        :param data:
            Dictionary produced by `to_dict`.
        :returns:
            The diffusion spec.
        """
        # Deferred to avoid a cycle: the factories build instances of this class.
        from logbsde_lab.forward.diffusions import make_diffusion

        return make_diffusion(data["kind"], dim_k=data["dim_k"], dim_r=data.get("dim_r"), **data.get("params", {}))


def as_state_batch(x: np.ndarray, dim: Optional[int] = None) -> np.ndarray:
    """
    Reshape a point or a batch of points into a 2-d batch.

    :param x:
        Scalar, vector of shape `(k,)` or batch of shape `(n, k)`.
    :param dim:
        Expected trailing dimension; a 1-d input of another length is read as a batch of scalars.
    :returns:
        Array of shape `(n, k)`.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return x.reshape(1, 1)
    if x.ndim == 1:
        if dim is not None and x.shape[0] != dim and dim == 1:
            return x.reshape(-1, 1)
        return x.reshape(1, -1)
    return x
