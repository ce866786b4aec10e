# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from typing import Any, Callable, Dict, Optional, Union

import numpy as np
from haystack import logging

from logbsde_lab.dataclasses.envelope import AssumptionEnvelope, ConstantMap
from logbsde_lab.dataclasses.generator import Generator
from logbsde_lab.errors import InvalidParametersError, NumericFaultError, UnsupportedDimensionError
from logbsde_lab.mollify.kernel import MollifierKernel, psi

logger = logging.getLogger(__name__)

#: Largest number of integrated coordinates `d + d·r` of the convolution.
MAX_QUADRATURE_AXES = 6

# Largest number of base-driver evaluations held in memory at once.
_CHUNK = 200_000

WeightMap = Callable[[np.ndarray, np.ndarray], np.ndarray]


def default_weight(t: np.ndarray, x: np.ndarray) -> np.ndarray:
    """
    The weight `h(t, x) = e^{-|x|}`.
    """
    return np.exp(-np.linalg.norm(np.asarray(x, dtype=float), axis=1))


def truncate_terminal(xi: np.ndarray, n: float) -> np.ndarray:
    """
    Truncated terminal data `ξⁿ = ξ·1{|ξ| ≤ n}`.

    :param xi:
        A terminal value of shape `(d,)` or one per path, shape `(n_paths, d)`.
    :param n:
        Truncation level, `n ≥ 1`.
    :returns:
        Array of the same shape.
    :raises InvalidParametersError:
        If `n < 1`.
    """
    if n < 1:
        raise InvalidParametersError(f"The truncation level must be at least 1, got {n}.")
    xi = np.asarray(xi, dtype=float)
    rows = np.atleast_2d(xi)
    keep = np.linalg.norm(rows, axis=1) <= n
    return np.where(keep[:, None], rows, 0.0).reshape(xi.shape)


class ApproxGenerator(Generator):
    """
    Mollified and truncated driver

    `f_n = 1{Λ̄ ≤ n}·(c₁e)²·ψ(|y|²/n²)·ψ(|z|²/n²)·m^{d+dr} ∫∫ f(t, x, y-u, z-v) Πψ(m·uᵢ) Πψ(m·v_ij) du dv`

    with `m = n^{2p}/h(t, x)` and `Λ̄ = η + η̄ + f⁰ + M + K + 1/h` read from the envelope.

    The convolution uses tensor-product Gauss-Legendre nodes on the cube of half-width `1/m` around `(y, z)`.
    Axes the base driver does not depend on are not integrated, since the normalized kernel leaves them unchanged.
    """

    def __init__(
        self,
        base: Generator,
        envelope: AssumptionEnvelope,
        n: float,
        h: Optional[Union[WeightMap, float]] = None,
        quad_nodes: int = 16,
    ):
        """
        Create the approximation.

        :param base:
            The driver `f`.
        :param envelope:
            Envelope of `f`; its `p` sets the scale `m`.
        :param n:
            Approximation index, `n ≥ 1`.
        :param h:
            The weight map `(t, x) -> ]0, 1]`, a constant, or `None` for `e^{-|x|}`.
        :param quad_nodes:
            Gauss-Legendre nodes per integrated axis, at least 8.
        :raises UnsupportedDimensionError:
            If more than six coordinates would be integrated.
        """
        if n < 1:
            raise InvalidParametersError(f"The approximation index must be at least 1, got {n}.")
        n_axes = base.dim_d + (0 if base.z_free else base.dim_d * base.dim_r)
        if n_axes > MAX_QUADRATURE_AXES:
            raise UnsupportedDimensionError(
                f"Mollifying over {n_axes} coordinates is not supported, the limit is {MAX_QUADRATURE_AXES}."
            )
        self.base = base
        self.envelope = envelope
        self.n = float(n)
        self.kernel = MollifierKernel(quad_nodes)
        self._n_axes = n_axes
        self._h_value: Optional[float] = None
        if h is None:
            self.h: WeightMap = default_weight
        elif callable(h):
            self.h = h
        else:
            if not 0 < float(h) <= 1:
                raise InvalidParametersError(f"The weight h must lie in ]0, 1], got {h}.")
            self._h_value = float(h)
            self.h = ConstantMap(float(h))
        super().__init__(
            base.dim_d,
            base.dim_r,
            self._evaluate_mollified,
            f"mollified[{base.label}, n={n:g}]",
            kind="mollified",
            params={"n": self.n, "quad_nodes": self.kernel.quad_nodes},
            x_free=False,
        )

    @property
    def quad_nodes(self) -> int:
        return self.kernel.quad_nodes

    def scale(self, t: np.ndarray, x: np.ndarray) -> np.ndarray:
        """
        The inverse kernel width `m = n^{2p}/h(t, x)`.
        """
        return self.n ** (2.0 * self.envelope.p) / np.asarray(self.h(t, x), dtype=float)

    def active(self, t: np.ndarray, x: np.ndarray) -> np.ndarray:
        """
        The indicator `1{Λ̄(t, x) ≤ n}` as a boolean array.
        """
        h = np.asarray(self.h(t, x), dtype=float)
        return np.asarray(self.envelope.lambda_bar(t, x, h) <= self.n)

    def _evaluate_mollified(self, t: np.ndarray, x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
        n_points, dim_d = y.shape
        z_flat = z.reshape(n_points, -1)
        y_norm = np.linalg.norm(y, axis=1)
        z_norm = np.linalg.norm(z_flat, axis=1)
        out = np.zeros((n_points, dim_d))

        rows = np.flatnonzero(self.active(t, x) & (y_norm < self.n) & (z_norm < self.n))
        if len(rows) == 0:
            return out
        c1 = self.kernel.c1
        outer = (c1 * np.e) ** 2 * psi(y_norm[rows] ** 2 / self.n**2) * psi(z_norm[rows] ** 2 / self.n**2)
        convolution = self._convolve(t[rows], x[rows], y[rows], z_flat[rows])
        out[rows] = outer[:, None] * convolution
        return out

    def _convolve(self, t: np.ndarray, x: np.ndarray, y: np.ndarray, z_flat: np.ndarray) -> np.ndarray:
        dim_d, dim_r = self.dim_d, self.dim_r
        width = 1.0 / self.scale(t, x)
        n_nodes = self.kernel.n_nodes(self._n_axes)
        node_chunk = min(n_nodes, _CHUNK)
        point_chunk = max(1, _CHUNK // node_chunk)
        result = np.zeros_like(y)

        for first in range(0, len(y), point_chunk):
            rows = slice(first, min(first + point_chunk, len(y)))
            n_rows = rows.stop - rows.start
            for start in range(0, n_nodes, node_chunk):
                stop = min(start + node_chunk, n_nodes)
                nodes, weights = self.kernel.tensor_slice(self._n_axes, start, stop)
                offsets = nodes[None, :, :] * width[rows, None, None]
                shifted_y = y[rows, None, :] - offsets[:, :, :dim_d]
                if self.base.z_free:
                    shifted_z = np.broadcast_to(z_flat[rows, None, :], (n_rows, len(weights), z_flat.shape[1]))
                else:
                    shifted_z = z_flat[rows, None, :] - offsets[:, :, dim_d:]
                values = self.base.evaluate(
                    np.repeat(t[rows], len(weights)),
                    np.repeat(x[rows], len(weights), axis=0),
                    shifted_y.reshape(-1, dim_d),
                    shifted_z.reshape(-1, dim_d, dim_r),
                ).reshape(n_rows, len(weights), dim_d)
                if not np.all(np.isfinite(values)):
                    bad = int(np.argmin(np.isfinite(values).all(axis=(1, 2))))
                    raise NumericFaultError(
                        f"Non-finite value of {self.base.label} inside the kernel support around "
                        f"y={y[rows][bad].tolist()} (n={self.n:g})."
                    )
                result[rows] += np.einsum("pqd,q->pd", values, weights)
        logger.debug(
            "Convolved {n_points} points over {n_nodes} kernel nodes",
            n_points=len(y),
            n_nodes=n_nodes,
        )
        return result

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes the approximation through its base kind.

        :returns:
            Dictionary with the base generator, `n`, `quad_nodes` and the constant weight (`None` for the default).
        :raises ValueError:
            If the base is not a library kind or the weight is a custom map.
        """
        if self.h is not default_weight and self._h_value is None:
            raise ValueError("Only the default or a constant weight h can be serialized.")
        return {
            "kind": self.kind,
            "base": self.base.to_dict(),
            "n": self.n,
            "quad_nodes": self.quad_nodes,
            "h": self._h_value,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ApproxGenerator":
        """
        Rebuilds an approximation written by `to_dict`, with the envelope of the base kind.

        :param data:
            Dictionary produced by `to_dict`.
        :returns:
            The approximation.
        """
        from logbsde_lab.generators.examples import make_example

        base, envelope = make_example(data["base"]["kind"], data["base"].get("params", {}))
        return cls(base, envelope, data["n"], h=data.get("h"), quad_nodes=data.get("quad_nodes", 16))


def mollify_generator(
    g: Generator,
    env: AssumptionEnvelope,
    n: float,
    h: Optional[Union[WeightMap, float]] = None,
    quad_nodes: int = 16,
) -> ApproxGenerator:
    """
    Build the mollified and truncated approximation `f_n` of a driver.

    :param g:
        The driver.
    :param env:
        Its envelope.
    :param n:
        Approximation index.
    :param h:
        Weight map, constant, or `None` for `h(t, x) = e^{-|x|}`.
    :param quad_nodes:
        Gauss-Legendre nodes per axis.
    :returns:
        The approximation.
    """
    return ApproxGenerator(g, env, n, h=h, quad_nodes=quad_nodes)
