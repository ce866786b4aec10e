# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from typing import Any, Callable, Dict, Optional

import numpy as np

from logbsde_lab.errors import InvalidParametersError

DriverMap = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]


class Generator:
    """
    Evaluable driver `f(t, x, y, z)` of a backward equation.

    The driver map is vectorized over a batch of `n` points: it receives `t` of shape `(n,)`,
    `x` of shape `(n, k)`, `y` of shape `(n, d)` and `z` of shape `(n, d, r)` and returns an array of
    shape `(n, d)`. Singular points carry their continuous extension, so the map is total.
    Generators are immutable and their evaluation is pure.
    """

    def __init__(
        self,
        dim_d: int,
        dim_r: int,
        func: DriverMap,
        label: str,
        *,
        kind: str = "custom",
        params: Optional[Dict[str, Any]] = None,
        z_free: bool = False,
        x_free: bool = False,
    ):
        """
        Create a generator.

        :param dim_d:
            Value dimension `d`.
        :param dim_r:
            Brownian dimension `r`.
        :param func:
            The vectorized driver map.
        :param label:
            Descriptive name.
        :param kind:
            Name of the library kind that built the generator, `"custom"` otherwise.
        :param params:
            Parameters of the kind.
        :param z_free:
            Whether the driver ignores `z`.
        :param x_free:
            Whether the driver ignores `t` and `x`.
        """
        if dim_d < 1 or dim_r < 1:
            raise InvalidParametersError(f"Generator dimensions must be positive, got d={dim_d}, r={dim_r}.")
        self._dim_d = int(dim_d)
        self._dim_r = int(dim_r)
        self._func = func
        self._label = label
        self._kind = kind
        self._params = dict(params or {})
        self._z_free = z_free
        self._x_free = x_free

    @property
    def dim_d(self) -> int:
        return self._dim_d

    @property
    def dim_r(self) -> int:
        return self._dim_r

    @property
    def label(self) -> str:
        return self._label

    @property
    def kind(self) -> str:
        return self._kind

    @property
    def params(self) -> Dict[str, Any]:
        return dict(self._params)

    @property
    def z_free(self) -> bool:
        return self._z_free

    @property
    def x_free(self) -> bool:
        return self._x_free

    def __repr__(self) -> str:
        return f"Generator(label={self._label!r}, d={self._dim_d}, r={self._dim_r})"

    def evaluate(self, t: np.ndarray, x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
        """
        Evaluate the driver on a batch of points.

        :param t:
            Times, shape `(n,)` or scalar.
        :param x:
            States, shape `(n, k)`.
        :param y:
            Values, shape `(n, d)`.
        :param z:
            Control matrices, shape `(n, d, r)`.
        :returns:
            Driver values, shape `(n, d)`.
        """
        y = np.asarray(y, dtype=float)
        n = y.shape[0]
        t = np.broadcast_to(np.asarray(t, dtype=float), (n,))
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = np.broadcast_to(x, (n, x.shape[0]))
        z = np.asarray(z, dtype=float)
        if z.ndim == 2:
            z = z.reshape(n, self._dim_d, self._dim_r)
        out = np.asarray(self._func(t, x, y, z), dtype=float)
        if out.shape != (n, self._dim_d):
            out = np.broadcast_to(out, (n, self._dim_d)).copy()
        return out

    def evaluate_point(self, t: float, x: Any, y: Any, z: Any = None) -> np.ndarray:
        """
        Evaluate the driver at a single point.

        :param t:
            Time.
        :param x:
            State, a scalar or a vector.
        :param y:
            Value, a scalar or a vector of length `d`.
        :param z:
            Control, a scalar, a vector of length `d*r` or a `(d, r)` matrix. Defaults to zero.
        :returns:
            Driver value of shape `(d,)`.
        """
        x_arr = np.atleast_1d(np.asarray(x, dtype=float)).reshape(1, -1)
        y_arr = np.atleast_1d(np.asarray(y, dtype=float)).reshape(1, self._dim_d)
        if z is None:
            z_arr = np.zeros((1, self._dim_d, self._dim_r))
        else:
            z_arr = np.asarray(z, dtype=float).reshape(1, self._dim_d, self._dim_r)
        return np.array(self.evaluate(np.array([t]), x_arr, y_arr, z_arr)[0])

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes a library generator to its kind and parameters.

        :returns:
            Dictionary with `kind` and `params`.
        :raises ValueError:
            If the generator was not built by the library.
        """
        if self._kind == "custom":
            raise ValueError(f"Generator '{self._label}' is not a library kind and cannot be serialized.")
        return {"kind": self._kind, "params": dict(self._params)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Generator":
        """
        Rebuilds a library generator from the output of `to_dict`.

        :param data:
            Dictionary with `kind` and `params`.
        :returns:
            The generator.
        """
        from logbsde_lab.generators.examples import make_example

        generator, _ = make_example(data["kind"], data.get("params", {}))
        return generator
