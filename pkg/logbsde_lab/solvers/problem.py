# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional

import numpy as np

from logbsde_lab.dataclasses.diffusion import DiffusionSpec, as_state_batch
from logbsde_lab.dataclasses.generator import Generator
from logbsde_lab.dataclasses.path_batch import PathBatch
from logbsde_lab.dataclasses.time_grid import TimeGrid
from logbsde_lab.errors import IncompatibleGeneratorsError, InvalidParametersError, NumericFaultError
from logbsde_lab.forward.simulation import simulate_paths

TERMINAL_KINDS = ("constant", "identity", "bump", "sine")


class TerminalMap:
    """
    Terminal data `g: R^k -> R^d`, vectorized over states of shape `(n, k)`.
    """

    def __init__(
        self, dim_k: int, dim_d: int, func: Callable[[np.ndarray], np.ndarray], kind: str = "custom", **params: Any
    ):
        self.dim_k = dim_k
        self.dim_d = dim_d
        self._func = func
        self.kind = kind
        self.params = params

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = as_state_batch(x, self.dim_k)
        return np.broadcast_to(np.asarray(self._func(x), dtype=float), (x.shape[0], self.dim_d)).copy()

    def __repr__(self) -> str:
        return f"TerminalMap(kind={self.kind!r}, params={self.params})"

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes a library terminal map.

        :returns:
            Dictionary with `kind`, the dimensions and the parameters.
        """
        if self.kind == "custom":
            raise ValueError("A custom terminal map cannot be serialized.")
        return {"kind": self.kind, "dim_k": self.dim_k, "dim_d": self.dim_d, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TerminalMap":
        """
        Rebuilds a terminal map from the output of `to_dict`.

        :param data:
            Dictionary with `kind`, `dim_k`, `dim_d` and `params`.
        :returns:
            The terminal map.
        """
        return make_terminal(data["kind"], data["dim_k"], data["dim_d"], **data.get("params", {}))


def make_terminal(kind: str, dim_k: int = 1, dim_d: int = 1, **params: Any) -> TerminalMap:
    """
    Build terminal data of a named kind.

    Supported kinds:
    - `constant`: `g ≡ c`, `c` a scalar or a vector of length `d` (default 1).
    - `identity`: `g(x) = x`, requires `d = k`.
    - `bump`: `g(x) = offset + height·exp(-|x|²/(2·width²))` in every component (defaults 1, 1, 1).
    - `sine`: `g(x) = amplitude·sin(x_1 + ... + x_k)` in every component (default amplitude 1).

    :param kind:
        One of the kinds above.
    :param dim_k:
        State dimension.
    :param dim_d:
        Value dimension.
    :param params:
        Parameters of the kind.
    :returns:
        The terminal map.
    :raises InvalidParametersError:
        If the kind is unknown or its parameters are invalid.
    """
    defaults = {
        "constant": {"c": 1.0},
        "identity": {},
        "bump": {"offset": 1.0, "height": 1.0, "width": 1.0},
        "sine": {"amplitude": 1.0},
    }
    if kind not in defaults:
        raise InvalidParametersError(f"Unknown terminal kind '{kind}'. Supported kinds are: {list(TERMINAL_KINDS)}")
    unexpected = set(params) - set(defaults[kind])
    if unexpected:
        raise InvalidParametersError(f"Unknown parameters {sorted(unexpected)} for terminal kind '{kind}'.")
    resolved = {**defaults[kind], **params}

    if kind == "constant":
        value = np.asarray(resolved["c"], dtype=float)
        if value.ndim not in (0, 1) or (value.ndim == 1 and value.shape != (dim_d,)):
            raise InvalidParametersError(f"'c' must be a scalar or have length {dim_d}, got shape {value.shape}.")
        vector = np.broadcast_to(value, (dim_d,)).copy()
        return TerminalMap(dim_k, dim_d, lambda x: np.broadcast_to(vector, (x.shape[0], dim_d)), kind, **resolved)
    if kind == "identity":
        if dim_d != dim_k:
            raise InvalidParametersError(f"The identity terminal map needs d = k, got d={dim_d}, k={dim_k}.")
        return TerminalMap(dim_k, dim_d, lambda x: x, kind, **resolved)
    if kind == "bump":
        offset, height, width = float(resolved["offset"]), float(resolved["height"]), float(resolved["width"])
        if width <= 0:
            raise InvalidParametersError(f"The bump width must be positive, got {width}.")

        def bump(x: np.ndarray) -> np.ndarray:
            values = offset + height * np.exp(-np.sum(x**2, axis=1) / (2.0 * width**2))
            return np.repeat(values[:, None], dim_d, axis=1)

        return TerminalMap(dim_k, dim_d, bump, kind, **resolved)

    amplitude = float(resolved["amplitude"])
    return TerminalMap(
        dim_k, dim_d, lambda x: np.repeat(amplitude * np.sin(x.sum(axis=1))[:, None], dim_d, axis=1), kind, **resolved
    )


def bump_heat_oracle(x: np.ndarray, horizon: float, offset: float = 1.0, height: float = 1.0, width: float = 1.0):
    """
    `E[g(x + √2·W_τ)]` for the bump terminal map, that is the heat flow `∂u/∂t + Δu = 0` run for a time `τ`.

    :param x:
        States of shape `(n, k)`.
    :param horizon:
        Remaining time `τ = T - t`.
    :returns:
        Values of shape `(n,)`.
    """
    x = np.asarray(x, dtype=float)
    spread = width**2 + 2.0 * horizon
    factor = (width**2 / spread) ** (x.shape[1] / 2.0)
    return offset + height * factor * np.exp(-np.sum(x**2, axis=1) / (2.0 * spread))


@dataclass(frozen=True)
class BsdeProblem:
    """
    A Markovian backward equation `Y_t = g(X_T) + ∫_t^T f(s, X_s, Y_s, Z_s) ds - ∫_t^T Z_s dW_s`.

    :param generator:
        The driver `f`.
    :param terminal:
        The terminal map `g`.
    :param diffusion:
        The forward diffusion.
    :param grid:
        The time grid.
    :param x0:
        Initial state of shape `(k,)`.
    """

    generator: Generator
    terminal: TerminalMap
    diffusion: DiffusionSpec
    grid: TimeGrid
    x0: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "x0", np.atleast_1d(np.asarray(self.x0, dtype=float)))
        if self.generator.dim_r != self.diffusion.dim_r:
            raise IncompatibleGeneratorsError(
                f"The generator has r={self.generator.dim_r} but the diffusion has r={self.diffusion.dim_r}."
            )
        if self.x0.shape != (self.diffusion.dim_k,):
            raise InvalidParametersError(f"x0 must have {self.diffusion.dim_k} coordinates, got {self.x0.shape}.")
        if (self.terminal.dim_k, self.terminal.dim_d) != (self.diffusion.dim_k, self.generator.dim_d):
            raise IncompatibleGeneratorsError(
                f"The terminal map goes from R^{self.terminal.dim_k} to R^{self.terminal.dim_d}, expected "
                f"R^{self.diffusion.dim_k} to R^{self.generator.dim_d}."
            )

    @property
    def dim_d(self) -> int:
        return self.generator.dim_d

    @property
    def dim_r(self) -> int:
        return self.generator.dim_r

    def terminal_values(self, states: np.ndarray) -> np.ndarray:
        """
        Evaluate the terminal map on terminal states.

        :param states:
            States of shape `(n, k)`.
        :returns:
            Values of shape `(n, d)`.
        :raises NumericFaultError:
            If the terminal map returns a non-finite value.
        """
        values = self.terminal(states)
        finite = np.isfinite(values).all(axis=1)
        if not finite.all():
            path_index = int(np.argmin(finite))
            raise NumericFaultError(f"Non-finite terminal value on path {path_index}.", path_index=path_index)
        return values

    def simulate(self, n_paths: int, seed: int, *, n_jobs: int = 1, x0: Optional[np.ndarray] = None) -> PathBatch:
        """
        Simulate forward paths of the problem's diffusion.

        :param n_paths:
            Number of paths.
        :param seed:
            64-bit seed.
        :param n_jobs:
            Worker threads.
        :param x0:
            Initial states overriding the problem's `x0`, shape `(k,)` or `(n_paths, k)`.
        :returns:
            The path batch.
        """
        start = self.x0 if x0 is None else x0
        return simulate_paths(self.diffusion, self.grid, start, n_paths, seed, n_jobs=n_jobs)
