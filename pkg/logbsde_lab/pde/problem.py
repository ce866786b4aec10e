# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np
from haystack import logging

from logbsde_lab.dataclasses.diffusion import DiffusionSpec
from logbsde_lab.dataclasses.envelope import AssumptionEnvelope, ConstantMap, EnvelopeMap
from logbsde_lab.dataclasses.generator import Generator
from logbsde_lab.dataclasses.time_grid import make_time_grid
from logbsde_lab.errors import IncompatibleGeneratorsError, InvalidExponentsError, InvalidParametersError
from logbsde_lab.solvers.problem import BsdeProblem, TerminalMap

logger = logging.getLogger(__name__)


def _state_norm(x: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.asarray(x, dtype=float), axis=1)


def kappa_prime(p: float, p_bar: float, M_prime: float, T: float) -> float:
    """
    The weight growth `κ′ = p·p̄·M′·T/(p̄ - p)·max(4, 2p/(p - 1))`, zero when `M′ = 0`.

    :param p:
        Integrability exponent, `1 < p < p̄` when `M′ > 0`.
    :param p_bar:
        Integrability exponent of the terminal function.
    :param M_prime:
        Growth in `|x|` of the monotonicity constant.
    :param T:
        The horizon.
    :returns:
        The constant.
    :raises InvalidExponentsError:
        If `p ≤ 1`, or `p ≥ p̄` while `M′ > 0`.
    """
    if not p > 1:
        raise InvalidExponentsError(f"p must exceed 1, got {p}.")
    if M_prime == 0:
        return 0.0
    if not p < p_bar:
        raise InvalidExponentsError(f"p must lie below p_bar = {p_bar} when M' > 0, got {p}.")
    return p * p_bar * M_prime * T / (p_bar - p) * max(4.0, 2.0 * p / (p - 1.0))


def delta_prime(delta: float, kappa: float, M_prime: float) -> float:
    """
    The weight exponent `δ′ = δ + κ′ + 1{M′ ≠ 0}` of the solution's norms.
    """
    return delta + kappa + (1.0 if M_prime != 0 else 0.0)


@dataclass(frozen=True)
class PdeAssumptions:  # pylint: disable=too-many-instance-attributes
    """
    Data of the assumptions on a semilinear parabolic system.

    The maps `η′`, `f⁰′` and `η̄′` are Markovian `(t, x) -> R_+`, vectorized like envelope maps.

    :param delta:
        Exponential weight `δ ≥ 0` of the terminal function's space `L^{p̄}(e^{-δ|x|}dx)`.
    :param p_bar:
        Integrability exponent of the terminal function, `p̄ > 1`.
    :param eta:
        Constant term of the monotonicity bound.
    :param f0:
        Linear term of the monotonicity bound.
    :param M:
        Constant part of the monotonicity constant `M + M′|x|`.
    :param M_prime:
        Growth in `|x|` of the monotonicity constant.
    :param eta_bar:
        Constant term of the growth bound.
    :param q:
        Integrability exponent of `η̄′`, `q > 1`.
    :param alpha:
        Growth exponent in `y`, `1 < α < p̄`.
    :param alpha_prime:
        Growth exponent in `z`, `1 < α′ < p̄ ∧ 2`.
    :param K:
        Local log-Lipschitz constant.
    :param r:
        Exponential rate of the localization `e^{r|x|} ≤ N`.
    """

    delta: float = 0.0
    p_bar: float = 2.0
    eta: EnvelopeMap = field(default_factory=lambda: ConstantMap(0.0))
    f0: EnvelopeMap = field(default_factory=lambda: ConstantMap(0.0))
    M: float = 0.0
    M_prime: float = 0.0
    eta_bar: EnvelopeMap = field(default_factory=lambda: ConstantMap(0.0))
    q: float = 2.0
    alpha: float = 1.5
    alpha_prime: float = 1.5
    K: float = 0.0
    r: float = 1.0

    def validate(self) -> "PdeAssumptions":
        """
        Check the ranges of the exponents and constants.

        :returns:
            The assumptions themselves.
        :raises InvalidExponentsError:
            If an exponent is out of range.
        :raises InvalidParametersError:
            If a constant is negative.
        """
        if not self.p_bar > 1:
            raise InvalidExponentsError(f"p_bar must exceed 1, got {self.p_bar}.")
        if not 1 < self.alpha < self.p_bar:
            raise InvalidExponentsError(f"alpha must lie in ]1, {self.p_bar}[, got {self.alpha}.")
        if not 1 < self.alpha_prime < min(self.p_bar, 2.0):
            raise InvalidExponentsError(f"alpha' must lie in ]1, {min(self.p_bar, 2.0)}[, got {self.alpha_prime}.")
        if not self.q > 1:
            raise InvalidExponentsError(f"q must exceed 1, got {self.q}.")
        for name in ("delta", "M", "M_prime", "K", "r"):
            if getattr(self, name) < 0:
                raise InvalidParametersError(f"{name} must be nonnegative, got {getattr(self, name)}.")
        return self

    def exponent(self) -> float:
        """
        The integrability exponent of the solution: `p̄` when `M′ = 0`, else the midpoint of `]α ∨ α′, p̄[`.
        """
        if self.M_prime == 0:
            return self.p_bar
        return 0.5 * (max(self.alpha, self.alpha_prime) + self.p_bar)

    def to_envelope(self, p: Optional[float] = None) -> AssumptionEnvelope:
        """
        The envelope of the drivers `F(s, X_s^{t,x}, y, z)` of the associated backward equations.

        The monotonicity constants become `M_s = M + M′|X_s|` and `K_s = (M + M′|X_s|)^{1/2}`, the localization is
        `v = e^{r|x|}` with `A_N = N`, the log-Lipschitz constant is `K` and `γ = min(1/4, (p - 1)/4)`.

        :param p:
            Integrability exponent; defaults to `exponent()`.
        :returns:
            The validated envelope.
        """
        p = self.exponent() if p is None else float(p)
        M, M_prime, rate = self.M, self.M_prime, self.r

        def monotone(t, x):
            return M + M_prime * _state_norm(x)

        def cross(t, x):
            return np.sqrt(M + M_prime * _state_norm(x))

        def localizer(t, x):
            return np.exp(rate * _state_norm(x))

        envelope = AssumptionEnvelope(
            p=p,
            gamma=min(0.25, (p - 1.0) / 4.0),
            eta=self.eta,
            f0=self.f0,
            M=monotone,
            K=cross,
            eta_bar=self.eta_bar,
            q=self.q,
            alpha=self.alpha,
            alpha_prime=self.alpha_prime,
            v=localizer,
            K_prime=self.K,
        )
        return envelope.validate()

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes the scalar data; the maps are recorded by their representation.

        :returns:
            Dictionary of the fields.
        """
        return {
            "delta": self.delta,
            "p_bar": self.p_bar,
            "eta": repr(self.eta),
            "f0": repr(self.f0),
            "M": self.M,
            "M_prime": self.M_prime,
            "eta_bar": repr(self.eta_bar),
            "q": self.q,
            "alpha": self.alpha,
            "alpha_prime": self.alpha_prime,
            "K": self.K,
            "r": self.r,
        }


@dataclass(frozen=True)
class PdeProblem:
    """
    The terminal value problem `∂u/∂t + Lu + F(t, x, u, σ*∇u) = 0` on `[0, T[ × R^k`, `u(T) = g`.

    `L` is the generator of the forward diffusion. The value `u(t, x)` is represented by `Y_t^{t,x}` of the backward
    equation driven by `F` along the diffusion started at `x` at time `t`.

    :param diffusion:
        The forward diffusion.
    :param terminal:
        The terminal function `g`.
    :param F:
        The nonlinearity as a driver `F(t, x, y, z)`.
    :param T:
        The horizon.
    :param assumptions:
        Data of the assumptions on `g` and `F`.
    """

    diffusion: DiffusionSpec
    terminal: TerminalMap
    F: Generator
    T: float
    assumptions: PdeAssumptions = field(default_factory=PdeAssumptions)

    def __post_init__(self):
        if not self.T > 0:
            raise InvalidParametersError(f"The horizon must be positive, got {self.T}.")
        if self.F.dim_r != self.diffusion.dim_r:
            raise IncompatibleGeneratorsError(
                f"F has r={self.F.dim_r} but the diffusion has r={self.diffusion.dim_r}."
            )
        if (self.terminal.dim_k, self.terminal.dim_d) != (self.diffusion.dim_k, self.F.dim_d):
            raise IncompatibleGeneratorsError(
                f"g goes from R^{self.terminal.dim_k} to R^{self.terminal.dim_d}, expected "
                f"R^{self.diffusion.dim_k} to R^{self.F.dim_d}."
            )

    @property
    def dim_k(self) -> int:
        return self.diffusion.dim_k

    @property
    def dim_d(self) -> int:
        return self.F.dim_d

    @property
    def dim_r(self) -> int:
        return self.F.dim_r

    def envelope(self, p: Optional[float] = None) -> AssumptionEnvelope:
        return self.assumptions.to_envelope(p)

    def weight_exponent(self, p: Optional[float] = None) -> float:
        """
        The exponent `δ′` of the weight `e^{-δ′|x|}` under which the solution's norms are finite.

        :param p:
            Integrability exponent; defaults to the assumptions' exponent.
        :returns:
            `δ + κ′ + 1{M′ ≠ 0}`.
        """
        data = self.assumptions
        p = data.exponent() if p is None else p
        kappa = kappa_prime(p, data.p_bar, data.M_prime, self.T)
        return delta_prime(data.delta, kappa, data.M_prime)

    def bsde_problem(self, t: float, x: np.ndarray, n_steps: int) -> BsdeProblem:
        """
        The backward equation representing `u(t, x)`, on a uniform grid of `[t, T]`.

        :param t:
            Start time, `0 ≤ t ≤ T`; `t = T` gives a degenerate grid.
        :param x:
            Start state of shape `(k,)`.
        :param n_steps:
            Number of time steps; ignored when `t = T`.
        :returns:
            The problem.
        """
        if not 0 <= t <= self.T:
            raise InvalidParametersError(f"t must lie in [0, {self.T}], got {t}.")
        steps = 0 if t == self.T else n_steps
        grid = make_time_grid(float(t), float(self.T), steps)
        return BsdeProblem(self.F, self.terminal, self.diffusion, grid, np.atleast_1d(np.asarray(x, dtype=float)))
