# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from logbsde_lab.errors import InvalidEnvelopeError

EnvelopeMap = Callable[[np.ndarray, np.ndarray], np.ndarray]


class ConstantMap:
    """
    Envelope map `(t, x) -> c` returning the same value everywhere.
    """

    def __init__(self, value: float):
        self.value = float(value)

    def __call__(self, t: np.ndarray, x: np.ndarray) -> np.ndarray:
        return np.full(np.shape(t), self.value, dtype=float)

    def __repr__(self) -> str:
        return f"ConstantMap({self.value})"


def _identity_sequence(level: float) -> float:
    return float(level)


@dataclass(frozen=True)
class AssumptionEnvelope:  # pylint: disable=too-many-instance-attributes
    """
    Certificate data of the integrability, monotonicity, growth and local log-Lipschitz assumptions.

    The process-valued entries are Markovian maps `(t, x) -> R_+` vectorized over `t` of shape `(n,)`
    and `x` of shape `(n, k)`.

    :param p:
        Integrability exponent, `p > 1`.
    :param gamma:
        Weight exponent, `0 < γ < (1 ∧ (p-1))/2`.
    :param eta:
        Constant term `η` of the monotonicity bound.
    :param f0:
        Linear term `f⁰` of the monotonicity bound.
    :param M:
        Quadratic term `M` of the monotonicity bound.
    :param K:
        Cross term `K` of the monotonicity bound.
    :param eta_bar:
        Constant term `η̄` of the growth bound.
    :param q:
        Integrability exponent of `η̄`, `q > 1`.
    :param alpha:
        Growth exponent in `y`, `1 < α < p`.
    :param alpha_prime:
        Growth exponent in `z`, `1 < α′ < p ∧ 2`.
    :param v:
        Localizing process of the log-Lipschitz bound.
    :param q_prime:
        Integrability exponent of `v`, `q′ > 0`.
    :param K_prime:
        Log-Lipschitz constant `K′ ≥ 0`.
    :param A:
        Increasing sequence `N -> A_N > 1`.
    :param mu:
        Polynomial order with `A_N ≤ N^μ`.
    """

    p: float = 2.0
    gamma: float = 0.25
    eta: EnvelopeMap = field(default_factory=lambda: ConstantMap(0.0))
    f0: EnvelopeMap = field(default_factory=lambda: ConstantMap(0.0))
    M: EnvelopeMap = field(default_factory=lambda: ConstantMap(0.0))
    K: EnvelopeMap = field(default_factory=lambda: ConstantMap(0.0))
    eta_bar: EnvelopeMap = field(default_factory=lambda: ConstantMap(0.0))
    q: float = 2.0
    alpha: float = 1.5
    alpha_prime: float = 1.5
    v: EnvelopeMap = field(default_factory=lambda: ConstantMap(0.0))
    q_prime: float = 1.0
    K_prime: float = 0.0
    A: Callable[[float], float] = _identity_sequence
    mu: float = 1.0

    def with_gamma(self, gamma: float) -> "AssumptionEnvelope":
        """
        Copy of the envelope with another weight exponent.

        :param gamma:
            The new `γ`.
        :returns:
            The modified envelope.
        """
        return replace(self, gamma=gamma)

    def validate(self) -> "AssumptionEnvelope":
        """
        Check the structural constraints of the envelope.

        :returns:
            The envelope itself.
        :raises InvalidEnvelopeError:
            If any exponent is out of range or `A` is not admissible.
        """
        if not self.p > 1:
            raise InvalidEnvelopeError(f"p must exceed 1, got {self.p}.")
        gamma_bound = min(1.0, self.p - 1.0) / 2.0
        if not 0 < self.gamma < gamma_bound:
            raise InvalidEnvelopeError(f"gamma must lie in ]0, {gamma_bound}[, got {self.gamma}.")
        if not self.q > 1:
            raise InvalidEnvelopeError(f"q must exceed 1, got {self.q}.")
        if not 1 < self.alpha < self.p:
            raise InvalidEnvelopeError(f"alpha must lie in ]1, {self.p}[, got {self.alpha}.")
        alpha_prime_bound = min(self.p, 2.0)
        if not 1 < self.alpha_prime < alpha_prime_bound:
            raise InvalidEnvelopeError(f"alpha' must lie in ]1, {alpha_prime_bound}[, got {self.alpha_prime}.")
        if not self.q_prime > 0:
            raise InvalidEnvelopeError(f"q' must be positive, got {self.q_prime}.")
        if self.K_prime < 0:
            raise InvalidEnvelopeError(f"K' must be nonnegative, got {self.K_prime}.")
        if not self.mu > 0:
            raise InvalidEnvelopeError(f"mu must be positive, got {self.mu}.")

        levels = np.arange(2, 1001, dtype=float)
        values = np.array([self.A(level) for level in levels])
        if np.any(values <= 1):
            raise InvalidEnvelopeError("A_N must exceed 1 for N >= 2.")
        if np.any(np.diff(values) < 0):
            raise InvalidEnvelopeError("A_N must be nondecreasing.")
        if np.any(values > levels**self.mu * (1 + 1e-12)):
            raise InvalidEnvelopeError(f"A_N must not exceed N^mu with mu={self.mu}.")
        return self

    def lambda_bar(self, t: np.ndarray, x: np.ndarray, h: np.ndarray) -> np.ndarray:
        """
        The level process `Λ̄ = η + η̄ + f⁰ + M + K + 1/h` used by the approximation indicator.

        :param t:
            Times of shape `(n,)`.
        :param x:
            States of shape `(n, k)`.
        :param h:
            Weights `h(t, x)` in `]0, 1]`, shape `(n,)`.
        :returns:
            Values of shape `(n,)`.
        """
        return (
            self.eta(t, x) + self.eta_bar(t, x) + self.f0(t, x) + self.M(t, x) + self.K(t, x) + 1.0 / np.asarray(h)
        )
