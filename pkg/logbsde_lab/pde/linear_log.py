# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from typing import Callable, Optional, Tuple, Union

import numpy as np
from haystack import logging

from logbsde_lab.dataclasses.diffusion import DiffusionSpec
from logbsde_lab.dataclasses.envelope import ConstantMap
from logbsde_lab.dataclasses.generator import Generator
from logbsde_lab.errors import InvalidCoefficientsError, InvalidParametersError
from logbsde_lab.generators.bounds import log_growth_constant, young_constant
from logbsde_lab.generators.sampling import Block, BoxSampler, Layout
from logbsde_lab.pde.problem import PdeAssumptions, PdeProblem
from logbsde_lab.solvers.problem import TerminalMap

logger = logging.getLogger(__name__)

CoefficientMap = Callable[[np.ndarray, np.ndarray], np.ndarray]
Coefficient = Union[np.ndarray, float, CoefficientMap]

# Relative slack of the sampled coefficient bounds.
_SLACK = 1e-9


def _as_map(value: Coefficient, shape: Tuple[int, ...], name: str) -> Tuple[CoefficientMap, bool]:
    """
    Wrap a constant array or a vectorized map `(t, x) -> (n, *shape)`; the flag tells whether it is constant.
    """
    if callable(value):
        return value, False
    array = np.asarray(value, dtype=float)
    if array.shape != shape:
        raise InvalidParametersError(f"{name} must have shape {shape}, got {array.shape}.")

    def constant(t, x):
        return np.broadcast_to(array, (len(np.atleast_1d(t)), *shape))

    return constant, True


def _frobenius(values: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(values.reshape(values.shape[0], -1) ** 2, axis=1))


def _y_log_norm(y: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(y, axis=1)
    return y * np.log(np.where(norm > 0, norm, 1.0))[:, None]


def linear_log_driver(A: CoefficientMap, B: CoefficientMap, C: CoefficientMap):
    """
    The vectorized map `F(t, x, y, z) = A y + ⟨⟨B; z⟩⟩ - C·y·log|y|` with `⟨⟨B; z⟩⟩ = Σ_ij B_ij z_ij`.

    `B` has shape `(n, d, r, d)`: `B[:, i, j]` is the vector multiplying `z_ij`.
    """

    def func(t, x, y, z):
        linear = np.einsum("nij,nj->ni", A(t, x), y)
        coupling = np.einsum("nijm,nij->nm", B(t, x), z)
        return linear + coupling - np.einsum("nij,nj->ni", C(t, x), _y_log_norm(y))

    return func


def verify_coefficients(
    A: CoefficientMap, B: CoefficientMap, C: CoefficientMap, K: float, sampler: BoxSampler, n_samples: int
) -> None:
    """
    Sampled check of `‖A‖ + ‖B‖² ≤ K(1 + |x|)` and `0 ≤ C ≤ K` in the sense of quadratic forms.

    Frobenius norms bound `A` and `B`; the symmetric part of `C` must be nonnegative and `C` bounded by `K` in
    operator norm.

    :raises InvalidCoefficientsError:
        At the first violated bound, naming the worst sampled point.
    """
    layout = Layout([Block("t", 1, *sampler.t_range), Block("x", sampler.dim_k, -sampler.x_half, sampler.x_half)])
    unit, log_rows = sampler.unit_points(n_samples, layout.dim)
    points = layout.decode(unit, np.zeros_like(log_rows))
    t, x = points["t"][:, 0], points["x"]
    radius = np.linalg.norm(x, axis=1)

    growth = _frobenius(np.asarray(A(t, x))) + _frobenius(np.asarray(B(t, x))) ** 2 - K * (1.0 + radius)
    worst = int(np.argmax(growth))
    if growth[worst] > _SLACK * (1.0 + K):
        raise InvalidCoefficientsError(
            f"|A| + |B|^2 exceeds K(1 + |x|) by {growth[worst]:.3e} at t={t[worst]:.4g}, x={x[worst].tolist()}."
        )

    C_values = np.asarray(C(t, x))
    symmetric = 0.5 * (C_values + np.swapaxes(C_values, 1, 2))
    lowest = np.linalg.eigvalsh(symmetric)[:, 0]
    worst = int(np.argmin(lowest))
    if lowest[worst] < -_SLACK * (1.0 + K):
        raise InvalidCoefficientsError(
            f"C is not nonnegative at t={t[worst]:.4g}, x={x[worst].tolist()}: eigenvalue {lowest[worst]:.3e}."
        )
    largest = np.linalg.norm(C_values, ord=2, axis=(1, 2))
    worst = int(np.argmax(largest))
    if largest[worst] > K * (1.0 + _SLACK) + _SLACK:
        raise InvalidCoefficientsError(
            f"|C| = {largest[worst]:.6g} exceeds K = {K} at t={t[worst]:.4g}, x={x[worst].tolist()}."
        )


def linear_log_assumptions(
    K: float, d: int, *, delta: float = 0.0, p_bar: float = 2.0, q: float = 2.0, epsilon: Optional[float] = None
) -> PdeAssumptions:
    """
    Assumption data of the linear-logarithmic system with coefficient bound `K`.

    - monotonicity: `⟨y, F⟩ ≤ K + K(1 + |x|)|y|² + (K(1 + |x|))^{1/2}|y||z|`;
    - growth: `|F| ≤ η̄(x) + |y|^{1+ε} + |z|^{1+ε}`, with `η̄` from Young's inequality and the supremum of the
      logarithmic excess;
    - local log-Lipschitz constant `1 + 4Kd + K²` with localization `e^{|x|}`.

    :param K:
        The coefficient bound.
    :param d:
        Value dimension.
    :param delta:
        Weight exponent of the terminal function's space.
    :param p_bar:
        Integrability exponent of the terminal function.
    :param q:
        Integrability exponent of `η̄`.
    :param epsilon:
        Excess growth exponent; defaults to `min(1/4, (p̄ ∧ 2 - 1)/4)`.
    :returns:
        The validated assumptions.
    """
    epsilon = min(0.25, (min(p_bar, 2.0) - 1.0) / 4.0) if epsilon is None else float(epsilon)
    exponent = 1.0 + epsilon
    log_constant = log_growth_constant(K, exponent, 0.5)

    def eta_bar(t, x):
        scale = K * (1.0 + np.linalg.norm(np.asarray(x, dtype=float), axis=1))
        return young_constant(scale, exponent, 0.5) + log_constant + young_constant(np.sqrt(scale), exponent, 1.0)

    return PdeAssumptions(
        delta=delta,
        p_bar=p_bar,
        eta=ConstantMap(K),
        M=K,
        M_prime=K,
        eta_bar=eta_bar,
        q=q,
        alpha=exponent,
        alpha_prime=exponent,
        K=1.0 + 4.0 * K * d + K**2,
        r=1.0,
    ).validate()


def make_linear_log_pde(  # pylint: disable=too-many-locals
    A: Coefficient,
    B: Coefficient,
    C: Coefficient,
    terminal: TerminalMap,
    diffusion: DiffusionSpec,
    T: float,
    *,
    K: float,
    delta: float = 0.0,
    p_bar: float = 2.0,
    sampler: Optional[BoxSampler] = None,
    n_samples: int = 1000,
) -> PdeProblem:
    """
    Build the system `∂u/∂t + Lu + A u + ⟨⟨B; σ*∇u⟩⟩ - C u log|u| = 0` with its assumption data.

    Coefficients are constant arrays or vectorized maps `(t, x) -> (n, ...)`, with shapes `(d, d)` for `A` and `C`
    and `(d, r, d)` for `B`. Their bounds are verified on quasi-random samples of the sampler's box.

    :param A:
        The linear coefficient.
    :param B:
        The coupling to `σ*∇u`.
    :param C:
        The logarithmic coefficient.
    :param terminal:
        The terminal function.
    :param diffusion:
        The forward diffusion.
    :param T:
        The horizon.
    :param K:
        The coefficient bound.
    :param delta:
        Weight exponent of the terminal function's space.
    :param p_bar:
        Integrability exponent of the terminal function.
    :param sampler:
        Sampler of `(t, x)`; defaults to the box `[0, T] × [-2, 2]^k`.
    :param n_samples:
        Number of sampled points.
    :returns:
        The problem.
    :raises InvalidCoefficientsError:
        If a sampled coefficient violates its bound.
    """
    if K < 0:
        raise InvalidParametersError(f"K must be nonnegative, got {K}.")
    d, r = terminal.dim_d, diffusion.dim_r
    A_map, A_constant = _as_map(A, (d, d), "A")
    B_map, B_constant = _as_map(B, (d, r, d), "B")
    C_map, C_constant = _as_map(C, (d, d), "C")
    sampler = sampler or BoxSampler(dim_k=diffusion.dim_k, t_range=(0.0, T))
    verify_coefficients(A_map, B_map, C_map, K, sampler, n_samples)

    z_free = B_constant and not np.any(np.asarray(B))
    generator = Generator(
        d,
        r,
        linear_log_driver(A_map, B_map, C_map),
        "linear_log",
        kind="linear_log",
        params={"K": K},
        z_free=z_free,
        x_free=A_constant and B_constant and C_constant,
    )
    logger.debug("Built the linear-logarithmic system with K={K}, d={d}, r={r}", K=K, d=d, r=r)
    return PdeProblem(
        diffusion=diffusion,
        terminal=terminal,
        F=generator,
        T=T,
        assumptions=linear_log_assumptions(K, d, delta=delta, p_bar=p_bar),
    )
