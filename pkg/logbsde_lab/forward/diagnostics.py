# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from haystack import logging
from scipy import integrate, special

from logbsde_lab.dataclasses.diffusion import DiffusionSpec
from logbsde_lab.dataclasses.path_batch import PathBatch
from logbsde_lab.dataclasses.pde_field import tensor_nodes
from logbsde_lab.dataclasses.time_grid import make_time_grid
from logbsde_lab.errors import (
    DegenerateTestFunctionError,
    DivergenceError,
    InvalidIntervalError,
    InvalidParametersError,
)
from logbsde_lab.forward.simulation import simulate_paths
from logbsde_lab.util.quadrature import tensor_trapezoid_weights

logger = logging.getLogger(__name__)

# Largest argument of exp that stays finite in float64.
_MAX_EXPONENT = np.log(np.finfo(float).max)


@dataclass(frozen=True)
class ExpMomentEstimate:
    """
    Monte Carlo estimate of `E exp(κ sup_s |X_s - x0|²)`.

    :param value:
        The estimate, `inf` when divergent.
    :param divergent:
        Whether the exponential overflowed on some path.
    :param tail_fraction:
        Smallest fraction of paths whose contributions exceed half of the total.
    :param kappa:
        The exponent `κ`.
    :param n_paths:
        Number of paths.
    """

    value: float
    divergent: bool
    tail_fraction: float
    kappa: float
    n_paths: int


def exp_moment_estimate(batch: PathBatch, kappa: float, x0: Optional[np.ndarray] = None) -> ExpMomentEstimate:
    """
    Estimate the exponential moment of the running squared displacement.

    The supremum is taken over the grid points of each path, which biases the estimate downward.

    :param batch:
        Simulated paths.
    :param kappa:
        Nonnegative exponent.
    :param x0:
        Reference point, defaults to each path's initial state.
    :returns:
        The estimate with its heavy-tail diagnostics.
    """
    if kappa < 0:
        raise InvalidParametersError(f"kappa must be nonnegative, got {kappa}.")
    n_paths = batch.n_paths
    if kappa == 0:
        return ExpMomentEstimate(value=1.0, divergent=False, tail_fraction=0.5, kappa=0.0, n_paths=n_paths)

    reference = batch.states[:, :1, :] if x0 is None else np.asarray(x0, dtype=float).reshape(1, 1, -1)
    sup_sq = np.max(np.sum((batch.states - reference) ** 2, axis=2), axis=1)
    exponents = kappa * sup_sq
    if np.any(exponents > _MAX_EXPONENT):
        logger.warning(
            "Exponential moment with kappa={kappa} overflowed on {count} of {n_paths} paths",
            kappa=kappa,
            count=int(np.count_nonzero(exponents > _MAX_EXPONENT)),
            n_paths=n_paths,
        )
        return ExpMomentEstimate(value=float("inf"), divergent=True, tail_fraction=0.0, kappa=kappa, n_paths=n_paths)

    contributions = np.exp(exponents)
    if np.all(exponents == 0):
        return ExpMomentEstimate(value=1.0, divergent=False, tail_fraction=0.5, kappa=kappa, n_paths=n_paths)
    value = float(np.mean(contributions))
    ordered = np.cumsum(np.sort(contributions)[::-1])
    dominant = int(np.searchsorted(ordered, 0.5 * ordered[-1], side="right")) + 1
    return ExpMomentEstimate(
        value=value, divergent=False, tail_fraction=min(dominant, n_paths) / n_paths, kappa=kappa, n_paths=n_paths
    )


def find_working_kappa(
    batch: PathBatch,
    x0: Optional[np.ndarray] = None,
    kappa_max: float = 10.0,
    min_tail_fraction: float = 0.01,
    tol: float = 1e-3,
) -> float:
    """
    Bisect for the largest exponent whose exponential moment is finite and not dominated by a few paths.

    :param batch:
        Simulated paths.
    :param x0:
        Reference point, defaults to each path's initial state.
    :param kappa_max:
        Upper end of the search interval.
    :param min_tail_fraction:
        Smallest acceptable share of paths carrying half of the mean.
    :param tol:
        Width of the final bracket.
    :returns:
        The working exponent, `0.0` if no positive exponent qualifies.
    """

    def works(kappa: float) -> bool:
        estimate = exp_moment_estimate(batch, kappa, x0)
        return not estimate.divergent and estimate.tail_fraction >= min_tail_fraction

    if works(kappa_max):
        return kappa_max
    low, high = 0.0, kappa_max
    while high - low > tol:
        middle = 0.5 * (low + high)
        if works(middle):
            low = middle
        else:
            high = middle
    return low


def _sup_abs_brownian_tail(level: float, horizon: float) -> float:
    # P(sup_{s<=T} |W_s| >= level), by the theta series for small levels and images otherwise.
    if level <= 0:
        return 1.0
    b = level / np.sqrt(horizon)
    if b < 1.0:
        k = np.arange(0, 40)
        series = np.sum((-1.0) ** k / (2 * k + 1) * np.exp(-((2 * k + 1) ** 2) * np.pi**2 / (8 * b**2)))
        return float(1.0 - 4.0 / np.pi * series)
    j = np.arange(0, 12)
    return float(4.0 * np.sum((-1.0) ** j * special.ndtr(-(2 * j + 1) * b)))


def reflection_oracle(kappa: float, horizon: float) -> float:
    """
    Exact `E exp(κ sup_{s≤T} |W_s|²)` for a one-dimensional Brownian motion.

    :param kappa:
        Nonnegative exponent, below `1/(2T)`.
    :param horizon:
        The horizon `T`.
    :returns:
        The exponential moment.
    :raises DivergenceError:
        If `κ ≥ 1/(2T)`, where the moment is infinite.
    """
    if kappa == 0:
        return 1.0
    if kappa >= 1.0 / (2.0 * horizon):
        raise DivergenceError(f"E exp(kappa sup|W|^2) is infinite for kappa={kappa} >= 1/(2T).")

    def integrand(level: float) -> float:
        tail = _sup_abs_brownian_tail(level, horizon)
        if tail <= 0:
            return 0.0
        return 2.0 * kappa * level * np.exp(kappa * level**2 + np.log(tail))

    value, _ = integrate.quad(integrand, 0.0, np.inf, limit=200, epsabs=1e-12, epsrel=1e-10)
    return 1.0 + value


@dataclass(frozen=True)
class NormEquivalenceReport:
    """
    Ratio of the transported weighted integral of a test function to its plain weighted integral.

    :param ratio:
        `R = E∫φ(X_s^{t,x}) e^{-δ|x|} dx / ∫φ(x) e^{-δ|x|} dx`.
    :param constant:
        Sandwich constant `C`.
    :param numerator:
        Monte Carlo numerator.
    :param denominator:
        Quadrature denominator.
    """

    ratio: float
    constant: float
    numerator: float
    denominator: float

    @property
    def lower_ratio(self) -> float:
        """
        `R·C`, at least 1 when the lower bound holds.
        """
        return self.ratio * self.constant

    @property
    def upper_ratio(self) -> float:
        """
        `R/C`, at most 1 when the upper bound holds.
        """
        return self.ratio / self.constant

    @property
    def passed(self) -> bool:
        return self.lower_ratio >= 1.0 and self.upper_ratio <= 1.0


def norm_equivalence_check(
    spec: DiffusionSpec,
    phi: Callable[[np.ndarray], np.ndarray],
    delta: float,
    t: float,
    s: float,
    x_axis: np.ndarray,
    n_paths: int,
    *,
    seed: int = 0,
    constant: float = 10.0,
    dt: float = 0.01,
) -> NormEquivalenceReport:
    """
    Compare the weighted integral of a test function transported by the flow with its plain weighted integral.

    The spatial quadrature is the tensor trapezoid rule on `x_axis` in every coordinate. Nodes whose
    paths did not move evaluate the test function once, so the identity flow gives `R = 1` exactly.

    :param spec:
        Diffusion coefficients.
    :param phi:
        Nonnegative test function, vectorized from `(n, k)` to `(n,)`.
    :param delta:
        Nonnegative weight exponent.
    :param t:
        Start time.
    :param s:
        Evaluation time, `s ≥ t`.
    :param x_axis:
        Coordinates of the grid on each axis.
    :param n_paths:
        Paths per node.
    :param seed:
        Seed of the simulation.
    :param constant:
        Sandwich constant `C`.
    :param dt:
        Target time step.
    :returns:
        The ratio report.
    :raises DegenerateTestFunctionError:
        If the denominator vanishes.
    """
    if s < t:
        raise InvalidIntervalError(f"s={s} must not precede t={t}.")
    if delta < 0:
        raise InvalidParametersError(f"delta must be nonnegative, got {delta}.")
    x_axes = [np.asarray(x_axis, dtype=float)] * spec.dim_k
    nodes = tensor_nodes(x_axes)
    weights = tensor_trapezoid_weights(x_axes) * np.exp(-delta * np.linalg.norm(nodes, axis=1))

    denominator = float(np.sum(weights * phi(nodes)))
    if denominator == 0:
        raise DegenerateTestFunctionError("The test function has zero weighted mass on the grid.")

    grid = make_time_grid(t, s, max(1, int(np.ceil((s - t) / dt))) if s > t else 0)
    starts = np.repeat(nodes, n_paths, axis=0)
    batch = simulate_paths(spec, grid, starts, n_paths=starts.shape[0], seed=seed)
    values = phi(batch.terminal_states).reshape(len(nodes), n_paths)
    frozen = np.all(values == values[:, :1], axis=1)
    node_means = np.where(frozen, values[:, 0], values.mean(axis=1))

    numerator = float(np.sum(weights * node_means))
    ratio = numerator / denominator
    logger.debug("Norm equivalence ratio {ratio} on {n_nodes} nodes", ratio=ratio, n_nodes=len(nodes))
    return NormEquivalenceReport(ratio=ratio, constant=constant, numerator=numerator, denominator=denominator)
