# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
from haystack import logging
from scipy.integrate import trapezoid

from logbsde_lab.dataclasses.envelope import AssumptionEnvelope
from logbsde_lab.dataclasses.generator import Generator
from logbsde_lab.dataclasses.reports import EstimateReport, Verdict
from logbsde_lab.dataclasses.solution import BsdeSolution
from logbsde_lab.errors import InvalidExponentsError
from logbsde_lab.util.seeding import block_generator

logger = logging.getLogger(__name__)

# Spawn-key entry of the bootstrap resampling stream.
_BOOTSTRAP_STREAM = 11


@dataclass(frozen=True)
class ThetaEstimate:
    """
    Monte Carlo estimate of `Θ_p = E sup_t|Y_t|^p + E(∫_0^T|Z_s|² ds)^{p/2}` with a percentile bootstrap interval.

    :param value:
        The estimate.
    :param lower:
        Lower end of the bootstrap interval.
    :param upper:
        Upper end of the bootstrap interval.
    :param sup_term:
        The estimate of `E sup_t|Y_t|^p`.
    :param z_term:
        The estimate of `E(∫|Z|²)^{p/2}`.
    :param p:
        The exponent.
    :param confidence:
        Confidence level of the interval.
    """

    value: float
    lower: float
    upper: float
    sup_term: float
    z_term: float
    p: float
    confidence: float

    @property
    def spread(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def sup_y_power(solution: BsdeSolution, p: float) -> np.ndarray:
    """
    `sup_t|Y_t|^p` on every path, the supremum taken over the grid.
    """
    return np.max(np.linalg.norm(solution.Y, axis=2), axis=1) ** p


def z_energy(solution: BsdeSolution, weight: Optional[np.ndarray] = None) -> np.ndarray:
    """
    `∫_0^T w_s·|Z_s|² ds` on every path for the piecewise constant `Z`.

    :param solution:
        The solution.
    :param weight:
        Weights `w` of shape `(n_paths, n_steps + 1)`, read at the left end of every step; `None` means `w ≡ 1`.
    :returns:
        Values of shape `(n_paths,)`.
    """
    squared = np.sum(solution.Z.reshape(solution.n_paths, solution.grid.n_steps, -1) ** 2, axis=2)
    if weight is not None:
        squared = squared * weight[:, :-1]
    return squared @ solution.grid.dt


def bootstrap_interval(
    samples: np.ndarray, n_resamples: int = 200, confidence: float = 0.95, seed: int = 0
) -> Tuple[float, float]:
    """
    Percentile bootstrap interval of the mean of per-path samples.

    :param samples:
        Values of shape `(n,)`.
    :param n_resamples:
        Number of resamples.
    :param confidence:
        Confidence level.
    :param seed:
        Seed of the resampling stream.
    :returns:
        The pair `(lower, upper)`.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size < 2 or n_resamples < 1:
        mean = float(np.mean(samples)) if samples.size else 0.0
        return mean, mean
    rng = block_generator(seed, 0, stream=(_BOOTSTRAP_STREAM,))
    index = rng.integers(0, samples.size, size=(n_resamples, samples.size))
    means = samples[index].mean(axis=1)
    tail = 50.0 * (1.0 - confidence)
    return float(np.percentile(means, tail)), float(np.percentile(means, 100.0 - tail))


def theta_p(
    solution: BsdeSolution, p: float, *, n_resamples: int = 200, confidence: float = 0.95, seed: int = 0
) -> ThetaEstimate:
    """
    Estimate `Θ_p` of a discrete solution.

    Heavy tails for `p` close to one show up as a wide bootstrap interval; the estimate itself is not corrected.

    :param solution:
        The solution.
    :param p:
        Exponent, `p > 1`.
    :param n_resamples:
        Bootstrap resamples.
    :param confidence:
        Confidence level of the interval.
    :param seed:
        Seed of the bootstrap.
    :returns:
        The estimate.
    :raises InvalidExponentsError:
        If `p ≤ 1`.
    """
    if not p > 1:
        raise InvalidExponentsError(f"p must exceed 1, got {p}.")
    sup_samples = sup_y_power(solution, p)
    z_samples = z_energy(solution) ** (p / 2.0)
    samples = sup_samples + z_samples
    lower, upper = bootstrap_interval(samples, n_resamples, confidence, seed)
    estimate = ThetaEstimate(
        value=float(np.mean(samples)),
        lower=lower,
        upper=upper,
        sup_term=float(np.mean(sup_samples)),
        z_term=float(np.mean(z_samples)),
        p=float(p),
        confidence=confidence,
    )
    logger.debug("Theta_{p} = {value} in [{lower}, {upper}]", p=p, value=estimate.value, lower=lower, upper=upper)
    return estimate


def beta_hat(p: float, q: float, alpha: float, alpha_prime: float) -> float:
    """
    The integrability exponent `β̂ = (2/α′) ∧ (p/α) ∧ (p/α′) ∧ q` of the driver along a solution.

    :param p:
        Integrability exponent of the solution, `p > 1`.
    :param q:
        Integrability exponent of `η̄`, `q > 1`.
    :param alpha:
        Growth exponent in `y`, `1 < α < p`.
    :param alpha_prime:
        Growth exponent in `z`, `1 < α′ < p ∧ 2`.
    :returns:
        The exponent.
    :raises InvalidExponentsError:
        If an exponent is outside its range.
    """
    if not p > 1:
        raise InvalidExponentsError(f"p must exceed 1, got {p}.")
    if not q > 1:
        raise InvalidExponentsError(f"q must exceed 1, got {q}.")
    if not 1 < alpha < p:
        raise InvalidExponentsError(f"alpha must lie in ]1, {p}[, got {alpha}.")
    if not 1 < alpha_prime < min(p, 2.0):
        raise InvalidExponentsError(f"alpha' must lie in ]1, {min(p, 2.0)}[, got {alpha_prime}.")
    return min(2.0 / alpha_prime, p / alpha, p / alpha_prime, q)


def integrability_check(
    solution: BsdeSolution,
    generator: Generator,
    env: AssumptionEnvelope,
    states: Optional[np.ndarray] = None,
) -> EstimateReport:
    """
    Compare `E∫_0^T|f(s, X_s, Y_s, Z_s)|^{β̂} ds` with the absolute bound
    `9^{p+q}(1+T)[1 + E∫η̄^q ds + E sup|Y|^p + E(∫|Z|²)^{p/2}]`.

    The left-hand integral is a left-point sum over the steps, matching the piecewise constant `Z`.

    :param solution:
        The solution.
    :param generator:
        Its driver.
    :param env:
        Envelope of the driver, providing `p`, `q`, `α`, `α′` and `η̄`.
    :param states:
        Forward states of shape `(n_paths, n_steps + 1, k)`; `None` evaluates at `x = 0`.
    :returns:
        The report; `INCONCLUSIVE` if the left-hand side is not finite.
    """
    grid = solution.grid
    n_paths, n_steps = solution.n_paths, grid.n_steps
    beta = beta_hat(env.p, env.q, env.alpha, env.alpha_prime)
    if states is None:
        states = np.zeros((n_paths, n_steps + 1, 1))
    states = np.asarray(states, dtype=float)

    lhs_paths = np.zeros(n_paths)
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(n_steps):
            values = generator.evaluate(
                np.full(n_paths, grid.points[step]), states[:, step], solution.Y[:, step], solution.Z[:, step]
            )
            lhs_paths += np.linalg.norm(values, axis=1) ** beta * grid.dt[step]
        lhs = float(np.mean(lhs_paths))

        t = np.broadcast_to(grid.points, (n_paths, n_steps + 1)).ravel()
        eta_bar = np.asarray(env.eta_bar(t, states.reshape(-1, states.shape[2])), dtype=float)
        eta_term = float(np.mean(trapezoid(eta_bar.reshape(n_paths, -1) ** env.q, grid.points, axis=1)))
        y_term = float(np.mean(sup_y_power(solution, env.p)))
        z_term = float(np.mean(z_energy(solution) ** (env.p / 2.0)))
        rhs = 9.0 ** (env.p + env.q) * (1.0 + grid.T - grid.t0) * (1.0 + eta_term + y_term + z_term)

    if not np.isfinite(lhs):
        logger.warning("The driver integral along {label} is not finite", label=generator.label)
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.PASS if lhs <= rhs else Verdict.FAIL
    return EstimateReport(
        name="integrability",
        lhs=[lhs],
        rhs=[rhs],
        fitted_constant=1.0,
        verdict=verdict,
        table=[
            {
                "beta_hat": beta,
                "lhs": lhs,
                "rhs": rhs,
                "eta_bar_term": eta_term,
                "sup_y_term": y_term,
                "z_term": z_term,
            }
        ],
        notes=["Suprema over time are taken on the grid."],
    )
