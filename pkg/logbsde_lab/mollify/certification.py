# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from haystack import logging

from logbsde_lab.dataclasses.envelope import AssumptionEnvelope
from logbsde_lab.dataclasses.generator import Generator
from logbsde_lab.dataclasses.reports import Verdict
from logbsde_lab.errors import InvalidParametersError
from logbsde_lab.generators.assumptions import RELATIVE_SLACK, estimate_lipschitz
from logbsde_lab.generators.distance import rho_N
from logbsde_lab.generators.sampling import BoxSampler
from logbsde_lab.mollify.approximation import ApproxGenerator, WeightMap, mollify_generator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ApproxPropertiesReport:  # pylint: disable=too-many-instance-attributes
    """
    Sampled certification of the approximation properties of a mollification schedule.

    :param schedule:
        The approximation indices, increasing.
    :param rows:
        One row per index with the violation counts of the growth bounds, of the one-sided bound and of the
        distance bound, the distance `rho`, `max_abs = max|f_n|` and the Lipschitz quotient estimate.
    :param rho_nonincreasing:
        Whether the distance at the reference point is nonincreasing along the schedule.
    :param rho_strictly_decreasing:
        Whether it is strictly decreasing.
    :param lipschitz_constant:
        Fitted `C` with `Lip(f_n) ≤ C·n^{2p+2}` over the schedule.
    :param verdict:
        Overall verdict.
    :param notes:
        Scope statements.
    """

    schedule: List[float]
    rows: List[Dict[str, Any]]
    rho_nonincreasing: bool
    rho_strictly_decreasing: bool
    lipschitz_constant: float
    verdict: Verdict
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == Verdict.PASS

    @property
    def rho(self) -> List[float]:
        return [row["rho"] for row in self.rows]

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["verdict"] = str(self.verdict)
        return data


def _violations(lhs: np.ndarray, rhs: np.ndarray) -> int:
    slack = RELATIVE_SLACK * (1.0 + np.maximum(np.abs(lhs), np.abs(rhs)))
    return int(np.count_nonzero(~(lhs <= rhs + slack)))


def _sample(g: Generator, sampler: BoxSampler, n_samples: int) -> Tuple[np.ndarray, ...]:
    layout = sampler.layout(g.dim_d, g.dim_r)
    unit, log_rows = sampler.unit_points(n_samples, layout.dim)
    points = layout.decode(unit, log_rows)
    return points["t"][:, 0], points["x"], points["y"], points["z"].reshape(-1, g.dim_d, g.dim_r)


def growth_sides(f_n: ApproxGenerator, t, x, y, z) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Both growth bounds of an approximation at a batch of points.

    :returns:
        `|f_n|`, the refined bound `1{Λ̄≤n, |y|≤n, |z|≤n}(η̄ + |y|^α + |z|^{α′} + 2p·h)` and the crude
        bound `2p + 3n^p`, broadcast to the batch.
    """
    env, n = f_n.envelope, f_n.n
    y_norm = np.linalg.norm(y, axis=1)
    z_norm = np.linalg.norm(z.reshape(len(y), -1), axis=1)
    h = np.asarray(f_n.h(t, x), dtype=float)
    inside = f_n.active(t, x) & (y_norm <= n) & (z_norm <= n)
    refined = np.where(
        inside, env.eta_bar(t, x) + y_norm**env.alpha + z_norm**env.alpha_prime + 2.0 * env.p * h, 0.0
    )
    crude = np.full(len(y), 2.0 * env.p + 3.0 * n**env.p)
    magnitude = np.linalg.norm(f_n.evaluate(t, x, y, z), axis=1)
    return magnitude, refined, crude


def monotonicity_sides(f_n: ApproxGenerator, t, x, y, z) -> Tuple[np.ndarray, np.ndarray]:
    """
    Both sides of `⟨y, f_n⟩ ≤ 1{Λ̄≤n}(η + f⁰|y| + M|y|² + K|y||z| + 10h)`.
    """
    env = f_n.envelope
    y_norm = np.linalg.norm(y, axis=1)
    z_norm = np.linalg.norm(z.reshape(len(y), -1), axis=1)
    h = np.asarray(f_n.h(t, x), dtype=float)
    bound = (
        env.eta(t, x)
        + env.f0(t, x) * y_norm
        + env.M(t, x) * y_norm**2
        + env.K(t, x) * y_norm * z_norm
        + 10.0 * h
    )
    lhs = np.sum(y * f_n.evaluate(t, x, y, z), axis=1)
    return lhs, np.where(f_n.active(t, x), bound, 0.0)


def distance_bound(f_n: ApproxGenerator, N: float, t: float, x: np.ndarray) -> float:
    """
    The bound `2(η̄ + N^α + N^{α′} + 2p·h)` on `ρ_N(f_n - f)` at one point `(t, x)`.
    """
    env = f_n.envelope
    t_arr, x_arr = np.array([float(t)]), np.asarray(x, dtype=float).reshape(1, -1)
    h = float(np.asarray(f_n.h(t_arr, x_arr))[0])
    eta_bar = float(np.asarray(env.eta_bar(t_arr, x_arr))[0])
    return 2.0 * (eta_bar + N**env.alpha + N**env.alpha_prime + 2.0 * env.p * h)


def verify_approx_properties(  # pylint: disable=too-many-locals
    g: Generator,
    env: AssumptionEnvelope,
    schedule: Sequence[float],
    h: Optional[Union[WeightMap, float]] = None,
    sampler: Optional[BoxSampler] = None,
    *,
    n_samples: int = 10_000,
    N: float = 1.0,
    threshold: float = 1e-2,
    grid_density: int = 101,
    quad_nodes: int = 16,
    reference: Tuple[float, Any] = (0.0, 0.0),
    distance_points: Optional[List[Tuple[float, Any]]] = None,
    lipschitz_samples: int = 2_000,
) -> ApproxPropertiesReport:
    """
    Certify the approximation properties of `f_n` along a schedule on sampled points.

    For every `n` the growth bounds `|f_n| ≤ 1{...}(η̄ + |y|^α + |z|^{α′} + 2p·h) ≤ 2p + 3n^p`, the one-sided bound
    `⟨y, f_n⟩ ≤ 1{Λ̄≤n}(η + f⁰|y| + M|y|² + K|y||z| + 10h)` and the distance bound
    `ρ_N(f_n - f) ≤ 2(η̄ + N^α + N^{α′} + 2p·h)` are checked. Convergence requires `ρ_N(f_n - f)` at the reference
    point to be nonincreasing in `n` and below `threshold` at the last index. Smoothness is reported as the fitted
    constant of sampled Lipschitz quotients scaled by `n^{2p+2}`.

    :param g:
        The driver.
    :param env:
        Its envelope.
    :param schedule:
        Increasing approximation indices.
    :param h:
        Weight map, constant, or `None` for `e^{-|x|}`.
    :param sampler:
        Sampler of `(t, x, y, z)`; defaults to the standard box.
    :param n_samples:
        Sampled points per index.
    :param N:
        Radius of the distance `ρ_N`.
    :param threshold:
        Largest accepted distance at the last index.
    :param grid_density:
        Grid points per axis of `ρ_N`.
    :param quad_nodes:
        Gauss-Legendre nodes per axis.
    :param reference:
        The point `(t, x)` of the convergence check.
    :param distance_points:
        Points `(t, x)` of the distance bound; defaults to the reference point.
    :param lipschitz_samples:
        Sampled pairs of the Lipschitz estimate.
    :returns:
        The report.
    :raises InvalidParametersError:
        If the schedule is empty or not increasing.
    """
    schedule = [float(n) for n in schedule]
    if not schedule or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise InvalidParametersError(f"The schedule must be nonempty and increasing, got {schedule}.")
    sampler = sampler or BoxSampler(dim_k=np.atleast_1d(np.asarray(reference[1])).size)
    distance_points = distance_points or [reference]
    t, x, y, z = _sample(g, sampler, n_samples)

    rows = []
    for n in schedule:
        f_n = mollify_generator(g, env, n, h=h, quad_nodes=quad_nodes)
        magnitude, refined, crude = growth_sides(f_n, t, x, y, z)
        lhs, rhs = monotonicity_sides(f_n, t, x, y, z)
        distance_violations = 0
        for t_point, x_point in distance_points:
            x_point = np.atleast_1d(np.asarray(x_point, dtype=float))
            distance = rho_N(f_n, g, N, t_point, x_point, grid_density)
            distance_violations += int(distance > distance_bound(f_n, N, t_point, x_point))
        rho = rho_N(f_n, g, N, reference[0], np.atleast_1d(np.asarray(reference[1], dtype=float)), grid_density)
        lipschitz = estimate_lipschitz(f_n, sampler, lipschitz_samples)
        row = {
            "n": n,
            "growth_violations": _violations(magnitude, refined),
            "crude_growth_violations": _violations(magnitude, crude),
            "monotonicity_violations": _violations(lhs, rhs),
            "distance_violations": distance_violations,
            "rho": rho,
            "max_abs": float(np.max(magnitude)),
            "lipschitz": lipschitz,
            "lipschitz_ratio": lipschitz / n ** (2.0 * env.p + 2.0),
        }
        logger.info("Certified approximation n={n}: rho={rho}", n=n, rho=rho)
        rows.append(row)

    rho = [row["rho"] for row in rows]
    nonincreasing = all(b <= a for a, b in zip(rho, rho[1:]))
    strictly = all(b < a for a, b in zip(rho, rho[1:]))
    ratios = [row["lipschitz_ratio"] for row in rows]
    bounded = all(
        row[key] == 0
        for row in rows
        for key in ("growth_violations", "crude_growth_violations", "monotonicity_violations", "distance_violations")
    )
    smooth = all(np.isfinite(ratios))
    passed = bounded and nonincreasing and rho[-1] < threshold and smooth
    return ApproxPropertiesReport(
        schedule=schedule,
        rows=rows,
        rho_nonincreasing=nonincreasing,
        rho_strictly_decreasing=strictly,
        lipschitz_constant=float(max(ratios)),
        verdict=Verdict.PASS if passed else Verdict.FAIL,
        notes=[
            f"Bounds checked at {n_samples} sampled points per index on {sampler.describe()}.",
            f"Distances are grid suprema at density {grid_density}, lower bounds of the true suprema.",
        ],
    )
