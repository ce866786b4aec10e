# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from haystack import logging
from scipy.integrate import cumulative_trapezoid, trapezoid

from logbsde_lab.dataclasses.envelope import AssumptionEnvelope
from logbsde_lab.dataclasses.generator import Generator
from logbsde_lab.dataclasses.path_batch import PathBatch
from logbsde_lab.dataclasses.reports import CheckReport
from logbsde_lab.errors import InvalidParametersError
from logbsde_lab.generators.examples import lambda_weight
from logbsde_lab.generators.sampling import BoxSampler, Layout, project_to_ball
from logbsde_lab.util.seeding import block_generator

logger = logging.getLogger(__name__)

#: Relative slack granted to every sampled inequality.
RELATIVE_SLACK = 1e-9

# Spawn-key entry separating the hill-climbing stream from the path streams of the same seed.
_CLIMB_STREAM = 7

Sides = Tuple[np.ndarray, np.ndarray]
Objective = Callable[[Dict[str, np.ndarray]], Sides]


def _row_norm(values: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(values.reshape(values.shape[0], -1) ** 2, axis=1))


def _slack(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    return RELATIVE_SLACK * (1.0 + np.maximum(np.abs(lhs), np.abs(rhs)))


def _excess(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    excess = lhs - rhs
    # A non-finite driver value is the worst possible violation.
    return np.where(np.isfinite(excess), excess, np.inf)


def _hill_climb(
    layout: Layout,
    objective: Objective,
    unit: np.ndarray,
    log_rows: np.ndarray,
    excess: np.ndarray,
    seed: int,
    n_starts: int,
    n_steps: int,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, int]:
    # Adversarial refinement in unit-cube coordinates, started from the worst samples.
    starts = np.argsort(-excess)[:n_starts]
    current, flags, best = unit[starts].copy(), log_rows[starts].copy(), excess[starts].copy()
    best_lhs, best_rhs = (np.array(side, dtype=float) for side in objective(layout.decode(current, flags)))
    steps = np.full(len(starts), 0.05)
    rng = block_generator(seed, 0, stream=(_CLIMB_STREAM,))
    evaluations = len(starts)
    for _ in range(n_steps):
        proposal = np.clip(current + steps[:, None] * rng.standard_normal(current.shape), 0.0, 1.0)
        lhs, rhs = objective(layout.decode(proposal, flags))
        evaluations += len(starts)
        candidate = _excess(lhs, rhs)
        improved = candidate > best
        current[improved], best[improved] = proposal[improved], candidate[improved]
        best_lhs[improved], best_rhs[improved] = lhs[improved], rhs[improved]
        steps = np.where(improved, np.minimum(steps * 1.5, 0.25), np.maximum(steps * 0.7, 1e-6))
    return current, flags, best_lhs, best_rhs, evaluations


def _witness(points: Dict[str, np.ndarray], row: int) -> Dict[str, List[float]]:
    return {name: np.asarray(values[row], dtype=float).ravel().tolist() for name, values in points.items()}


def _sampled_check(
    assumption: str,
    layout: Layout,
    objective: Objective,
    sampler: BoxSampler,
    n_samples: int,
    *,
    n_starts: int = 8,
    n_steps: int = 200,
    details: Optional[Dict[str, Any]] = None,
) -> CheckReport:
    unit, log_rows = sampler.unit_points(n_samples, layout.dim)
    lhs, rhs = objective(layout.decode(unit, log_rows))
    excess = _excess(lhs, rhs)
    violated = excess > _slack(lhs, rhs)

    climbed, flags, climb_lhs, climb_rhs, evaluations = _hill_climb(
        layout, objective, unit, log_rows, excess, sampler.seed, min(n_starts, n_samples), n_steps
    )
    climb_excess = _excess(climb_lhs, climb_rhs)
    climb_violated = climb_excess > _slack(climb_lhs, climb_rhs)

    if climb_excess.max() > excess.max():
        row = int(np.argmax(climb_excess))
        witness = _witness(layout.decode(climbed, flags), row)
        margin = float(climb_excess[row])
    else:
        row = int(np.argmax(excess))
        witness = _witness(layout.decode(unit[row : row + 1], log_rows[row : row + 1]), 0)
        margin = float(excess[row])
    passed = not (violated.any() or climb_violated.any())
    if not passed:
        logger.info(
            "Assumption {assumption} violated by {margin} at {witness}",
            assumption=assumption,
            margin=margin,
            witness=witness,
        )
    return CheckReport(
        assumption=assumption,
        passed=passed,
        margin=margin,
        witness=witness,
        n_samples=n_samples + evaluations,
        box=layout.describe(),
        details={"violations": int(violated.sum() + climb_violated.sum()), **(details or {})},
    )


def _split(points: Dict[str, np.ndarray], dim_d: int, dim_r: int) -> Tuple[np.ndarray, ...]:
    t = points["t"][:, 0]
    z = points["z"].reshape(-1, dim_d, dim_r)
    return t, points["x"], points["y"], z


def h2_sides(g: Generator, env: AssumptionEnvelope, t, x, y, z) -> Sides:
    """
    Both sides of the monotonicity bound `⟨y, f⟩ ≤ η + f⁰|y| + M|y|² + K|y||z|`.

    :returns:
        Left and right sides, each of shape `(n,)`.
    """
    f = g.evaluate(t, x, y, z)
    y_norm, z_norm = _row_norm(y), _row_norm(z)
    lhs = np.sum(y * f, axis=1)
    rhs = env.eta(t, x) + env.f0(t, x) * y_norm + env.M(t, x) * y_norm**2 + env.K(t, x) * y_norm * z_norm
    return lhs, rhs


def h3_sides(g: Generator, env: AssumptionEnvelope, t, x, y, z) -> Sides:
    """
    Both sides of the growth bound `|f| ≤ η̄ + |y|^α + |z|^α′`.

    :returns:
        Left and right sides, each of shape `(n,)`.
    """
    lhs = _row_norm(g.evaluate(t, x, y, z))
    rhs = env.eta_bar(t, x) + _row_norm(y) ** env.alpha + _row_norm(z) ** env.alpha_prime
    return lhs, rhs


def h4_sides(g: Generator, env: AssumptionEnvelope, level: float, t, x, y, z, y2, z2) -> Sides:
    """
    Both sides of the local log-Lipschitz bound at truncation level `N`.

    The left side `⟨y - y′, f(y, z) - f(y′, z′)⟩` is set to zero where `v(t, x) > N`.

    :returns:
        Left and right sides, each of shape `(n,)`.
    """
    log_a = np.log(env.A(level))
    dy, dz = y - y2, z - z2
    lhs = np.sum(dy * (g.evaluate(t, x, y, z) - g.evaluate(t, x, y2, z2)), axis=1)
    lhs = np.where(env.v(t, x) <= level, lhs, 0.0)
    dy_norm, dz_norm = _row_norm(dy), _row_norm(dz)
    k_prime = env.K_prime
    rhs = (
        k_prime * dy_norm**2 * log_a
        + np.sqrt(k_prime * log_a) * dy_norm * dz_norm
        + k_prime * log_a / env.A(level)
    )
    return lhs, np.broadcast_to(rhs, lhs.shape).copy()


def _pair_points(points: Dict[str, np.ndarray], dim_d: int, dim_r: int, radius: float) -> Tuple[np.ndarray, ...]:
    t = points["t"][:, 0]
    y = project_to_ball(points["y"], radius)
    z_flat = project_to_ball(points["z"], radius)
    y2 = project_to_ball(y + points["dy"], radius)
    z2_flat = project_to_ball(z_flat + points["dz"], radius)
    return (
        t,
        points["x"],
        y,
        z_flat.reshape(-1, dim_d, dim_r),
        y2,
        z2_flat.reshape(-1, dim_d, dim_r),
    )


def _with_pairs(points: Dict[str, np.ndarray], dim_d: int, dim_r: int, radius: float) -> Dict[str, np.ndarray]:
    t, x, y, z, y2, z2 = _pair_points(points, dim_d, dim_r, radius)
    return {"t": t[:, None], "x": x, "y": y, "z": z.reshape(len(t), -1), "y2": y2, "z2": z2.reshape(len(t), -1)}


def check_h1(g: Generator, sampler: BoxSampler, n_samples: int, *, depth: int = 12, tol: float = 1e-3) -> CheckReport:
    """
    Sampled continuity check of the driver in `(y, z)`.

    At every sampled point `p` the driver is evaluated along `p + 10^{-j}u`, `j = 1..depth`, for a random unit
    direction `u`; the last increment must be below `tol·(1 + |f(p)|)`.

    :param g:
        The generator.
    :param sampler:
        The box sampler.
    :param n_samples:
        Number of base points.
    :param depth:
        Number of geometric refinements.
    :param tol:
        Relative tolerance on the last increment.
    :returns:
        The report, with the increments of the worst point in `details`.
    """
    layout = sampler.layout(g.dim_d, g.dim_r)
    unit, log_rows = sampler.unit_points(n_samples, layout.dim)
    t, x, y, z = _split(layout.decode(unit, log_rows), g.dim_d, g.dim_r)
    rng = block_generator(sampler.seed, 1, stream=(_CLIMB_STREAM,))
    direction = rng.standard_normal((n_samples, g.dim_d * (1 + g.dim_r)))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    dy, dz = direction[:, : g.dim_d], direction[:, g.dim_d :].reshape(-1, g.dim_d, g.dim_r)

    base = g.evaluate(t, x, y, z)
    increments = np.empty((n_samples, depth))
    for j in range(depth):
        radius = 10.0 ** -(j + 1)
        moved = g.evaluate(t, x, y + radius * dy, z + radius * dz)
        increments[:, j] = _row_norm(moved - base)
    bound = tol * (1.0 + _row_norm(base))
    excess = np.where(np.isfinite(increments[:, -1]), increments[:, -1] - bound, np.inf)
    row = int(np.argmax(excess))
    return CheckReport(
        assumption="H1",
        passed=bool(np.all(excess <= 0)),
        margin=float(excess[row]),
        witness={
            "t": [float(t[row])],
            "x": x[row].tolist(),
            "y": y[row].tolist(),
            "z": z[row].ravel().tolist(),
            "direction": direction[row].tolist(),
        },
        n_samples=n_samples * (depth + 1),
        box=layout.describe(),
        details={"increments": increments[row].tolist(), "depth": depth, "tol": tol},
    )


def check_h2(g: Generator, env: AssumptionEnvelope, sampler: BoxSampler, n_samples: int, **climb: Any) -> CheckReport:
    """
    Sampled check of the monotonicity bound `⟨y, f(t,x,y,z)⟩ ≤ η + f⁰|y| + M|y|² + K|y||z|`.

    :param g:
        The generator.
    :param env:
        Its envelope.
    :param sampler:
        The box sampler.
    :param n_samples:
        Number of quasi-random samples before hill-climbing.
    :param climb:
        `n_starts` and `n_steps` of the hill-climbing refinement.
    :returns:
        The report.
    """
    layout = sampler.layout(g.dim_d, g.dim_r)

    def objective(points):
        return h2_sides(g, env, *_split(points, g.dim_d, g.dim_r))

    return _sampled_check("H2", layout, objective, sampler, n_samples, **climb)


def check_h3(g: Generator, env: AssumptionEnvelope, sampler: BoxSampler, n_samples: int, **climb: Any) -> CheckReport:
    """
    Sampled check of the growth bound `|f(t,x,y,z)| ≤ η̄ + |y|^α + |z|^α′`.

    :param g:
        The generator.
    :param env:
        Its envelope.
    :param sampler:
        The box sampler.
    :param n_samples:
        Number of quasi-random samples before hill-climbing.
    :param climb:
        `n_starts` and `n_steps` of the hill-climbing refinement.
    :returns:
        The report.
    """
    layout = sampler.layout(g.dim_d, g.dim_r)

    def objective(points):
        return h3_sides(g, env, *_split(points, g.dim_d, g.dim_r))

    return _sampled_check("H3", layout, objective, sampler, n_samples, **climb)


def check_h4(
    g: Generator,
    env: AssumptionEnvelope,
    sampler: BoxSampler,
    n_samples: int,
    N_list: Sequence[float] = (10.0, 100.0),
    **climb: Any,
) -> CheckReport:
    """
    Sampled check of the local log-Lipschitz bound at each truncation level.

    For every `N`, pairs `(y, z), (y′, z′)` are sampled in the radius-`N` balls, half of them close to each other
    on a logarithmic scale. The report keeps the worst level.

    :param g:
        The generator.
    :param env:
        Its envelope.
    :param sampler:
        The box sampler; its `y` and `z` half-widths are replaced by `N`.
    :param n_samples:
        Number of quasi-random pairs per level.
    :param N_list:
        Truncation levels, each larger than 1 with `A_N > 1`.
    :param climb:
        `n_starts` and `n_steps` of the hill-climbing refinement.
    :returns:
        The report, with one margin per level in `details`.
    :raises InvalidParametersError:
        If a level is at most 1 or `A_N ≤ 1`.
    """
    reports = []
    for level in N_list:
        if level <= 1 or env.A(level) <= 1:
            raise InvalidParametersError(f"Truncation level N={level} needs N > 1 and A_N > 1.")
        layout = sampler.pair_layout(g.dim_d, g.dim_r, level)

        def objective(points, level=level):
            return h4_sides(g, env, level, *_pair_points(points, g.dim_d, g.dim_r, level))

        report = _sampled_check("H4", layout, objective, sampler, n_samples, details={"N": level}, **climb)
        reports.append(_pair_report(report, layout, g, level))

    worst = max(reports, key=lambda report: report.margin)
    return CheckReport(
        assumption="H4",
        passed=all(report.passed for report in reports),
        margin=worst.margin,
        witness=worst.witness,
        n_samples=sum(report.n_samples for report in reports),
        box={"levels": list(N_list), **sampler.describe()},
        details={
            "worst_N": worst.details["N"],
            "margins": {str(report.details["N"]): report.margin for report in reports},
            "violations": sum(report.details["violations"] for report in reports),
        },
    )


def _pair_report(report: CheckReport, layout: Layout, g: Generator, radius: float) -> CheckReport:
    # Replace the raw offsets of the witness by the projected pair.
    raw = {name: np.asarray(values, dtype=float)[None, :] for name, values in report.witness.items()}
    pair = _with_pairs(raw, g.dim_d, g.dim_r, radius)
    witness = {name: values[0].ravel().tolist() for name, values in pair.items()}
    return CheckReport(
        assumption=report.assumption,
        passed=report.passed,
        margin=report.margin,
        witness=witness,
        n_samples=report.n_samples,
        box=layout.describe(),
        details=report.details,
    )


def check_h4_stochastic_monotone(
    g: Generator,
    process: Callable[[np.ndarray, np.ndarray], np.ndarray],
    K_prime: float,
    sampler: BoxSampler,
    n_samples: int,
    **climb: Any,
) -> CheckReport:
    """
    Sampled check of the stochastic-monotone condition

    `⟨Δy, Δf⟩ ≤ K′|Δy|²(C + |log|Δy||) + K′|Δy||Δz|·√(C + |log|Δz||)`,

    with `C(t, x)` a positive process.

    :param g:
        The generator.
    :param process:
        The map `(t, x) -> C(t, x)`.
    :param K_prime:
        The constant `K′`.
    :param sampler:
        The box sampler.
    :param n_samples:
        Number of quasi-random pairs.
    :param climb:
        `n_starts` and `n_steps` of the hill-climbing refinement.
    :returns:
        The report.
    """
    radius = max(sampler.y_half, sampler.z_half)
    layout = sampler.pair_layout(g.dim_d, g.dim_r, radius)

    def objective(points):
        t, x, y, z, y2, z2 = _pair_points(points, g.dim_d, g.dim_r, radius)
        dy, dz = y - y2, z - z2
        lhs = np.sum(dy * (g.evaluate(t, x, y, z) - g.evaluate(t, x, y2, z2)), axis=1)
        dy_norm, dz_norm = _row_norm(dy), _row_norm(dz)
        level = process(t, x)
        log_dy = np.abs(np.log(np.where(dy_norm > 0, dy_norm, 1.0)))
        log_dz = np.abs(np.log(np.where(dz_norm > 0, dz_norm, 1.0)))
        rhs = K_prime * dy_norm**2 * (level + log_dy) + K_prime * dy_norm * dz_norm * np.sqrt(level + log_dz)
        return lhs, rhs

    report = _sampled_check("H4-monotone", layout, objective, sampler, n_samples, **climb)
    return _pair_report(report, layout, g, radius)


def check_h0(
    env: AssumptionEnvelope,
    paths: PathBatch,
    terminal: np.ndarray,
) -> CheckReport:
    """
    Monte Carlo finiteness check of the integrability conditions on simulated paths.

    Estimates `E|ξ|^p e^{(p/2)∫λ}`, `E(∫e·η)^{p/2}` and `E(∫e^{1/2}f⁰)^p` with `e_s = exp(∫_0^s λ)`;
    the check passes when all three are finite.

    :param env:
        The envelope.
    :param paths:
        Simulated forward paths.
    :param terminal:
        Terminal values of shape `(n_paths, d)`.
    :returns:
        The report, with the three estimates in `details`.
    """
    grid = paths.grid
    n_paths, n_points = paths.n_paths, len(grid.points)
    t = np.broadcast_to(grid.points, (n_paths, n_points)).ravel()
    x = paths.states.reshape(n_paths * n_points, -1)

    def along(envelope_map) -> np.ndarray:
        return np.asarray(envelope_map(t, x), dtype=float).reshape(n_paths, n_points)

    weight = lambda_weight(env, t, x).reshape(n_paths, n_points)
    with np.errstate(over="ignore", invalid="ignore"):
        log_e = cumulative_trapezoid(weight, grid.points, axis=1, initial=0.0)
        e = np.exp(log_e)
        p = env.p
        terminal_norm = np.linalg.norm(np.asarray(terminal, dtype=float).reshape(n_paths, -1), axis=1)
        terminal_term = float(np.mean(terminal_norm**p * np.exp(0.5 * p * log_e[:, -1])))
        eta_term = float(np.mean(trapezoid(e * along(env.eta), grid.points, axis=1) ** (p / 2.0)))
        f0_term = float(np.mean(trapezoid(np.sqrt(e) * along(env.f0), grid.points, axis=1) ** p))
    estimates = {"terminal": terminal_term, "eta": eta_term, "f0": f0_term}
    divergent = [name for name, value in estimates.items() if not np.isfinite(value)]
    if divergent:
        logger.warning("Integrability estimates diverged: {names}", names=divergent)
    return CheckReport(
        assumption="H0",
        passed=not divergent,
        margin=float("inf") if divergent else 0.0,
        witness={},
        n_samples=n_paths,
        box={"T": grid.T, "n_steps": grid.n_steps},
        details={"estimates": estimates, "divergent": divergent},
    )


def estimate_lipschitz(
    g: Generator,
    sampler: BoxSampler,
    n_samples: int,
    *,
    max_offset: float = 0.1,
) -> float:
    """
    Largest sampled difference quotient `|f(y,z) - f(y′,z′)| / |(y,z) - (y′,z′)|` at shared `(t, x)`.

    :param g:
        The generator.
    :param sampler:
        The box sampler.
    :param n_samples:
        Number of sampled pairs.
    :param max_offset:
        Half-width of the offset box, relative to the sampler's `y` half-width.
    :returns:
        The estimate; a lower bound of the Lipschitz constant on the box.
    """
    radius = max(sampler.y_half, sampler.z_half)
    layout = sampler.pair_layout(g.dim_d, g.dim_r, radius)
    unit, log_rows = sampler.unit_points(n_samples, layout.dim)
    points = layout.decode(unit, log_rows)
    points["dy"] = points["dy"] * max_offset / 2.0
    points["dz"] = points["dz"] * max_offset / 2.0
    t, x, y, z, y2, z2 = _pair_points(points, g.dim_d, g.dim_r, radius)
    distance = np.sqrt(_row_norm(y - y2) ** 2 + _row_norm(z - z2) ** 2)
    change = _row_norm(g.evaluate(t, x, y, z) - g.evaluate(t, x, y2, z2))
    moved = distance > 0
    if not moved.any():
        return 0.0
    return float(np.max(change[moved] / distance[moved]))

