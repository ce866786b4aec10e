# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from haystack import logging
from scipy.integrate import trapezoid
from tqdm import tqdm

from logbsde_lab.dataclasses.envelope import AssumptionEnvelope
from logbsde_lab.dataclasses.path_batch import PathBatch
from logbsde_lab.dataclasses.reports import EstimateReport, Verdict
from logbsde_lab.dataclasses.solution import BsdeSolution
from logbsde_lab.estimates.functionals import z_energy
from logbsde_lab.estimates.weights import lambda_path
from logbsde_lab.solvers.backward import solve_backward
from logbsde_lab.solvers.config import SolverConfig
from logbsde_lab.solvers.problem import BsdeProblem
from logbsde_lab.util.seeding import derive_seed

logger = logging.getLogger(__name__)

#: Default factor between the calibrated ratio and the fitted constant.
SAFETY_FACTOR = 2.0


@dataclass(frozen=True)
class AprioriInstance:
    """
    One member of a problem family of the a-priori experiment.

    :param label:
        Name used in the sweep table.
    :param problem:
        The problem.
    :param envelope:
        Envelope certifying the problem's driver; `p` and `γ` may be overridden by the check.
    """

    label: str
    problem: BsdeProblem
    envelope: AssumptionEnvelope


def apriori_sides(solution: BsdeSolution, env: AssumptionEnvelope, paths: PathBatch) -> Tuple[float, float]:
    """
    Both sides of the weighted a-priori estimate on one solved instance.

    `LHS = E sup_t|Y_t|^p e_t^{p/2} + E(∫_0^T e_s|Z_s|² ds)^{p/2}` and
    `RHS = E|ξ|^p e_T^{p/2} + E(∫_0^T e_s·η_s ds)^{p/2} + E(∫_0^T e_s^{1/2}·f⁰_s ds)^p` with `e_t = exp(∫_0^t λ)`.

    :param solution:
        The solution.
    :param env:
        The envelope, providing `p`, `λ`, `η` and `f⁰`.
    :param paths:
        The forward paths of the solution.
    :returns:
        The pair `(lhs, rhs)`.
    """
    weighted = lambda_path(solution.Y, env, paths.states, solution.grid)
    p, grid = env.p, solution.grid
    n_paths, n_points = weighted.e.shape
    t = np.broadcast_to(grid.points, (n_paths, n_points)).ravel()
    x = paths.states.reshape(n_paths * n_points, -1)
    eta = np.asarray(env.eta(t, x), dtype=float).reshape(n_paths, n_points)
    f0 = np.asarray(env.f0(t, x), dtype=float).reshape(n_paths, n_points)

    with np.errstate(over="ignore", invalid="ignore"):
        y_norm = np.linalg.norm(solution.Y, axis=2)
        sup_term = np.mean(np.max(y_norm**p * weighted.e ** (p / 2.0), axis=1))
        z_term = np.mean(z_energy(solution, weighted.e) ** (p / 2.0))
        terminal_term = np.mean(y_norm[:, -1] ** p * weighted.e[:, -1] ** (p / 2.0))
        eta_term = np.mean(trapezoid(weighted.e * eta, grid.points, axis=1) ** (p / 2.0))
        f0_term = np.mean(trapezoid(np.sqrt(weighted.e) * f0, grid.points, axis=1) ** p)
    return float(sup_term + z_term), float(terminal_term + eta_term + f0_term)


def _ratio(lhs: float, rhs: float) -> float:
    if lhs == 0.0:
        return 0.0
    return lhs / rhs if rhs > 0 else float("inf")


def _solve_instance(
    instance: AprioriInstance, env: AssumptionEnvelope, config: SolverConfig
) -> Tuple[float, float]:
    seed = derive_seed(config.seed, "estimates", "apriori")
    paths = instance.problem.simulate(config.n_paths, seed, n_jobs=config.n_jobs)
    solution = solve_backward(instance.problem, paths, config)
    return apriori_sides(solution, env, paths)


def apriori_check(  # pylint: disable=too-many-locals
    calibration: AprioriInstance,
    sweep: Sequence[AprioriInstance],
    config: Optional[SolverConfig] = None,
    *,
    p: Optional[float] = None,
    gamma: Optional[float] = None,
    safety_factor: float = SAFETY_FACTOR,
    show_progress: bool = False,
) -> EstimateReport:
    """
    Check that one constant fitted on a calibration instance bounds the weighted estimate on a whole sweep.

    The fitted constant is `safety_factor·LHS/RHS` on the calibration instance, with `0/0 = 0`. A sweep instance
    passes when `LHS ≤ C·RHS`; one with a non-finite side is inconclusive. All instances are solved on paths
    from the same derived seed.

    :param calibration:
        The calibration instance.
    :param sweep:
        The sweep instances.
    :param config:
        Solver settings; defaults to `SolverConfig()`.
    :param p:
        Exponent overriding the envelopes' `p`.
    :param gamma:
        Weight exponent overriding the envelopes' `γ`.
    :param safety_factor:
        Factor applied to the calibrated ratio.
    :param show_progress:
        Whether to show a progress bar over the sweep.
    :returns:
        The report, one table row per instance, the calibration first.
    """
    config = config or SolverConfig()

    def envelope_of(instance: AprioriInstance) -> AssumptionEnvelope:
        env = instance.envelope
        if gamma is not None:
            env = env.with_gamma(gamma)
        if p is not None:
            env = replace(env, p=p)
        return env

    calibration_lhs, calibration_rhs = _solve_instance(calibration, envelope_of(calibration), config)
    ratio = _ratio(calibration_lhs, calibration_rhs)
    constant = safety_factor * ratio
    logger.info(
        "Calibrated the a-priori constant on {label}: ratio {ratio}, C = {constant}",
        label=calibration.label,
        ratio=ratio,
        constant=constant,
    )

    lhs_values, rhs_values, verdicts = [calibration_lhs], [calibration_rhs], []
    table: List[Dict[str, object]] = [
        {
            "instance": calibration.label,
            "role": "calibration",
            "lhs": calibration_lhs,
            "rhs": calibration_rhs,
            "ratio": ratio,
            "verdict": str(Verdict.PASS if np.isfinite(ratio) else Verdict.INCONCLUSIVE),
        }
    ]
    if not (np.isfinite(calibration_lhs) and np.isfinite(calibration_rhs)):
        verdicts.append(Verdict.INCONCLUSIVE)

    for instance in tqdm(sweep, desc="A-priori sweep", disable=not show_progress):
        lhs, rhs = _solve_instance(instance, envelope_of(instance), config)
        if not (np.isfinite(lhs) and np.isfinite(rhs)):
            verdict = Verdict.INCONCLUSIVE
            logger.warning("Divergent a-priori functionals on {label}", label=instance.label)
        else:
            verdict = Verdict.PASS if lhs <= constant * rhs * (1.0 + 1e-12) else Verdict.FAIL
        verdicts.append(verdict)
        lhs_values.append(lhs)
        rhs_values.append(rhs)
        table.append(
            {
                "instance": instance.label,
                "role": "sweep",
                "lhs": lhs,
                "rhs": rhs,
                "ratio": _ratio(lhs, rhs),
                "verdict": str(verdict),
            }
        )

    return EstimateReport(
        name="apriori",
        lhs=lhs_values,
        rhs=rhs_values,
        fitted_constant=constant,
        verdict=Verdict.combine(verdicts),
        table=table,
        notes=[
            f"C = {safety_factor:g} x calibrated ratio on '{calibration.label}'.",
            "Suprema over time are taken on the grid and time integrals by the trapezoid rule.",
        ],
    )


def lambda_process_check(
    solutions: Sequence[Tuple[BsdeSolution, PathBatch]], env: AssumptionEnvelope
) -> EstimateReport:
    """
    Compare `E sup_t Λ_t^{p/2} + E(∫_0^T e_s|Z_s|² ds)^{p/2}` with `E Λ_T^{p/2}` on solved instances.

    The fitted constant is the largest ratio. An instance fails when `Λ` is negative or one of its integral
    components decreases in time, and is inconclusive when a side is not finite.

    :param solutions:
        Pairs of a solution and its forward paths.
    :param env:
        The envelope shared by the instances.
    :returns:
        The report.
    """
    p = env.p
    lhs_values, rhs_values, verdicts, table = [], [], [], []
    for index, (solution, paths) in enumerate(solutions):
        weighted = lambda_path(solution.Y, env, paths.states, solution.grid)
        with np.errstate(over="ignore", invalid="ignore"):
            lhs = float(
                np.mean(np.max(weighted.Lambda, axis=1) ** (p / 2.0))
                + np.mean(z_energy(solution, weighted.e) ** (p / 2.0))
            )
            rhs = float(np.mean(weighted.Lambda[:, -1] ** (p / 2.0)))
        if not (np.isfinite(lhs) and np.isfinite(rhs)):
            verdict = Verdict.INCONCLUSIVE
        else:
            verdict = Verdict.PASS if weighted.is_consistent() else Verdict.FAIL
        verdicts.append(verdict)
        lhs_values.append(lhs)
        rhs_values.append(rhs)
        table.append({"instance": index, "lhs": lhs, "rhs": rhs, "ratio": _ratio(lhs, rhs), "verdict": str(verdict)})

    ratios = [row["ratio"] for row in table if np.isfinite(row["ratio"])]
    return EstimateReport(
        name="lambda_process",
        lhs=lhs_values,
        rhs=rhs_values,
        fitted_constant=max(ratios, default=0.0),
        verdict=Verdict.combine(verdicts),
        table=table,
        notes=["The fitted constant is the largest observed ratio."],
    )
