# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from haystack import logging
from tqdm import tqdm

from logbsde_lab.dataclasses.envelope import AssumptionEnvelope
from logbsde_lab.dataclasses.generator import Generator
from logbsde_lab.dataclasses.path_batch import PathBatch
from logbsde_lab.dataclasses.reports import Verdict
from logbsde_lab.dataclasses.solution import BsdeSolution
from logbsde_lab.errors import InvalidParametersError
from logbsde_lab.estimates.functionals import z_energy
from logbsde_lab.generators.distance import rho_N
from logbsde_lab.mollify.approximation import mollify_generator, truncate_terminal
from logbsde_lab.solvers.backward import solve_backward
from logbsde_lab.solvers.config import SolverConfig
from logbsde_lab.solvers.oracles import ode_reduction_solve
from logbsde_lab.solvers.problem import BsdeProblem, TerminalMap
from logbsde_lab.util.seeding import derive_seed

logger = logging.getLogger(__name__)

Approximation = Callable[[float], Tuple[Generator, TerminalMap]]
ReferenceMode = Literal["auto", "oracle", "direct", "largest"]


@dataclass(frozen=True)
class StabilityReport:
    """
    Error curve of the solutions of approximating problems against a reference solution.

    :param rows:
        One row per approximation index with keys `n`, `y_error`, `z_error` and `rho`.
    :param reference:
        How the reference solution was obtained.
    :param burn_in:
        Leading rows exempt from the monotonicity requirement.
    :param threshold:
        Bound on the final `y_error`.
    :param verdict:
        `PASS` if `y_error` is nonincreasing after the burn-in and below the threshold at the last index.
    :param notes:
        Scope statements.
    """

    rows: List[Dict[str, float]]
    reference: str
    burn_in: int
    threshold: float
    verdict: Verdict
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == Verdict.PASS

    @property
    def y_errors(self) -> List[float]:
        return [row["y_error"] for row in self.rows]

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes the report to a dictionary.

        :returns:
            Dictionary with all fields, the verdict as a string.
        """
        return {
            "rows": [dict(row) for row in self.rows],
            "reference": self.reference,
            "burn_in": self.burn_in,
            "threshold": self.threshold,
            "verdict": str(self.verdict),
            "notes": list(self.notes),
        }


def truncated_terminal(terminal: TerminalMap, n: float) -> TerminalMap:
    """
    The terminal map `x -> g(x)·1{|g(x)| ≤ n}`.
    """
    return TerminalMap(
        terminal.dim_k, terminal.dim_d, lambda x: truncate_terminal(terminal(x), n), kind="truncated", n=n
    )


def default_approximation(
    problem: BsdeProblem, envelope: AssumptionEnvelope, h: Any = None, quad_nodes: int = 16
) -> Approximation:
    """
    The approximating data `(f_n, ξⁿ)`: the mollified driver and the truncated terminal map.

    :param problem:
        The problem.
    :param envelope:
        Envelope of the problem's driver.
    :param h:
        Weight of the mollification, see `mollify_generator`.
    :param quad_nodes:
        Gauss-Legendre nodes per axis.
    :returns:
        Map from the index `n` to the approximating driver and terminal map.
    """

    def approximate(n: float) -> Tuple[Generator, TerminalMap]:
        generator = mollify_generator(problem.generator, envelope, n, h=h, quad_nodes=quad_nodes)
        return generator, truncated_terminal(problem.terminal, n)

    return approximate


def _is_deterministic(problem: BsdeProblem) -> bool:
    return problem.generator.x_free and problem.generator.z_free and problem.terminal.kind == "constant"


def _oracle_solution(problem: BsdeProblem, n_paths: int) -> BsdeSolution:
    xi = problem.terminal(problem.x0[None, :])[0]
    values = ode_reduction_solve(problem.generator, xi, problem.grid)
    Y = np.broadcast_to(values, (n_paths, *values.shape)).copy()
    Z = np.zeros((n_paths, problem.grid.n_steps, problem.dim_d, problem.dim_r))
    return BsdeSolution(grid=problem.grid, Y=Y, Z=Z, scheme="oracle")


def solution_distance(first: BsdeSolution, second: BsdeSolution, p_prime: float) -> Tuple[float, float]:
    """
    `E sup_t|Y¹_t - Y²_t|^{p′}` and `E(∫_0^T|Z¹_s - Z²_s|² ds)^{p′/2}` between two solutions on the same paths.
    """
    difference = BsdeSolution(grid=first.grid, Y=first.Y - second.Y, Z=first.Z - second.Z, scheme=first.scheme)
    y_error = float(np.mean(np.max(np.linalg.norm(difference.Y, axis=2), axis=1) ** p_prime))
    z_error = float(np.mean(z_energy(difference) ** (p_prime / 2.0)))
    return y_error, z_error


def stability_sweep(  # pylint: disable=too-many-locals
    problem: BsdeProblem,
    schedule: Sequence[float],
    config: Optional[SolverConfig] = None,
    *,
    envelope: Optional[AssumptionEnvelope] = None,
    approximation: Optional[Approximation] = None,
    reference: ReferenceMode = "auto",
    p_prime: float = 1.5,
    N: float = 1.0,
    burn_in: int = 0,
    threshold: float = 1e-2,
    grid_density: int = 101,
    paths: Optional[PathBatch] = None,
    show_progress: bool = False,
) -> StabilityReport:
    """
    Solve the approximating problems along a schedule and measure their distance to a reference solution.

    Reference modes:
    - `oracle`: the backward ODE of a deterministic problem (driver free of `x` and `z`, constant terminal map);
    - `direct`: the solver applied to the problem itself on the same paths;
    - `largest`: the approximating problem at the last index of the schedule;
    - `auto`: `oracle` when the problem is deterministic, else `direct`.

    Every problem is solved on the same paths. The existential level of the stability bound is not searched
    for; the sweep checks convergence of the solutions only.

    :param problem:
        The problem.
    :param schedule:
        Increasing approximation indices.
    :param config:
        Solver settings; defaults to `SolverConfig()`.
    :param envelope:
        Envelope of the driver, required by the default approximation.
    :param approximation:
        Map from the index to the approximating driver and terminal map; defaults to mollification and truncation.
    :param reference:
        The reference mode.
    :param p_prime:
        Exponent of the error norms.
    :param N:
        Radius of the `ρ_N` column, evaluated at `(t_0, x_0)`.
    :param burn_in:
        Leading rows exempt from the monotonicity requirement.
    :param threshold:
        Bound on the final `y_error`.
    :param grid_density:
        Grid points per axis of `ρ_N`.
    :param paths:
        Shared paths; simulated from the configured seed when absent.
    :param show_progress:
        Whether to show a progress bar over the schedule.
    :returns:
        The report.
    :raises InvalidParametersError:
        If the schedule is empty or not increasing, or no approximation can be built.
    """
    config = config or SolverConfig()
    schedule = [float(n) for n in schedule]
    if not schedule or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise InvalidParametersError(f"The schedule must be nonempty and increasing, got {schedule}.")
    if approximation is None:
        if envelope is None:
            raise InvalidParametersError("The default approximation needs the driver's envelope.")
        approximation = default_approximation(problem, envelope)
    if reference == "auto":
        reference = "oracle" if _is_deterministic(problem) else "direct"
    if reference == "oracle" and not _is_deterministic(problem):
        raise InvalidParametersError("The oracle reference needs a driver free of x and z and a constant terminal.")
    if paths is None:
        seed = derive_seed(config.seed, "estimates", "stability")
        paths = problem.simulate(config.n_paths, seed, n_jobs=config.n_jobs)

    solutions = []
    for n in tqdm(schedule, desc="Stability sweep", disable=not show_progress):
        generator, terminal = approximation(n)
        approximate = BsdeProblem(generator, terminal, problem.diffusion, problem.grid, problem.x0)
        solutions.append((n, generator, solve_backward(approximate, paths, config)))

    if reference == "oracle":
        target = _oracle_solution(problem, paths.n_paths)
    elif reference == "direct":
        target = solve_backward(problem, paths, config)
    else:
        target = solutions[-1][2]

    rows = []
    t0 = float(problem.grid.points[0])
    for n, generator, solution in solutions:
        y_error, z_error = solution_distance(solution, target, p_prime)
        rho = rho_N(generator, problem.generator, N, t0, problem.x0, grid_density)
        rows.append({"n": n, "y_error": y_error, "z_error": z_error, "rho": rho})
        logger.debug("n={n}: y error {y_error}, rho {rho}", n=n, y_error=y_error, rho=rho)

    errors = np.array([row["y_error"] for row in rows])
    tail = errors[burn_in:]
    monotone = bool(np.all(np.diff(tail) <= 1e-12 * (1.0 + tail[:-1]))) if len(tail) > 1 else True
    passed = monotone and bool(np.isfinite(errors[-1])) and errors[-1] < threshold
    if not np.all(np.isfinite(errors)):
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.PASS if passed else Verdict.FAIL
    logger.info(
        "Stability sweep over {count} indices against the {reference} reference: {verdict}",
        count=len(rows),
        reference=reference,
        verdict=str(verdict),
    )
    return StabilityReport(
        rows=rows,
        reference=reference,
        burn_in=burn_in,
        threshold=threshold,
        verdict=verdict,
        notes=[
            "Convergence of the approximating solutions is checked; the level of the stability bound is not searched.",
            f"Errors use the exponent p' = {p_prime:g}; suprema over time are taken on the grid.",
        ],
    )
