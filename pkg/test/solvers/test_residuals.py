# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0
import numpy as np
import pytest

from logbsde_lab.dataclasses.reports import Verdict
from logbsde_lab.dataclasses.solution import BsdeSolution
from logbsde_lab.dataclasses.time_grid import make_time_grid
from logbsde_lab.forward.diffusions import make_diffusion
from logbsde_lab.generators.examples import make_example
from logbsde_lab.solvers.backward import solve_backward
from logbsde_lab.solvers.config import SolverConfig
from logbsde_lab.solvers.problem import BsdeProblem, make_terminal
from logbsde_lab.solvers.residuals import lipschitz_baseline_compare, martingale_residual


def log_drift_problem(n_steps=20):
    generator, _ = make_example("log_drift", {"K": 1.0})
    return BsdeProblem(
        generator, make_terminal("constant", c=np.e), make_diffusion("zero"), make_time_grid(0.0, 1.0, n_steps), [0.0]
    )


def linear_bump_problem(n_steps):
    generator, _ = make_example("linear", {"rate": 0.5})
    return BsdeProblem(
        generator, make_terminal("bump"), make_diffusion("brownian"), make_time_grid(0.0, 1.0, n_steps), [0.0]
    )


class TestMartingaleResidual:
    def test_exact_solution(self):
        generator, _ = make_example("zero")
        problem = BsdeProblem(
            generator, make_terminal("constant"), make_diffusion("brownian"), make_time_grid(0.0, 1.0, 5), [0.0]
        )
        paths = problem.simulate(32, seed=0)
        config = SolverConfig(n_paths=32)
        report = martingale_residual(solve_backward(problem, paths, config), problem, paths, config)
        assert report.projected_norm == [0.0] * 5
        assert report.max_projected == 0.0
        assert report.worst_step == 0

    @pytest.mark.parametrize("theta", [1.0, 0.5])
    def test_vanishes_at_the_fixed_point(self, theta):
        problem = log_drift_problem()
        paths = problem.simulate(8, seed=0)
        config = SolverConfig(n_paths=8, theta=theta)
        report = martingale_residual(solve_backward(problem, paths, config), problem, paths, config)
        assert report.max_projected < 1e-9

    def test_locates_a_perturbed_step(self):
        problem = log_drift_problem()
        paths = problem.simulate(8, seed=0)
        config = SolverConfig(n_paths=8)
        solution = solve_backward(problem, paths, config)
        Y = solution.Y.copy()
        Y[:, 7] += 0.1
        perturbed = BsdeSolution(
            solution.grid, Y=Y, Z=solution.Z, scheme=solution.scheme, diagnostics=solution.diagnostics
        )

        report = martingale_residual(perturbed, problem, paths, config)

        assert report.worst_step == 7
        # The driver pulls towards the fixed point, so the perturbed step carries slightly more than the shift.
        assert report.projected_norm[7] > 0.1
        assert report.projected_norm[6] == pytest.approx(0.1, abs=1e-9)
        untouched = [norm for step, norm in enumerate(report.projected_norm) if step not in (6, 7)]
        assert max(untouched) < 1e-9


class TestLipschitzBaselineCompare:
    def test_schemes_agree(self):
        report = lipschitz_baseline_compare(
            linear_bump_problem(20), SolverConfig(n_paths=2000), lipschitz_samples=500
        )
        assert report.verdict == Verdict.PASS
        assert report.difference <= report.tolerance
        assert report.dt == pytest.approx(0.05)
        assert report.to_dict()["verdict"] == "pass"

    def test_difference_shrinks_with_the_step(self):
        differences = [
            lipschitz_baseline_compare(
                linear_bump_problem(n_steps), SolverConfig(n_paths=1000), lipschitz_samples=200
            ).difference
            for n_steps in (32, 64, 128)
        ]
        assert differences[0] > differences[1] > differences[2]
        assert differences[0] / differences[2] > 2.0
