# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0
import numpy as np
import pytest
from pydantic import ValidationError

from logbsde_lab.dataclasses.generator import Generator
from logbsde_lab.dataclasses.time_grid import make_time_grid
from logbsde_lab.errors import FixedPointDivergenceError, InvalidParametersError, NumericFaultError
from logbsde_lab.forward.diffusions import make_diffusion
from logbsde_lab.generators.examples import make_example
from logbsde_lab.solvers.backward import default_y_clip, driver_values, solve_backward
from logbsde_lab.solvers.config import RegressionBasisConfig, SolverConfig
from logbsde_lab.solvers.oracles import log_drift_closed_form
from logbsde_lab.solvers.problem import BsdeProblem, make_terminal
from logbsde_lab.solvers.regression import regress


def log_drift_problem(n_steps=200):
    generator, _ = make_example("log_drift", {"K": 1.0})
    return BsdeProblem(
        generator,
        make_terminal("constant", c=np.e),
        make_diffusion("zero"),
        make_time_grid(0.0, 1.0, n_steps),
        [0.0],
    )


class TestSolverConfig:
    def test_defaults(self):
        config = SolverConfig()
        assert config.scheme == "implicit"
        assert config.basis.kind == "global_poly"

    def test_theta_range(self):
        with pytest.raises(ValidationError):
            SolverConfig(theta=0.3)

    def test_partition_degree(self):
        with pytest.raises(ValidationError):
            RegressionBasisConfig(kind="local_partition", degree=2)
        with pytest.raises(ValidationError):
            RegressionBasisConfig(domain=(1.0, -1.0))

    def test_unknown_field(self):
        with pytest.raises(ValidationError):
            SolverConfig(n_path=10)


class TestRegress:
    def test_constant_targets_are_exact(self):
        states = np.random.default_rng(0).normal(size=(50, 1))
        result = regress(states, np.full((50, 2), 3.0), RegressionBasisConfig())
        np.testing.assert_array_equal(result.fitted, np.full((50, 2), 3.0))

    def test_polynomial_targets_are_reproduced(self):
        states = np.random.default_rng(0).normal(size=(200, 1))
        targets = 1.0 + 2.0 * states - states**2
        result = regress(states, targets, RegressionBasisConfig(degree=2))
        np.testing.assert_allclose(result.fitted, targets, atol=1e-9)
        assert not result.rank_deficient
        assert result.residual_rms < 1e-9

    def test_local_partition(self):
        states = np.linspace(-1.0, 1.0, 400)[:, None]
        targets = np.abs(states)
        result = regress(states, targets, RegressionBasisConfig(kind="local_partition", degree=1, n_cells=2))
        np.testing.assert_allclose(result.fitted, targets, atol=1e-9)

    def test_identical_states_fall_back_to_the_mean(self):
        targets = np.array([[1.0], [3.0]])
        result = regress(np.zeros((2, 1)), targets, RegressionBasisConfig())
        np.testing.assert_array_equal(result.fitted, [[2.0], [2.0]])


class TestSolveBackward:
    def test_zero_driver_keeps_the_terminal_value(self):
        generator, _ = make_example("zero")
        problem = BsdeProblem(
            generator, make_terminal("constant", c=2.0), make_diffusion("brownian"), make_time_grid(0.0, 1.0, 10), [0.0]
        )
        paths = problem.simulate(64, seed=0)
        solution = solve_backward(problem, paths, SolverConfig(n_paths=64))
        np.testing.assert_array_equal(solution.Y, np.full((64, 11, 1), 2.0))
        np.testing.assert_array_equal(solution.Z, np.zeros((64, 10, 1, 1)))
        assert solution.clip_count == 0

    def test_implicit_scheme_matches_the_closed_form(self):
        problem = log_drift_problem()
        paths = problem.simulate(16, seed=0)
        solution = solve_backward(problem, paths, SolverConfig(n_paths=16, theta=0.5))
        exact = log_drift_closed_form(np.array([np.e]), 1.0, 0.0, 1.0)
        np.testing.assert_allclose(solution.y0, exact, rtol=1e-4)
        assert solution.scheme == "implicit"
        assert all(diagnostic.iterations > 0 for diagnostic in solution.diagnostics)

    def test_explicit_scheme_is_first_order(self):
        problem = log_drift_problem()
        paths = problem.simulate(16, seed=0)
        solution = solve_backward(problem, paths, SolverConfig(n_paths=16, scheme="explicit"))
        exact = log_drift_closed_form(np.array([np.e]), 1.0, 0.0, 1.0)
        np.testing.assert_allclose(solution.y0, exact, rtol=1e-2)
        assert solution.scheme == "explicit"

    def test_identity_terminal_recovers_the_brownian_control(self):
        generator, _ = make_example("zero")
        problem = BsdeProblem(
            generator, make_terminal("identity"), make_diffusion("brownian"), make_time_grid(0.0, 1.0, 20), [0.0]
        )
        paths = problem.simulate(5000, seed=1)
        solution = solve_backward(problem, paths, SolverConfig(n_paths=5000))
        assert abs(float(solution.Z.mean()) - 1.0) < 0.05
        assert abs(float(solution.y0[0])) < 0.1

    def test_paths_on_another_grid(self):
        problem = log_drift_problem(n_steps=10)
        paths = log_drift_problem(n_steps=20).simulate(4, seed=0)
        with pytest.raises(InvalidParametersError, match="another time grid"):
            solve_backward(problem, paths)

    def test_fixed_point_divergence(self):
        problem = log_drift_problem(n_steps=10)
        paths = problem.simulate(4, seed=0)
        with pytest.raises(FixedPointDivergenceError) as error:
            solve_backward(problem, paths, SolverConfig(picard_iters=1))
        assert error.value.step_index == 9

    def test_non_finite_driver(self):
        generator = Generator(1, 1, lambda t, x, y, z: np.where(y > 1.0, np.nan, y), "holes")
        with pytest.raises(NumericFaultError) as error:
            driver_values(generator, 0.0, np.zeros((3, 1)), np.array([[0.0], [2.0], [0.5]]), np.zeros((3, 1, 1)), 4)
        assert (error.value.path_index, error.value.step_index) == (1, 4)


def test_default_y_clip():
    assert default_y_clip(np.array([[3.0, 4.0], [0.0, 1.0]])) == 60.0


@pytest.mark.parametrize("theta", [1.0, 0.5])
def test_implicit_scheme_converges_at_least_at_first_order(theta):
    exact = log_drift_closed_form(np.array([np.e]), 1.0, 0.0, 1.0)
    errors = []
    for n_steps in (50, 100, 200):
        problem = log_drift_problem(n_steps)
        solution = solve_backward(problem, problem.simulate(4, seed=0), SolverConfig(n_paths=4, theta=theta))
        errors.append(float(np.abs(solution.y0 - exact).max()))
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(orders >= 0.8)


def test_initial_value_is_monotone_in_the_terminal_value():
    generator, _ = make_example("log_drift", {"K": 1.0})
    values = []
    for c in (0.5, 1.0, 2.0):
        problem = BsdeProblem(
            generator, make_terminal("constant", c=c), make_diffusion("zero"), make_time_grid(0.0, 1.0, 50), [0.0]
        )
        solution = solve_backward(problem, problem.simulate(4, seed=0), SolverConfig(n_paths=4))
        values.append(float(solution.y0[0]))
    assert values[0] < values[1] < values[2]
