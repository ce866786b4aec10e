# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0
import numpy as np
import pytest
from scipy.integrate import solve_ivp

from logbsde_lab.dataclasses.diffusion import DiffusionSpec
from logbsde_lab.dataclasses.time_grid import make_time_grid
from logbsde_lab.errors import InvalidParametersError, NumericFaultError
from logbsde_lab.forward.diffusions import make_diffusion
from logbsde_lab.forward.simulation import brownian_increments, simulate_paths


@pytest.fixture
def grid():
    return make_time_grid(0.0, 1.0, 20)


class TestSimulatePaths:
    def test_shapes_and_initial_state(self, grid):
        batch = simulate_paths(make_diffusion("brownian", dim_k=2), grid, np.array([1.0, -1.0]), 10, seed=3)
        assert batch.states.shape == (10, 21, 2)
        assert batch.increments.shape == (10, 20, 2)
        np.testing.assert_array_equal(batch.x0, np.tile([1.0, -1.0], (10, 1)))

    def test_zero_diffusion_stays_put(self, grid):
        batch = simulate_paths(make_diffusion("zero"), grid, np.array([0.5]), 4, seed=1)
        np.testing.assert_array_equal(batch.states, 0.5)

    def test_brownian_states_are_cumulative_increments(self, grid):
        batch = simulate_paths(make_diffusion("brownian"), grid, np.array([0.0]), 8, seed=5)
        np.testing.assert_allclose(batch.states[:, 1:, 0], np.cumsum(batch.increments[:, :, 0], axis=1))

    def test_deterministic_ou_matches_euler_recursion(self):
        grid = make_time_grid(0.0, 1.0, 10)
        batch = simulate_paths(make_diffusion("ou", theta=1.0, sigma=0.0), grid, np.array([1.0]), 2, seed=0)
        np.testing.assert_allclose(batch.states[0, :, 0], 0.9 ** np.arange(11))

    def test_bit_identical_across_workers(self, grid):
        spec = make_diffusion("brownian")
        single = simulate_paths(spec, grid, np.array([0.0]), 50, seed=11, block_size=8)
        threaded = simulate_paths(spec, grid, np.array([0.0]), 50, seed=11, n_jobs=4, block_size=8)
        np.testing.assert_array_equal(single.states, threaded.states)

    def test_paths_do_not_depend_on_batch_size(self, grid):
        spec = make_diffusion("brownian")
        small = simulate_paths(spec, grid, np.array([0.0]), 5, seed=2, block_size=4)
        large = simulate_paths(spec, grid, np.array([0.0]), 13, seed=2, block_size=4)
        np.testing.assert_array_equal(small.states, large.states[:5])

    def test_seeds_differ(self, grid):
        spec = make_diffusion("brownian")
        a = simulate_paths(spec, grid, np.array([0.0]), 5, seed=1)
        b = simulate_paths(spec, grid, np.array([0.0]), 5, seed=2)
        assert not np.array_equal(a.states, b.states)

    def test_non_finite_coefficient_names_path_and_step(self, grid):
        def drift(x):
            return np.where(x > 0.5, np.nan, 1.0)

        spec = DiffusionSpec(dim_k=1, dim_r=1, drift=drift, diffusion=lambda x: np.zeros((x.shape[0], 1, 1)))
        with pytest.raises(NumericFaultError) as error:
            simulate_paths(spec, grid, np.array([[0.0], [0.46]]), 2, seed=0)
        assert error.value.path_index == 1
        assert error.value.step_index == 1

    def test_rejects_empty_batch(self, grid):
        with pytest.raises(InvalidParametersError):
            simulate_paths(make_diffusion("zero"), grid, np.array([0.0]), 0, seed=0)

    def test_rejects_wrong_initial_dimension(self, grid):
        with pytest.raises(InvalidParametersError, match="x0"):
            simulate_paths(make_diffusion("zero", dim_k=2), grid, np.array([0.0, 0.0, 0.0]), 2, seed=0)


def test_brownian_increments_scale_with_time_step():
    grid = make_time_grid(0.0, 1.0, 4)
    increments = brownian_increments(0, grid, 20_000, 1)
    assert increments.shape == (20_000, 4, 1)
    assert np.std(increments) == pytest.approx(0.5, rel=0.03)


def test_brownian_increments_on_degenerate_grid():
    grid = make_time_grid(1.0, 1.0, 0)
    assert brownian_increments(0, grid, 3, 2).shape == (3, 0, 2)


def test_brownian_increments_have_the_step_variance():
    grid = make_time_grid(0.0, 1.0, 8)
    n_paths = 20_000
    increments = brownian_increments(0, grid, n_paths, 2)
    dt = float(grid.dt[0])
    mean = increments.mean(axis=0)
    variance = increments.var(axis=0, ddof=1)
    assert np.all(np.abs(mean) <= 4.0 * np.sqrt(dt / n_paths))
    assert np.all(np.abs(variance - dt) <= 4.0 * dt * np.sqrt(2.0 / (n_paths - 1)))


def _sine_flow():
    return DiffusionSpec(dim_k=1, dim_r=1, drift=np.sin, diffusion=lambda x: np.zeros((x.shape[0], 1, 1)))


@pytest.mark.parametrize(
    "spec, x0",
    [
        (make_diffusion("ou", theta=1.0, sigma=0.0), 1.0),
        (make_diffusion("ou", theta=2.0, mean=1.0, drift=0.5, sigma=0.0), -1.0),
        (_sine_flow(), 1.0),
    ],
    ids=["ou", "shifted-ou", "sine"],
)
def test_euler_scheme_is_first_order_without_noise(spec, x0):
    flow = solve_ivp(
        lambda t, x: spec.drift(x[None, :])[0], (0.0, 1.0), [x0], method="DOP853", rtol=1e-12, atol=1e-12
    )
    exact = flow.y[0, -1]
    errors = []
    for n_steps in (20, 40, 80):
        batch = simulate_paths(spec, make_time_grid(0.0, 1.0, n_steps), np.array([x0]), 1, seed=0)
        errors.append(abs(batch.states[0, -1, 0] - exact))
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(orders >= 0.8)
