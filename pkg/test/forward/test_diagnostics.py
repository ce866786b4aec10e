# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0
import numpy as np
import pytest

from logbsde_lab.dataclasses.time_grid import make_time_grid
from logbsde_lab.errors import DegenerateTestFunctionError, DivergenceError, InvalidParametersError
from logbsde_lab.forward.diagnostics import (
    exp_moment_estimate,
    find_working_kappa,
    norm_equivalence_check,
    reflection_oracle,
)
from logbsde_lab.forward.diffusions import make_diffusion
from logbsde_lab.forward.simulation import simulate_paths


def _brownian(n_paths, n_steps, seed=0):
    return simulate_paths(make_diffusion("brownian"), make_time_grid(0.0, 1.0, n_steps), np.array([0.0]), n_paths, seed)


class TestExpMomentEstimate:
    def test_zero_kappa_is_one(self):
        estimate = exp_moment_estimate(_brownian(10, 5), 0.0)
        assert estimate.value == 1.0
        assert not estimate.divergent

    def test_zero_diffusion_is_one(self):
        batch = simulate_paths(make_diffusion("zero"), make_time_grid(0.0, 1.0, 10), np.array([2.0]), 10, seed=0)
        assert exp_moment_estimate(batch, 0.3).value == 1.0

    def test_negative_kappa(self):
        with pytest.raises(InvalidParametersError):
            exp_moment_estimate(_brownian(10, 5), -1.0)

    def test_overflow_is_flagged(self):
        estimate = exp_moment_estimate(_brownian(200, 20), 1e6)
        assert estimate.divergent
        assert estimate.value == float("inf")

    def test_brownian_matches_reflection_oracle(self):
        estimate = exp_moment_estimate(_brownian(4000, 400, seed=4), 0.1)
        assert estimate.value == pytest.approx(reflection_oracle(0.1, 1.0), rel=0.05)


class TestReflectionOracle:
    def test_zero_kappa(self):
        assert reflection_oracle(0.0, 1.0) == 1.0

    def test_increasing_in_kappa(self):
        values = [reflection_oracle(kappa, 1.0) for kappa in (0.05, 0.1, 0.2)]
        assert 1.0 < values[0] < values[1] < values[2]

    def test_small_kappa_expansion(self):
        # E sup_{s<=1} W_s^2 is bounded by Doob's inequality: 1 <= E sup W^2 <= 4
        slope = (reflection_oracle(1e-4, 1.0) - 1.0) / 1e-4
        assert 1.0 <= slope <= 4.0

    def test_divergent_range(self):
        with pytest.raises(DivergenceError):
            reflection_oracle(0.5, 1.0)


def test_find_working_kappa_without_motion_returns_upper_end():
    batch = simulate_paths(make_diffusion("zero"), make_time_grid(0.0, 1.0, 5), np.array([0.0]), 20, seed=0)
    assert find_working_kappa(batch, kappa_max=3.0) == 3.0


def test_find_working_kappa_brownian_is_inside_search_interval():
    kappa = find_working_kappa(_brownian(2000, 50), kappa_max=10.0)
    assert 0.0 < kappa < 10.0


class TestNormEquivalenceCheck:
    def test_identity_flow_gives_ratio_one(self):
        report = norm_equivalence_check(
            make_diffusion("zero"),
            lambda x: np.exp(-np.sum(x**2, axis=1)),
            delta=1.0,
            t=0.0,
            s=0.5,
            x_axis=np.linspace(-3.0, 3.0, 31),
            n_paths=4,
        )
        assert report.ratio == 1.0
        assert report.passed

    def test_brownian_flow_stays_within_sandwich(self):
        report = norm_equivalence_check(
            make_diffusion("brownian"),
            lambda x: np.exp(-np.sum(x**2, axis=1)),
            delta=1.0,
            t=0.0,
            s=0.5,
            x_axis=np.linspace(-6.0, 6.0, 41),
            n_paths=200,
            constant=10.0,
        )
        assert report.passed

    def test_zero_test_function(self):
        with pytest.raises(DegenerateTestFunctionError):
            norm_equivalence_check(
                make_diffusion("zero"), lambda x: np.zeros(len(x)), 1.0, 0.0, 1.0, np.linspace(-1, 1, 5), 2
            )
