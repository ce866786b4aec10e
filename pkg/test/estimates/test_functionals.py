# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0
import numpy as np
import pytest

from logbsde_lab.dataclasses.envelope import AssumptionEnvelope, ConstantMap
from logbsde_lab.dataclasses.reports import Verdict
from logbsde_lab.dataclasses.solution import BsdeSolution
from logbsde_lab.dataclasses.time_grid import make_time_grid
from logbsde_lab.forward.diffusions import make_diffusion
from logbsde_lab.forward.simulation import simulate_paths
from logbsde_lab.errors import InvalidExponentsError, InvalidParametersError
from logbsde_lab.estimates.functionals import beta_hat, bootstrap_interval, integrability_check, theta_p, z_energy
from logbsde_lab.estimates.weights import WeightedProcesses, lambda_path
from logbsde_lab.generators.examples import make_example


def constant_solution(value=2.0, n_paths=5, n_steps=10, z=0.0):
    grid = make_time_grid(0.0, 1.0, n_steps)
    return BsdeSolution(
        grid=grid, Y=np.full((n_paths, n_steps + 1, 1), value), Z=np.full((n_paths, n_steps, 1, 1), z)
    )


class TestLambdaPath:
    def test_trivial_envelope(self):
        grid = make_time_grid(0.0, 1.0, 10)
        weighted = lambda_path(np.full((3, 11, 1), 2.0), AssumptionEnvelope(), None, grid)
        np.testing.assert_array_equal(weighted.e, np.ones((3, 11)))
        np.testing.assert_array_equal(weighted.Lambda, np.full((3, 11), 4.0))
        assert weighted.n_paths == 3
        assert weighted.is_consistent()

    def test_weight_and_integral_parts(self):
        grid = make_time_grid(0.0, 1.0, 1000)
        envelope = AssumptionEnvelope(M=ConstantMap(1.0), eta=ConstantMap(1.0))
        weighted = lambda_path(np.ones(1001), envelope, None, grid)
        np.testing.assert_allclose(weighted.log_e[0], 2.0 * grid.points)
        np.testing.assert_allclose(weighted.eta_part[0, -1], np.exp(2.0) - 1.0, rtol=1e-5)
        np.testing.assert_allclose(weighted.Lambda[0, -1], 2.0 * np.exp(2.0) - 1.0, rtol=1e-5)
        assert weighted.is_consistent()

    def test_length_mismatch(self):
        with pytest.raises(InvalidParametersError):
            lambda_path(np.ones(5), AssumptionEnvelope(), None, make_time_grid(0.0, 1.0, 10))

    def test_negative_process_is_inconsistent(self):
        grid = make_time_grid(0.0, 1.0, 1)
        weighted = WeightedProcesses(
            grid=grid,
            log_e=np.zeros((1, 2)),
            e=np.ones((1, 2)),
            Lambda=np.array([[1.0, -1.0]]),
            eta_part=np.zeros((1, 2)),
            f0_part=np.zeros((1, 2)),
        )
        assert not weighted.is_consistent()


class TestThetaP:
    def test_deterministic_solution(self):
        estimate = theta_p(constant_solution(2.0), 2.0)
        assert estimate.value == pytest.approx(4.0)
        assert estimate.sup_term == pytest.approx(4.0)
        assert estimate.z_term == 0.0
        assert estimate.spread == pytest.approx(0.0)

    def test_z_term(self):
        estimate = theta_p(constant_solution(0.0, z=1.0), 2.0)
        assert estimate.z_term == pytest.approx(1.0)

    def test_rejects_small_exponent(self):
        with pytest.raises(InvalidExponentsError):
            theta_p(constant_solution(), 1.0)


def test_z_energy():
    np.testing.assert_allclose(z_energy(constant_solution(z=2.0)), np.full(5, 4.0))
    weight = np.full((5, 11), 0.5)
    np.testing.assert_allclose(z_energy(constant_solution(z=2.0), weight), np.full(5, 2.0))


class TestBootstrapInterval:
    def test_single_sample(self):
        assert bootstrap_interval(np.array([3.0])) == (3.0, 3.0)

    def test_covers_the_mean_and_is_reproducible(self):
        samples = np.random.default_rng(0).normal(size=500)
        lower, upper = bootstrap_interval(samples, seed=4)
        assert lower < samples.mean() < upper
        assert bootstrap_interval(samples, seed=4) == (lower, upper)


class TestBetaHat:
    def test_value(self):
        assert beta_hat(2.0, 2.0, 1.5, 1.5) == pytest.approx(4.0 / 3.0)
        assert beta_hat(4.0, 1.2, 1.5, 1.5) == pytest.approx(1.2)

    @pytest.mark.parametrize(
        "p, q, alpha, alpha_prime",
        [(1.0, 2.0, 1.5, 1.5), (2.0, 1.0, 1.5, 1.5), (2.0, 2.0, 2.5, 1.5), (3.0, 2.0, 1.5, 2.0)],
    )
    def test_ranges(self, p, q, alpha, alpha_prime):
        with pytest.raises(InvalidExponentsError):
            beta_hat(p, q, alpha, alpha_prime)


def test_integrability_check_passes_on_a_bounded_solution():
    generator, envelope = make_example("log_drift")
    report = integrability_check(constant_solution(np.e), generator, envelope)
    assert report.verdict == Verdict.PASS
    assert report.table[0]["beta_hat"] == pytest.approx(beta_hat(2.0, envelope.q, envelope.alpha, 1.5))
    assert report.lhs[0] == pytest.approx(np.e ** report.table[0]["beta_hat"])


@pytest.mark.parametrize("kind", ["state_coupled", "composite5"])
def test_weighted_processes_grow_along_brownian_paths(kind):
    grid = make_time_grid(0.0, 1.0, 50)
    paths = simulate_paths(make_diffusion("brownian"), grid, np.array([0.0]), 20, seed=0)
    _, envelope = make_example(kind)
    weighted = lambda_path(np.ones((20, 51, 1)), envelope, paths.states, grid)
    for part in (weighted.log_e, weighted.e, weighted.eta_part, weighted.f0_part):
        assert np.all(np.diff(part, axis=1) >= 0.0)
    assert weighted.is_consistent()


def test_beta_hat_is_monotone_in_its_exponents():
    base = {"p": 3.0, "q": 2.0, "alpha": 1.5, "alpha_prime": 1.5}
    increasing = {"p": [2.0, 2.5, 3.0, 4.0], "q": [1.2, 1.5, 2.0, 3.0]}
    decreasing = {"alpha": [1.1, 1.5, 2.0, 2.9], "alpha_prime": [1.1, 1.3, 1.6, 1.9]}
    for name, values in increasing.items():
        exponents = [beta_hat(**{**base, name: value}) for value in values]
        assert all(a <= b for a, b in zip(exponents, exponents[1:])), name
    for name, values in decreasing.items():
        exponents = [beta_hat(**{**base, name: value}) for value in values]
        assert all(a >= b for a, b in zip(exponents, exponents[1:])), name
