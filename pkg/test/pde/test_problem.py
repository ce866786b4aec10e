# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0
import numpy as np
import pytest

from logbsde_lab.errors import (
    IncompatibleGeneratorsError,
    InvalidCoefficientsError,
    InvalidExponentsError,
    InvalidParametersError,
)
from logbsde_lab.forward.diffusions import make_diffusion
from logbsde_lab.generators.examples import make_example
from logbsde_lab.pde.linear_log import linear_log_assumptions, make_linear_log_pde
from logbsde_lab.pde.problem import PdeAssumptions, PdeProblem, delta_prime, kappa_prime
from logbsde_lab.solvers.problem import make_terminal


class TestWeightConstants:
    def test_kappa_prime(self):
        assert kappa_prime(1.5, 2.0, 0.0, 1.0) == 0.0
        assert kappa_prime(1.5, 2.0, 1.0, 1.0) == pytest.approx(36.0)
        assert kappa_prime(3.0, 4.0, 0.5, 2.0) == pytest.approx(3.0 * 4.0 * 0.5 * 2.0 * 4.0)

    def test_kappa_prime_ranges(self):
        with pytest.raises(InvalidExponentsError):
            kappa_prime(1.0, 2.0, 0.0, 1.0)
        with pytest.raises(InvalidExponentsError):
            kappa_prime(2.0, 2.0, 1.0, 1.0)

    def test_delta_prime(self):
        assert delta_prime(1.0, 0.0, 0.0) == 1.0
        assert delta_prime(1.0, 2.0, 0.5) == 4.0


class TestPdeAssumptions:
    def test_exponent(self):
        assert PdeAssumptions(p_bar=3.0).exponent() == 3.0
        assert PdeAssumptions(M_prime=1.0).exponent() == pytest.approx(1.75)

    def test_envelope(self):
        envelope = PdeAssumptions(M=1.0, M_prime=1.0, K=2.0).to_envelope()
        x = np.array([[0.0], [3.0]])
        np.testing.assert_allclose(envelope.M(np.zeros(2), x), [1.0, 4.0])
        np.testing.assert_allclose(envelope.K(np.zeros(2), x), [1.0, 2.0])
        np.testing.assert_allclose(envelope.v(np.zeros(2), x), [1.0, np.exp(3.0)])
        assert envelope.gamma == pytest.approx(0.1875)
        assert envelope.K_prime == 2.0

    @pytest.mark.parametrize(
        "fields",
        [{"p_bar": 1.0}, {"alpha": 2.5}, {"alpha_prime": 2.0}, {"q": 1.0}],
    )
    def test_invalid_exponents(self, fields):
        with pytest.raises(InvalidExponentsError):
            PdeAssumptions(**fields).validate()

    def test_negative_constant(self):
        with pytest.raises(InvalidParametersError, match="M_prime"):
            PdeAssumptions(M_prime=-1.0).validate()

    def test_to_dict(self):
        data = PdeAssumptions(delta=0.5).to_dict()
        assert data["delta"] == 0.5
        assert data["eta"] == "ConstantMap(0.0)"


def heat_problem(T=1.0):
    generator, _ = make_example("zero")
    return PdeProblem(make_diffusion("brownian", sigma=np.sqrt(2.0)), make_terminal("bump"), generator, T)


class TestPdeProblem:
    def test_horizon(self):
        with pytest.raises(InvalidParametersError):
            heat_problem(T=0.0)

    def test_dimensions(self):
        generator, _ = make_example("zero", {"r": 2})
        with pytest.raises(IncompatibleGeneratorsError):
            PdeProblem(make_diffusion("brownian"), make_terminal("bump"), generator, 1.0)

    def test_bsde_problem(self):
        problem = heat_problem()
        bsde = problem.bsde_problem(0.25, np.array([1.0]), 30)
        assert bsde.grid.n_steps == 30
        assert bsde.grid.points[0] == 0.25
        np.testing.assert_array_equal(bsde.x0, [1.0])
        assert problem.bsde_problem(1.0, np.array([0.0]), 30).grid.is_degenerate
        with pytest.raises(InvalidParametersError):
            problem.bsde_problem(1.5, np.array([0.0]), 30)

    def test_weight_exponent(self):
        assert heat_problem().weight_exponent() == 0.0


class TestLinearLog:
    def build(self, C=1.0, K=1.0):
        return make_linear_log_pde(
            [[0.5]],
            [[[0.25]]],
            [[C]],
            make_terminal("bump"),
            make_diffusion("brownian"),
            1.0,
            K=K,
            n_samples=200,
        )

    def test_driver(self):
        problem = self.build()
        values = problem.F.evaluate(np.zeros(2), np.zeros((2, 1)), np.array([[np.e], [1.0]]), np.ones((2, 1, 1)))
        np.testing.assert_allclose(values[:, 0], [0.5 * np.e + 0.25 - np.e, 0.5 + 0.25])
        assert problem.F.x_free
        assert not problem.F.z_free

    def test_assumptions(self):
        assumptions = self.build().assumptions
        assert assumptions.M_prime == 1.0
        assert assumptions.K == pytest.approx(1.0 + 4.0 + 1.0)
        assert assumptions.alpha == pytest.approx(1.25)

    def test_coefficient_bounds(self):
        with pytest.raises(InvalidCoefficientsError, match="exceeds K"):
            self.build(C=2.0)
        with pytest.raises(InvalidCoefficientsError, match="nonnegative"):
            self.build(C=-0.5)

    def test_coefficient_shapes(self):
        with pytest.raises(InvalidParametersError, match="shape"):
            make_linear_log_pde(
                [0.5], [[[0.0]]], [[1.0]], make_terminal("bump"), make_diffusion("brownian"), 1.0, K=1.0
            )

    def test_assumptions_validate(self):
        assumptions = linear_log_assumptions(0.5, 2, p_bar=3.0)
        assert assumptions.exponent() == pytest.approx(0.5 * (1.25 + 3.0))
        assumptions.to_envelope()
