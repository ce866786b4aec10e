# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0
import numpy as np
import pytest

from logbsde_lab.dataclasses.generator import Generator
from logbsde_lab.errors import IncompatibleGeneratorsError, InvalidParametersError
from logbsde_lab.generators.bounds import log_growth_constant, young_constant
from logbsde_lab.generators.distance import rho_N
from logbsde_lab.generators.examples import make_example


class TestYoungConstant:
    def test_quadratic_case(self):
        assert young_constant(2.0, 2.0) == pytest.approx(1.0)

    def test_inequality_holds(self):
        rho = np.linspace(0.0, 50.0, 10_001)
        c = young_constant(3.0, 1.5, 0.5)
        assert np.all(3.0 * rho <= c + 0.5 * rho**1.5 + 1e-9)

    def test_rejects_alpha_one(self):
        with pytest.raises(InvalidParametersError):
            young_constant(1.0, 1.0)


class TestLogGrowthConstant:
    def test_zero_coefficient(self):
        assert log_growth_constant(0.0, 1.5) == 0.0

    def test_dominates_log_growth(self):
        c = log_growth_constant(1.0, 1.5, 0.5)
        y = np.exp(np.linspace(-20.0, 20.0, 20_001))
        assert np.all(y * np.abs(np.log(y)) <= c + 0.5 * y**1.5)


class TestRhoN:
    def test_same_generator(self):
        generator, _ = make_example("log_drift")
        assert rho_N(generator, generator, 1.0, 0.0, 0.0) == 0.0

    def test_constant_offset(self):
        zero, _ = make_example("zero")
        constant, _ = make_example("constant", {"c": 0.75})
        assert rho_N(zero, constant, 2.0, 0.0, 0.0, grid_density=11) == pytest.approx(0.75)

    def test_finds_the_sup_on_the_grid(self):
        linear, _ = make_example("linear", {"rate": 1.0})
        zero, _ = make_example("zero")
        assert rho_N(linear, zero, 3.0, 0.0, 0.0, grid_density=31) == pytest.approx(3.0)

    def test_monotone_in_radius(self):
        log_drift, _ = make_example("log_drift")
        zero, _ = make_example("zero")
        assert rho_N(log_drift, zero, 1.0, 0.0, 0.0) <= rho_N(log_drift, zero, 2.0, 0.0, 0.0)

    def test_incompatible_dimensions(self):
        small = Generator(1, 1, lambda t, x, y, z: y, "a")
        large = Generator(2, 1, lambda t, x, y, z: y, "b")
        with pytest.raises(IncompatibleGeneratorsError):
            rho_N(small, large, 1.0, 0.0, 0.0)

    def test_invalid_radius(self):
        generator, _ = make_example("zero")
        with pytest.raises(InvalidParametersError):
            rho_N(generator, generator, 0.0, 0.0, 0.0)

    def test_symmetric(self):
        log_drift, _ = make_example("log_drift")
        monotone, _ = make_example("stochastic_monotone")
        forward = rho_N(log_drift, monotone, 2.0, 0.3, 0.5, grid_density=21)
        assert forward > 0.0
        assert forward == rho_N(monotone, log_drift, 2.0, 0.3, 0.5, grid_density=21)
