# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0
import numpy as np
import pytest

from logbsde_lab.dataclasses.time_grid import make_time_grid
from logbsde_lab.errors import IncompatibleGeneratorsError, InvalidParametersError, NumericFaultError
from logbsde_lab.forward.diffusions import make_diffusion
from logbsde_lab.generators.examples import make_example
from logbsde_lab.solvers.problem import BsdeProblem, TerminalMap, bump_heat_oracle, make_terminal


class TestMakeTerminal:
    def test_constant(self):
        terminal = make_terminal("constant", dim_k=2, dim_d=2, c=[1.0, -1.0])
        np.testing.assert_array_equal(terminal(np.zeros((3, 2))), [[1.0, -1.0]] * 3)

    def test_identity_needs_matching_dimensions(self):
        np.testing.assert_array_equal(make_terminal("identity")(np.array([[0.5]])), [[0.5]])
        with pytest.raises(InvalidParametersError):
            make_terminal("identity", dim_k=2, dim_d=1)

    def test_bump(self):
        terminal = make_terminal("bump")
        np.testing.assert_allclose(terminal(np.array([[0.0], [1.0]]))[:, 0], [2.0, 1.0 + np.exp(-0.5)])
        with pytest.raises(InvalidParametersError):
            make_terminal("bump", width=0.0)

    def test_unknown_kind_and_parameters(self):
        with pytest.raises(InvalidParametersError, match="Unknown terminal kind"):
            make_terminal("step")
        with pytest.raises(InvalidParametersError, match="Unknown parameters"):
            make_terminal("constant", amplitude=1.0)

    def test_serialization(self):
        terminal = make_terminal("sine", amplitude=2.0)
        restored = TerminalMap.from_dict(terminal.to_dict())
        x = np.array([[0.3], [1.2]])
        np.testing.assert_array_equal(restored(x), terminal(x))
        with pytest.raises(ValueError):
            TerminalMap(1, 1, lambda x: x).to_dict()


def test_bump_heat_oracle():
    x = np.array([[0.0], [0.7]])
    np.testing.assert_allclose(bump_heat_oracle(x, 0.0), make_terminal("bump")(x)[:, 0])
    np.testing.assert_allclose(bump_heat_oracle(np.zeros((1, 1)), 1.5), [1.0 + 0.5])


class TestBsdeProblem:
    def test_dimension_checks(self):
        generator, _ = make_example("log_drift", {"r": 2})
        with pytest.raises(IncompatibleGeneratorsError):
            BsdeProblem(
                generator, make_terminal("constant"), make_diffusion("brownian"), make_time_grid(0.0, 1.0, 4), [0.0]
            )
        generator, _ = make_example("log_drift")
        with pytest.raises(InvalidParametersError):
            BsdeProblem(
                generator,
                make_terminal("constant"),
                make_diffusion("brownian"),
                make_time_grid(0.0, 1.0, 4),
                [0.0, 1.0],
            )

    def test_non_finite_terminal_value(self):
        generator, _ = make_example("zero")
        terminal = TerminalMap(1, 1, lambda x: np.where(x > 0, np.nan, x))
        problem = BsdeProblem(generator, terminal, make_diffusion("zero"), make_time_grid(0.0, 1.0, 2), [0.0])
        with pytest.raises(NumericFaultError) as error:
            problem.terminal_values(np.array([[-1.0], [1.0]]))
        assert error.value.path_index == 1

    def test_simulate(self):
        generator, _ = make_example("zero")
        problem = BsdeProblem(
            generator, make_terminal("constant"), make_diffusion("brownian"), make_time_grid(0.0, 1.0, 5), [0.5]
        )
        paths = problem.simulate(7, seed=3)
        assert paths.n_paths == 7
        np.testing.assert_array_equal(paths.states[:, 0], np.full((7, 1), 0.5))
