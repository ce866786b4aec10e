# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0
import numpy as np
import pytest
from haystack import Pipeline

from logbsde_lab.components import FieldComparator, FieldSolver, MollificationCertifier, PdeProblemBuilder
from logbsde_lab.components.pde import field_rows, space_axes
from logbsde_lab.dataclasses.pde_field import Provenance
from logbsde_lab.dataclasses.reports import Verdict
from logbsde_lab.errors import InvalidParametersError
from logbsde_lab.solvers.oracles import log_drift_closed_form
from logbsde_lab.solvers.problem import bump_heat_oracle


def log_drift_pde():
    return PdeProblemBuilder(
        generator={"kind": "neveu", "params": {"K": 1.0}},
        terminal={"kind": "bump"},
        diffusion={"kind": "zero"},
        T=1.0,
    ).run()["problem"]


def heat_pde():
    return PdeProblemBuilder(
        generator={"kind": "zero"},
        terminal={"kind": "bump"},
        diffusion={"kind": "brownian", "params": {"sigma": float(np.sqrt(2.0))}},
        T=1.0,
    ).run()["problem"]


GRID = {"x_min": -2.0, "x_max": 2.0, "n_points": 5, "t_points": [0.0, 0.5]}


def test_space_axes():
    axes = space_axes({"x_min": [-1.0, 0.0], "x_max": 1.0, "n_points": [3, 2]}, 2)
    np.testing.assert_array_equal(axes[0], [-1.0, 0.0, 1.0])
    np.testing.assert_array_equal(axes[1], [0.0, 1.0])
    with pytest.raises(InvalidParametersError, match="space_grid.x_min"):
        space_axes({"x_min": [-1.0, 0.0, 1.0]}, 2)


class TestMollificationCertifier:
    def test_run(self):
        certifier = MollificationCertifier(
            generator={"kind": "linear", "params": {"rate": 0.5}}, schedule=[4, 8], n_samples=200, threshold=1.0
        )
        result = certifier.run(seed=0)
        assert result["verdict"] == Verdict.PASS
        assert [row["n"] for row in result["rows"]] == [4, 8]
        assert result["rows"] == result["report"].rows

    def test_serde(self):
        certifier = MollificationCertifier(generator={"kind": "zero"}, schedule=[2, 4], h=1.0)
        data = certifier.to_dict()
        assert data["type"] == "logbsde_lab.components.mollify.MollificationCertifier"
        assert data["init_parameters"]["reference"] == [0.0, 0.0]
        assert data["init_parameters"]["h"] == 1.0
        assert MollificationCertifier.from_dict(data).schedule == [2, 4]


class TestPdeProblemBuilder:
    def test_log_kinds_get_linear_log_assumptions(self):
        problem = log_drift_pde()
        assert problem.assumptions.M_prime == 1.0
        assert problem.assumptions.K == pytest.approx(6.0)

    def test_linear_log_kind(self):
        problem = PdeProblemBuilder(
            generator={"kind": "linear_log", "params": {"A": [[0.5]], "C": [[1.0]], "K": 1.0}},
            terminal={"kind": "bump"},
            diffusion={"kind": "brownian"},
            T=1.0,
            assumptions={"delta": 0.5},
        ).run()["problem"]
        assert problem.F.kind == "linear_log"
        assert problem.assumptions.delta == 0.5

    def test_unknown_assumption_field(self):
        builder = PdeProblemBuilder(
            generator={"kind": "zero"},
            terminal={"kind": "bump"},
            diffusion={"kind": "zero"},
            T=1.0,
            assumptions={"lambda": 1.0},
        )
        with pytest.raises(InvalidParametersError, match="Unknown PDE assumption fields"):
            builder.run()

    def test_serde(self):
        builder = PdeProblemBuilder(
            generator={"kind": "zero"}, terminal={"kind": "bump"}, diffusion={"kind": "zero"}, T=2.0
        )
        data = builder.to_dict()
        assert data["init_parameters"]["T"] == 2.0
        assert data["init_parameters"]["assumptions"] == {}
        assert PdeProblemBuilder.from_dict(data).run()["problem"].T == 2.0


class TestFieldSolver:
    def test_unknown_method(self):
        with pytest.raises(InvalidParametersError, match="Unknown field method"):
            FieldSolver(method="spectral")

    def test_characteristics(self):
        field = FieldSolver(method="characteristics", space_grid=GRID).run(problem=log_drift_pde())["field"]
        assert field.provenance == Provenance.CHARACTERISTICS
        assert field.u.shape == (2, 5, 1)
        xi = 2.0
        np.testing.assert_allclose(field.u[0, 2], log_drift_closed_form(np.array([xi]), 1.0, 0.0, 1.0), rtol=1e-7)

    def test_monte_carlo(self):
        solver = FieldSolver(
            method="monte_carlo",
            space_grid={"x_min": -1.0, "x_max": 1.0, "n_points": 3},
            solver={"n_paths": 2000},
            steps_per_unit=10,
        )
        field = solver.run(problem=heat_pde(), seed=3)["field"]
        assert field.provenance == Provenance.MONTE_CARLO
        x = np.array([[-1.0], [0.0], [1.0]])
        np.testing.assert_allclose(field.u[0, :, 0], bump_heat_oracle(x, 1.0), atol=0.03)

    def test_streams_differ(self):
        grid = {"x_min": 0.0, "x_max": 0.0, "n_points": 1}
        first = FieldSolver(method="monte_carlo", space_grid=grid, solver={"n_paths": 50}, stream="a")
        second = FieldSolver(method="monte_carlo", space_grid=grid, solver={"n_paths": 50}, stream="b")
        problem = heat_pde()
        first_value = first.run(problem=problem, seed=1)["field"].u[0, 0, 0]
        assert first_value != second.run(problem=problem, seed=1)["field"].u[0, 0, 0]

    def test_serde(self):
        solver = FieldSolver(method="finite_difference", fd_mesh={"nx": 41})
        data = solver.to_dict()
        assert data["type"] == "logbsde_lab.components.pde.FieldSolver"
        assert data["init_parameters"]["fd_mesh"] == {"nx": 41}
        assert FieldSolver.from_dict(data).method == "finite_difference"


class TestFieldComparator:
    def fields(self):
        problem = log_drift_pde()
        candidate = FieldSolver(method="characteristics", space_grid=GRID).run(problem=problem)["field"]
        reference = FieldSolver(
            method="finite_difference", fd_mesh={"nx": 81, "nt": 200, "x_min": -4.0, "x_max": 4.0, "theta": 0.5}
        ).run(problem=problem)["field"]
        return problem, candidate, reference

    def test_agreeing_fields_pass(self):
        problem, candidate, reference = self.fields()
        result = FieldComparator(budget=1e-3, node_budget=1e-3, z_tolerance=0.1).run(
            candidate=candidate, reference=reference, problem=problem
        )
        assert result["verdict"] == Verdict.PASS
        metrics = result["metrics"]
        assert metrics["weighted_error"] <= 1e-3
        assert metrics["delta_prime"] == pytest.approx(problem.weight_exponent())
        assert metrics["n_nodes"] == 10.0
        assert metrics["z_relative_error"] == 0.0
        assert len(result["rows"]) == 10

    def test_budget_decides(self):
        problem, candidate, reference = self.fields()
        result = FieldComparator(budget=0.0, delta_prime=1.0).run(
            candidate=candidate, reference=reference, problem=problem
        )
        assert result["metrics"]["delta_prime"] == 1.0
        assert result["verdict"] in (Verdict.PASS, Verdict.FAIL)
        if result["metrics"]["weighted_error"] > 0:
            assert result["verdict"] == Verdict.FAIL

    def test_field_rows(self):
        _, candidate, reference = self.fields()
        rows = field_rows(candidate, reference)
        assert set(rows[0]) == {"t", "x", "u_candidate", "u_reference", "z_candidate", "provenance", "missing"}
        assert rows[0]["provenance"] == str(Provenance.CHARACTERISTICS)

    def test_serde(self):
        data = FieldComparator(budget=0.05).to_dict()
        assert data["init_parameters"] == {
            "budget": 0.05,
            "node_budget": None,
            "delta_prime": None,
            "p": 2.0,
            "z_tolerance": None,
        }
        assert FieldComparator.from_dict(data).budget == 0.05


def test_pde_pipeline():
    pipe = Pipeline()
    pipe.add_component(
        "builder",
        PdeProblemBuilder(generator={"kind": "neveu"}, terminal={"kind": "bump"}, diffusion={"kind": "zero"}, T=1.0),
    )
    pipe.add_component("solver", FieldSolver(method="characteristics", space_grid=GRID))
    pipe.connect("builder.problem", "solver.problem")

    new_pipe = Pipeline.loads(pipe.dumps())
    assert new_pipe == pipe
    result = new_pipe.run({})
    assert result["solver"]["field"].provenance == Provenance.CHARACTERISTICS
