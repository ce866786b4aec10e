# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0
import numpy as np
import pytest
from haystack import Pipeline
from pydantic import ValidationError

from logbsde_lab.components import BackwardSolver, ProblemBuilder, SolutionChecker
from logbsde_lab.dataclasses.reports import Verdict
from logbsde_lab.errors import InvalidParametersError
from logbsde_lab.solvers.oracles import log_drift_closed_form


def log_drift_builder(n_steps=200, envelope=None):
    generator = {"kind": "log_drift", "params": {"K": 1.0}}
    if envelope:
        generator["envelope"] = envelope
    return ProblemBuilder(
        generator=generator,
        terminal={"kind": "constant", "params": {"c": float(np.e)}},
        diffusion={"kind": "zero"},
        time_grid={"t0": 0.0, "T": 1.0, "n_steps": n_steps},
        x0=[0.0],
    )


class TestProblemBuilder:
    def test_run(self):
        result = log_drift_builder().run()
        problem, envelope = result["problem"], result["envelope"]
        assert problem.generator.kind == "log_drift"
        assert problem.grid.n_steps == 200
        assert problem.terminal.kind == "constant"
        assert envelope.K_prime == 3.0

    def test_envelope_overrides(self):
        envelope = log_drift_builder(envelope={"p": 3.0, "M": 0.5}).run()["envelope"]
        assert envelope.p == 3.0
        np.testing.assert_array_equal(envelope.M(np.zeros(1), np.zeros((1, 1))), [0.5])

    def test_unknown_envelope_field(self):
        with pytest.raises(InvalidParametersError, match="Unknown envelope fields"):
            log_drift_builder(envelope={"rho": 1.0}).run()

    def test_to_dict(self):
        data = log_drift_builder(n_steps=10).to_dict()
        assert data["type"] == "logbsde_lab.components.bsde.ProblemBuilder"
        assert data["init_parameters"]["time_grid"] == {"t0": 0.0, "T": 1.0, "n_steps": 10}
        assert data["init_parameters"]["x0"] == [0.0]

    def test_from_dict(self):
        builder = ProblemBuilder.from_dict(log_drift_builder(n_steps=10).to_dict())
        assert builder.run()["problem"].grid.n_steps == 10


class TestBackwardSolver:
    def test_invalid_solver_settings(self):
        with pytest.raises(ValidationError):
            BackwardSolver({"n_paths": 0})

    def test_run(self):
        problem = log_drift_builder(n_steps=200).run()["problem"]
        result = BackwardSolver({"n_paths": 16, "theta": 0.5}).run(problem=problem, seed=5)
        exact = log_drift_closed_form(np.array([np.e]), 1.0, 0.0, 1.0)[0]
        assert result["solution"].y0[0] == pytest.approx(exact, rel=1e-4)
        assert result["paths"].n_paths == 16

    def test_serde(self):
        solver = BackwardSolver({"n_paths": 16})
        assert solver.to_dict() == {
            "type": "logbsde_lab.components.bsde.BackwardSolver",
            "init_parameters": {"solver": {"n_paths": 16}},
        }
        assert BackwardSolver.from_dict(solver.to_dict()).solver == {"n_paths": 16}


class TestSolutionChecker:
    def solve(self, builder, solver):
        built = builder.run()
        solved = BackwardSolver(solver).run(problem=built["problem"], seed=0)
        return built, solved

    def test_deterministic_problem_against_the_oracle(self):
        built, solved = self.solve(log_drift_builder(), {"n_paths": 16, "theta": 0.5})
        result = SolutionChecker(tolerance=1e-3).run(**built, **solved)
        assert result["verdict"] == Verdict.PASS
        metrics = result["metrics"]
        assert metrics["oracle_y0"] == pytest.approx(np.exp(np.exp(-1.0)), rel=1e-6)
        assert metrics["relative_error"] <= 1e-3
        assert metrics["martingale_residual"] < 1e-9

    def test_tight_tolerance_fails(self):
        built, solved = self.solve(log_drift_builder(n_steps=10), {"n_paths": 4, "theta": 1.0})
        result = SolutionChecker(tolerance=1e-8).run(**built, **solved)
        assert result["verdict"] == Verdict.FAIL

    def test_random_problem_uses_the_integrability_bound(self):
        builder = ProblemBuilder(
            generator={"kind": "linear", "params": {"rate": 0.5}},
            terminal={"kind": "bump"},
            diffusion={"kind": "brownian"},
            time_grid={"T": 1.0, "n_steps": 20},
            x0=[0.0],
        )
        built, solved = self.solve(builder, {"n_paths": 200})
        result = SolutionChecker().run(**built, **solved)
        assert "integrability_lhs" in result["metrics"]
        assert "oracle_y0" not in result["metrics"]
        assert isinstance(result["verdict"], Verdict)

    def test_serde(self):
        data = SolutionChecker(tolerance=0.01, p=3.0).to_dict()
        assert data["init_parameters"] == {"tolerance": 0.01, "p": 3.0}
        assert SolutionChecker.from_dict(data).p == 3.0


def test_bsde_pipeline():
    pipe = Pipeline()
    pipe.add_component("builder", log_drift_builder(n_steps=50))
    pipe.add_component("solver", BackwardSolver({"n_paths": 4, "theta": 0.5}))
    pipe.connect("builder.problem", "solver.problem")

    new_pipe = Pipeline.loads(pipe.dumps())
    assert new_pipe == pipe
    result = new_pipe.run({"solver": {"seed": 1}})
    exact = log_drift_closed_form(np.array([np.e]), 1.0, 0.0, 1.0)[0]
    assert result["solver"]["solution"].y0[0] == pytest.approx(exact, rel=1e-3)
