# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0
import pytest
from haystack import Pipeline

from logbsde_lab.components import ForwardDiagnostics, PathSimulator
from logbsde_lab.dataclasses.reports import Verdict
from logbsde_lab.errors import InvalidParametersError
from logbsde_lab.forward.diagnostics import reflection_oracle


def brownian_simulator(n_paths=4000, n_steps=400):
    return PathSimulator(
        diffusion={"kind": "brownian", "dim_k": 1},
        time_grid={"t0": 0.0, "T": 1.0, "n_steps": n_steps},
        x0=[0.0],
        n_paths=n_paths,
    )


class TestPathSimulator:
    def test_run(self):
        paths = brownian_simulator(n_paths=8, n_steps=10).run(seed=3)["paths"]
        assert paths.states.shape == (8, 11, 1)
        assert paths.seed == 3

    def test_to_dict(self):
        data = brownian_simulator(n_paths=8, n_steps=10).to_dict()
        assert data == {
            "type": "logbsde_lab.components.forward.PathSimulator",
            "init_parameters": {
                "diffusion": {"kind": "brownian", "dim_k": 1},
                "time_grid": {"t0": 0.0, "T": 1.0, "n_steps": 10},
                "x0": [0.0],
                "n_paths": 8,
                "n_jobs": 1,
            },
        }

    def test_from_dict(self):
        simulator = PathSimulator.from_dict(brownian_simulator(n_paths=8, n_steps=10).to_dict())
        assert simulator.n_paths == 8
        assert simulator.run(seed=1)["paths"].states.shape == (8, 11, 1)

    def test_invalid_diffusion(self):
        with pytest.raises(InvalidParametersError, match="Unknown diffusion kind"):
            PathSimulator(diffusion={"kind": "levy"}, time_grid={"T": 1.0, "n_steps": 4}, x0=[0.0], n_paths=1)


class TestForwardDiagnostics:
    def test_reflection_oracle_passes(self):
        paths = brownian_simulator().run(seed=4)["paths"]
        result = ForwardDiagnostics(kappa=0.1, reflection_tolerance=0.05).run(paths=paths)
        assert result["verdict"] == Verdict.PASS
        assert result["metrics"]["oracle"] == pytest.approx(reflection_oracle(0.1, 1.0))
        assert result["metrics"]["relative_error"] <= 0.05

    def test_without_oracle(self):
        simulator = PathSimulator(
            diffusion={"kind": "zero"}, time_grid={"T": 1.0, "n_steps": 5}, x0=[1.0], n_paths=3
        )
        result = ForwardDiagnostics(kappa=0.3).run(paths=simulator.run(seed=0)["paths"])
        assert result["verdict"] == Verdict.PASS
        assert result["metrics"]["exp_moment"] == 1.0
        assert "oracle" not in result["metrics"]

    def test_divergent_oracle_is_inconclusive(self):
        paths = brownian_simulator(n_paths=50, n_steps=20).run(seed=0)["paths"]
        result = ForwardDiagnostics(kappa=0.5, reflection_tolerance=0.1).run(paths=paths)
        assert result["verdict"] == Verdict.INCONCLUSIVE

    def test_serde(self):
        diagnostics = ForwardDiagnostics(kappa=0.2, reflection_tolerance=0.1)
        data = diagnostics.to_dict()
        assert data["init_parameters"] == {"kappa": 0.2, "kappa_max": 10.0, "reflection_tolerance": 0.1}
        assert ForwardDiagnostics.from_dict(data).reflection_tolerance == 0.1


def test_forward_pipeline_serde():
    pipe = Pipeline()
    pipe.add_component("simulator", brownian_simulator(n_paths=8, n_steps=10))
    pipe.add_component("diagnostics", ForwardDiagnostics(kappa=0.1))
    pipe.connect("simulator.paths", "diagnostics.paths")

    new_pipe = Pipeline.loads(pipe.dumps())
    assert new_pipe == pipe
    result = new_pipe.run({"simulator": {"seed": 2}})
    assert result["diagnostics"]["verdict"] == Verdict.PASS
