# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from typing import Any, Dict, List, Optional

import numpy as np
from haystack import component, default_from_dict, default_to_dict, logging

from logbsde_lab.components.specs import build_pde_problem
from logbsde_lab.dataclasses.pde_field import PdeField
from logbsde_lab.dataclasses.reports import Verdict
from logbsde_lab.errors import InvalidParametersError
from logbsde_lab.pde.characteristics import characteristics_oracle
from logbsde_lab.pde.consistency import field_discrepancy, field_interpolator, z_consistency
from logbsde_lab.pde.finite_difference import FdMesh, fd_reference_1d
from logbsde_lab.pde.monte_carlo import mc_field
from logbsde_lab.pde.norms import weighted_lp_norm
from logbsde_lab.pde.problem import PdeProblem
from logbsde_lab.solvers.config import SolverConfig
from logbsde_lab.util.seeding import derive_seed

logger = logging.getLogger(__name__)

FIELD_METHODS = ("monte_carlo", "finite_difference", "characteristics")


def space_axes(space_grid: Dict[str, Any], dim_k: int) -> List[np.ndarray]:
    """
    Per-axis coordinates from `{"x_min", "x_max", "n_points"}`, each a scalar shared by all axes or a list.

    :param space_grid:
        The space grid section.
    :param dim_k:
        Number of axes.
    :returns:
        One uniformly spaced coordinate array per axis.
    """

    def per_axis(name: str, default: Any) -> List[Any]:
        value = space_grid.get(name, default)
        values = list(value) if isinstance(value, (list, tuple)) else [value] * dim_k
        if len(values) != dim_k:
            raise InvalidParametersError(f"space_grid.{name} has {len(values)} entries, expected {dim_k}.")
        return values

    return [
        np.linspace(float(low), float(high), int(count))
        for low, high, count in zip(per_axis("x_min", -4.0), per_axis("x_max", 4.0), per_axis("n_points", 21))
    ]


@component
class PdeProblemBuilder:
    """
    Assembles a semilinear terminal value problem from configuration sections.
    """

    def __init__(  # pylint: disable=too-many-positional-arguments
        self,
        generator: Dict[str, Any],
        terminal: Dict[str, Any],
        diffusion: Dict[str, Any],
        T: float,
        assumptions: Optional[Dict[str, float]] = None,
    ):
        """
        Create a PdeProblemBuilder component.

        :param generator:
            Generator section of the nonlinearity `F`; the kind `linear_log` takes the matrices `A`, `B`, `C` and `K`.
        :param terminal:
            Terminal section of `g`.
        :param diffusion:
            Diffusion section.
        :param T:
            The horizon.
        :param assumptions:
            Scalar assumption data such as `delta` and `p_bar`.
        """
        self.generator = generator
        self.terminal = terminal
        self.diffusion = diffusion
        self.T = T
        self.assumptions = dict(assumptions or {})

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes the component to a dictionary.

        :returns:
            Dictionary with serialized data.
        """
        return default_to_dict(
            self,
            generator=self.generator,
            terminal=self.terminal,
            diffusion=self.diffusion,
            T=self.T,
            assumptions=self.assumptions,
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PdeProblemBuilder":
        """
        Deserializes the component from a dictionary.

        :param data:
            The dictionary to deserialize from.
        :returns:
            The deserialized component.
        """
        return default_from_dict(cls, data)

    @component.output_types(problem=PdeProblem)
    def run(self):
        """
        Build the problem.

        :returns:
            A dictionary with the following keys:
            - `problem`: The terminal value problem.
        """
        problem = build_pde_problem(self.generator, self.terminal, self.diffusion, self.T, self.assumptions)
        logger.debug("Weight exponent of the problem: {delta_prime}", delta_prime=problem.weight_exponent())
        return {"problem": problem}


@component
class FieldSolver:  # pylint: disable=too-many-instance-attributes
    """
    Computes the solution field of a terminal value problem by Monte Carlo, finite differences or characteristics.

    Usage example:
    ```python
    from logbsde_lab.components import FieldSolver

    solver = FieldSolver(
        method="monte_carlo",
        space_grid={"x_min": -2.0, "x_max": 2.0, "n_points": 5, "t_points": [0.0]},
        solver={"n_paths": 1000},
    )
    field = solver.run(problem=problem, seed=3)["field"]
    ```
    """

    def __init__(  # pylint: disable=too-many-positional-arguments
        self,
        method: str,
        space_grid: Optional[Dict[str, Any]] = None,
        solver: Optional[Dict[str, Any]] = None,
        steps_per_unit: float = 100.0,
        mc_mode: str = "per_node",
        fd_mesh: Optional[Dict[str, Any]] = None,
        ode_tol: float = 1e-10,
        stream: str = "field",
    ):
        """
        Create a FieldSolver component.

        :param method:
            One of `monte_carlo`, `finite_difference` and `characteristics`.
        :param space_grid:
            `x_min`, `x_max`, `n_points` and the times `t_points` of the Monte Carlo and characteristics grids; the
            finite difference field lives on its own mesh.
        :param solver:
            Fields of `SolverConfig` for the Monte Carlo method.
        :param steps_per_unit:
            Time steps per unit of time of every Monte Carlo backward equation.
        :param mc_mode:
            `per_node` or `shared`.
        :param fd_mesh:
            Fields of `FdMesh`.
        :param ode_tol:
            Relative tolerance of the characteristics integrators.
        :param stream:
            Label separating the random stream of this solver from others run with the same seed.
        :raises InvalidParametersError:
            If the method is unknown.
        """
        if method not in FIELD_METHODS:
            raise InvalidParametersError(f"Unknown field method '{method}'. Supported methods are: {FIELD_METHODS}")
        self.method = method
        self.space_grid = dict(space_grid or {})
        self.solver = dict(solver or {})
        self.steps_per_unit = steps_per_unit
        self.mc_mode = mc_mode
        self.fd_mesh = dict(fd_mesh or {})
        self.ode_tol = ode_tol
        self.stream = stream
        SolverConfig(**self.solver)
        FdMesh(**self.fd_mesh)

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes the component to a dictionary.

        :returns:
            Dictionary with serialized data.
        """
        return default_to_dict(
            self,
            method=self.method,
            space_grid=self.space_grid,
            solver=self.solver,
            steps_per_unit=self.steps_per_unit,
            mc_mode=self.mc_mode,
            fd_mesh=self.fd_mesh,
            ode_tol=self.ode_tol,
            stream=self.stream,
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FieldSolver":
        """
        Deserializes the component from a dictionary.

        :param data:
            The dictionary to deserialize from.
        :returns:
            The deserialized component.
        """
        return default_from_dict(cls, data)

    @component.output_types(field=PdeField)
    def run(self, problem: PdeProblem, seed: Optional[int] = None):
        """
        Compute the field.

        :param problem:
            The problem.
        :param seed:
            Master seed of the Monte Carlo method; defaults to the configured solver seed.
        :returns:
            A dictionary with the following keys:
            - `field`: The field.
        """
        if self.method == "finite_difference":
            return {"field": fd_reference_1d(problem, FdMesh(**self.fd_mesh))}

        x_axes = space_axes(self.space_grid, problem.dim_k)
        t_grid = np.asarray(self.space_grid.get("t_points", [0.0]), dtype=float)
        if self.method == "characteristics":
            return {"field": characteristics_oracle(problem, x_axes, t_grid, ode_tol=self.ode_tol)}

        master = SolverConfig(**self.solver).seed if seed is None else seed
        config = SolverConfig(**{**self.solver, "seed": derive_seed(master, "pde", self.stream)})
        field_values = mc_field(
            problem,
            x_axes,
            t_grid,
            config,
            steps_per_unit=self.steps_per_unit,
            mode=self.mc_mode,  # type: ignore[arg-type]
        )
        return {"field": field_values}


def _columns(prefix: str, d: int) -> List[str]:
    return [prefix] if d == 1 else [f"{prefix}_{j}" for j in range(d)]


def field_rows(candidate: PdeField, reference: PdeField) -> List[Dict[str, Any]]:
    """
    One row per time and node of the candidate: coordinates, both values, the candidate's `σ*∇u` and its provenance.

    The reference is interpolated linearly to the candidate's nodes, `NaN` outside its grid.
    """
    interpolate = field_interpolator(reference, reference.u)
    nodes = candidate.nodes
    d = candidate.dim_d
    x_names = _columns("x", nodes.shape[1])
    missing = candidate.missing if candidate.missing is not None else np.zeros(candidate.u.shape[:2], dtype=bool)
    rows = []
    for i, t in enumerate(candidate.t_grid):
        u_reference = interpolate(float(t), nodes).reshape(len(nodes), d)
        for node_index, node in enumerate(nodes):
            row: Dict[str, Any] = {"t": float(t)}
            row.update(zip(x_names, map(float, node)))
            row.update(zip(_columns("u_candidate", d), map(float, candidate.u[i, node_index])))
            row.update(zip(_columns("u_reference", d), map(float, u_reference[node_index])))
            if candidate.sigma_grad_u is not None:
                z = candidate.sigma_grad_u[i, node_index].ravel()
                row.update(zip(_columns("z_candidate", len(z)), map(float, z)))
            row["provenance"] = str(candidate.provenance)
            row["missing"] = bool(missing[i, node_index])
            rows.append(row)
    return rows


@component
class FieldComparator:
    """
    Measures the weighted `L^p` distance between a candidate field and a reference field against a budget.

    The weight exponent defaults to the problem's `δ′`. With `node_budget` the largest nodewise gap is bounded too,
    and with `z_tolerance` the candidate's `σ*∇u` is compared with the differentiated reference.
    """

    def __init__(  # pylint: disable=too-many-positional-arguments
        self,
        budget: float,
        node_budget: Optional[float] = None,
        delta_prime: Optional[float] = None,
        p: float = 2.0,
        z_tolerance: Optional[float] = None,
    ):
        """
        Create a FieldComparator component.

        :param budget:
            Bound on the relative weighted error.
        :param node_budget:
            Bound on the largest absolute gap at a node; `None` skips it.
        :param delta_prime:
            Weight exponent; `None` uses the problem's `δ′`.
        :param p:
            The exponent of the norms.
        :param z_tolerance:
            Bound on the relative error of `σ*∇u`; `None` skips the comparison.
        """
        self.budget = budget
        self.node_budget = node_budget
        self.delta_prime = delta_prime
        self.p = p
        self.z_tolerance = z_tolerance

    def to_dict(self) -> Dict[str, Any]:
        """
        Serializes the component to a dictionary.

        :returns:
            Dictionary with serialized data.
        """
        return default_to_dict(
            self,
            budget=self.budget,
            node_budget=self.node_budget,
            delta_prime=self.delta_prime,
            p=self.p,
            z_tolerance=self.z_tolerance,
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FieldComparator":
        """
        Deserializes the component from a dictionary.

        :param data:
            The dictionary to deserialize from.
        :returns:
            The deserialized component.
        """
        return default_from_dict(cls, data)

    @component.output_types(metrics=Dict[str, float], rows=List[Dict[str, Any]], verdict=Verdict)
    def run(self, candidate: PdeField, reference: PdeField, problem: PdeProblem):
        """
        Compare the fields.

        :param candidate:
            The field under test.
        :param reference:
            The reference field.
        :param problem:
            The problem both fields solve.
        :returns:
            A dictionary with the following keys:
            - `metrics`: `weighted_error`, `absolute_error`, `max_abs_error`, `budget`, `delta_prime`, the compared
              node count, the candidate's missing nodes and norms, and the `σ*∇u` error when requested.
            - `rows`: The u-field table.
            - `verdict`: `PASS` within the budgets, `INCONCLUSIVE` without comparable nodes or on non-finite errors.
        """
        delta_prime = problem.weight_exponent() if self.delta_prime is None else self.delta_prime
        discrepancy = field_discrepancy(candidate, reference, delta_prime=delta_prime, p=self.p)
        rows = field_rows(candidate, reference)
        d = candidate.dim_d
        gaps = [
            abs(row[u] - row[v])
            for row in rows
            if not row["missing"]
            for u, v in zip(_columns("u_candidate", d), _columns("u_reference", d))
            if np.isfinite(row[u]) and np.isfinite(row[v])
        ]
        norms = weighted_lp_norm(candidate, delta_prime, self.p)
        metrics = {
            "weighted_error": discrepancy.relative,
            "absolute_error": discrepancy.absolute,
            "max_abs_error": max(gaps, default=float("nan")),
            "budget": self.budget,
            "delta_prime": delta_prime,
            "n_nodes": float(discrepancy.n_nodes),
            "missing_nodes": float(candidate.missing_count),
            "sup_spatial_norm": norms.sup_spatial_norm,
            "tail_estimate": norms.tail_estimate,
        }
        for warning in norms.warnings:
            logger.warning("{warning}", warning=warning)

        verdicts = []
        if discrepancy.n_nodes == 0 or not np.isfinite(discrepancy.relative):
            verdicts.append(Verdict.INCONCLUSIVE)
        else:
            verdicts.append(Verdict.PASS if discrepancy.relative <= self.budget else Verdict.FAIL)
        if self.node_budget is not None:
            metrics["node_budget"] = self.node_budget
            if gaps:
                verdicts.append(Verdict.PASS if metrics["max_abs_error"] <= self.node_budget else Verdict.FAIL)
        if self.z_tolerance is not None:
            report = z_consistency(
                candidate, reference, problem.diffusion, delta_prime=delta_prime, tolerance=self.z_tolerance
            )
            metrics["z_relative_error"] = report.relative_error
            verdicts.append(report.verdict)
        verdict = Verdict.combine(verdicts)
        logger.info(
            "Weighted error {error} against the budget {budget} on {nodes} nodes: {verdict}",
            error=discrepancy.relative,
            budget=self.budget,
            nodes=discrepancy.n_nodes,
            verdict=str(verdict),
        )
        return {"metrics": metrics, "rows": rows, "verdict": verdict}
