# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Set, Tuple

from haystack import Pipeline, logging
from tqdm import tqdm

from logbsde_lab.components import (
    AprioriEstimator,
    AprioriInstances,
    AssumptionChecker,
    BackwardSolver,
    DecayRate,
    FieldComparator,
    FieldSolver,
    ForwardDiagnostics,
    MollificationCertifier,
    PathSimulator,
    PdeProblemBuilder,
    ProblemBuilder,
    SolutionChecker,
    StabilitySweeper,
    VerdictCollector,
)
from logbsde_lab.errors import InvalidParametersError
from logbsde_lab.experiments.config import ExperimentConfig
from logbsde_lab.experiments.parameters import Command
from logbsde_lab.util.seeding import derive_seed

logger = logging.getLogger(__name__)

StageData = Dict[str, Dict[str, Any]]


def _socket(path: str) -> Tuple[str, str]:
    component_name, dot, socket_name = path.partition(".")
    if not (dot and component_name and socket_name):
        raise InvalidParametersError(f"Socket path '{path}' must read <component>.<socket>.")
    return component_name, socket_name


def split_cases(batch: Dict[str, Dict[str, List[Any]]]) -> List[StageData]:
    """
    Turn stage inputs holding one list of per-case values per socket into one input dictionary per case.

    :param batch:
        Per-case values keyed by component and socket name.
    :returns:
        The inputs of each case, in order.
    :raises InvalidParametersError:
        If the sockets disagree on the number of cases.
    """
    counts = {
        f"{component_name}.{socket_name}": len(values)
        for component_name, sockets in batch.items()
        for socket_name, values in sockets.items()
    }
    if len(set(counts.values())) > 1:
        raise InvalidParametersError(f"Every socket needs one value per case, got {counts}.")
    n_cases = next(iter(counts.values()), 0)
    return [
        {
            component_name: {socket_name: values[case] for socket_name, values in sockets.items()}
            for component_name, sockets in batch.items()
        }
        for case in range(n_cases)
    ]


def stack_case_outputs(per_case: List[StageData]) -> StageData:
    """
    Stack the solving outputs of every case, so each output holds the list of its per-case values.

    A single case still yields one-element lists.

    :param per_case:
        The outputs of each case, in order.
    :returns:
        The stacked outputs.
    :raises InvalidParametersError:
        If a case produced other components or sockets than the first one.
    """
    if not per_case:
        return {}

    def layout(outputs: StageData) -> Dict[str, List[str]]:
        return {name: sorted(sockets) for name, sockets in outputs.items()}

    expected = layout(per_case[0])
    for case, outputs in enumerate(per_case[1:], start=1):
        if layout(outputs) != expected:
            raise InvalidParametersError(
                f"Case {case} produced the outputs {layout(outputs)}, case 0 produced {expected}."
            )
    return {
        name: {socket_name: [outputs[name][socket_name] for outputs in per_case] for socket_name in sockets}
        for name, sockets in per_case[0].items()
    }


@dataclass(frozen=True)
class StagePair:
    """
    The solving and the checking pipeline of an experiment, run one after the other.

    :param solve:
        The pipeline that builds and solves the problem.
    :param check:
        The pipeline that checks what the solving pipeline produced.
    :param links:
        Solving outputs fed to checking inputs, as `"component.output": ["component.input", ...]`.
    :param keep_solve_outputs:
        Solving components whose outputs are returned even when they are not linked.
    :param keep_check_outputs:
        Checking components whose outputs are returned even when they are connected inside the checking pipeline.
    """

    solve: Pipeline
    check: Pipeline
    links: Dict[str, List[str]]
    keep_solve_outputs: Optional[Set[str]] = None
    keep_check_outputs: Optional[Set[str]] = None

    def __post_init__(self):
        solve_outputs = self.solve.outputs(include_components_with_connected_outputs=True)
        check_inputs = self.check.inputs(include_components_with_connected_inputs=True)
        fed: Set[str] = set()

        for source, targets in self.links.items():
            component_name, output_name = _socket(source)
            if output_name not in solve_outputs.get(component_name, {}):
                raise InvalidParametersError(f"The solving pipeline has no output '{source}'.")
            for target in targets:
                component_name, input_name = _socket(target)
                if input_name not in check_inputs.get(component_name, {}):
                    raise InvalidParametersError(f"The checking pipeline has no input '{target}'.")
                if target in fed:
                    raise InvalidParametersError(f"Checking input '{target}' is linked to more than one output.")
                fed.add(target)

    def _solve_components(self) -> Set[str]:
        linked = {_socket(source)[0] for source in self.links}
        return linked | set(self.keep_solve_outputs or ())

    def _run_check(self, solve_outputs: StageData, check_inputs: Optional[StageData]) -> StageData:
        inputs = {name: dict(sockets) for name, sockets in (check_inputs or {}).items()}
        for source, targets in self.links.items():
            component_name, output_name = _socket(source)
            for target in targets:
                target_component, input_name = _socket(target)
                if input_name in inputs.get(target_component, {}):
                    raise InvalidParametersError(
                        f"Checking input '{target}' is linked to '{source}' and cannot be given explicitly."
                    )
                inputs.setdefault(target_component, {})[input_name] = solve_outputs[component_name][output_name]
        return self.check.run(inputs, include_outputs_from=self.keep_check_outputs)

    def run(self, solve_inputs: StageData, check_inputs: Optional[StageData] = None) -> Dict[str, StageData]:
        """
        Solve once, then check.

        :param solve_inputs:
            Inputs of the solving pipeline.
        :param check_inputs:
            Inputs of the checking pipeline that are not linked to solving outputs.
        :returns:
            A dictionary with the following keys:
            - `solve` - The linked and kept outputs of the solving pipeline.
            - `check` - The outputs of the checking pipeline.
        :raises InvalidParametersError:
            If a linked checking input is also given explicitly.
        """
        solve_outputs = self.solve.run(solve_inputs, include_outputs_from=self._solve_components())
        return {"solve": solve_outputs, "check": self._run_check(solve_outputs, check_inputs)}

    def run_per_case(
        self, cases: List[StageData], check_inputs: Optional[StageData] = None, *, progress_bar: bool = False
    ) -> Dict[str, StageData]:
        """
        Solve every case, then check all of them in one run.

        The checking pipeline receives each linked output as the list of its per-case values.

        :param cases:
            Inputs of the solving pipeline, one dictionary per case.
        :param check_inputs:
            Inputs of the checking pipeline that are not linked to solving outputs.
        :param progress_bar:
            Whether to show a progress bar over the cases.
        :returns:
            A dictionary with the following keys:
            - `solve` - The stacked outputs of the solving pipeline, see `stack_case_outputs`.
            - `check` - The outputs of the checking pipeline.
        """
        components = self._solve_components()
        per_case = [
            self.solve.run(inputs, include_outputs_from=components)
            for inputs in tqdm(cases, desc="Cases", disable=not progress_bar)
        ]
        solve_outputs = stack_case_outputs(per_case)
        return {"solve": solve_outputs, "check": self._run_check(solve_outputs, check_inputs)}


@dataclass(frozen=True)
class StagePlan:
    """
    A stage pair together with the inputs it runs on.

    :param pair:
        The stage pair.
    :param solve_inputs:
        Inputs of the solving pipeline; a list of them solves once per case.
    :param check_inputs:
        Unlinked inputs of the checking pipeline.
    """

    pair: StagePair
    solve_inputs: Any
    check_inputs: StageData

    @property
    def per_case(self) -> bool:
        return isinstance(self.solve_inputs, list)


def _pipeline(**components: Any) -> Pipeline:
    pipeline = Pipeline()
    for name, instance in components.items():
        pipeline.add_component(name, instance)
    return pipeline


def _solver_params(config: ExperimentConfig) -> Dict[str, Any]:
    return config.solver.model_dump(mode="json", exclude={"seed"})


def _problem_sections(config: ExperimentConfig) -> Dict[str, Any]:
    return {
        "generator": config.generator.model_dump(mode="json"),
        "terminal": config.terminal.model_dump(mode="json"),
        "diffusion": config.diffusion.model_dump(mode="json"),
        "time_grid": config.time_grid.model_dump(mode="json"),
        "x0": list(config.x0),
    }


def _simulate_forward(config: ExperimentConfig) -> StagePlan:
    section = config.forward
    solve = _pipeline(
        simulator=PathSimulator(
            diffusion=config.diffusion.model_dump(mode="json"),
            time_grid=config.time_grid.model_dump(mode="json"),
            x0=list(config.x0),
            n_paths=section.n_paths,
            n_jobs=section.n_jobs,
        )
    )
    check = _pipeline(
        diagnostics=ForwardDiagnostics(
            kappa=section.kappa, kappa_max=section.kappa_max, reflection_tolerance=section.reflection_tolerance
        )
    )
    pair = StagePair(
        solve=solve,
        check=check,
        links={"simulator.paths": ["diagnostics.paths"]},
        keep_check_outputs={"diagnostics"},
    )
    return StagePlan(pair, {"simulator": {"seed": derive_seed(config.seed, "forward", "paths")}}, {})


def _check_assumptions(config: ExperimentConfig) -> StagePlan:
    section = config.assumptions
    solve = _pipeline(
        checker=AssumptionChecker(
            checks=list(section.checks),
            sampler=dict(section.sampler),
            n_samples=section.n_samples,
            N_list=list(section.N_list),
            dim_k=config.diffusion.dim_k,
            t_range=[config.time_grid.t0, config.time_grid.T],
        )
    )
    check = _pipeline(collector=VerdictCollector())
    labels = [case.label or case.generator.kind for case in section.cases]
    cases = split_cases(
        {
            "checker": {
                "generator": [case.generator.model_dump(mode="json") for case in section.cases],
                "seed": [derive_seed(config.seed, "assumptions", label) for label in labels],
            }
        }
    )
    pair = StagePair(
        solve=solve,
        check=check,
        links={"checker.verdict": ["collector.verdicts"]},
        keep_solve_outputs={"checker"},
        keep_check_outputs={"collector"},
    )
    expected = [case.expect for case in section.cases]
    return StagePlan(pair, cases, {"collector": {"labels": labels, "expected": expected}})


def _mollify_demo(config: ExperimentConfig) -> StagePlan:
    section = config.mollify
    solve = _pipeline(
        certifier=MollificationCertifier(
            generator=config.generator.model_dump(mode="json"),
            schedule=list(section.schedule),
            n_samples=section.n_samples,
            N=section.N,
            threshold=section.threshold,
            grid_density=section.grid_density,
            quad_nodes=section.quad_nodes,
            h=section.h,
            sampler=dict(section.sampler),
            reference=[config.time_grid.t0, *config.x0],
        )
    )
    check = _pipeline(decay=DecayRate(column="rho", strict=True))
    pair = StagePair(
        solve=solve,
        check=check,
        links={"certifier.rows": ["decay.rows"]},
        keep_solve_outputs={"certifier"},
        keep_check_outputs={"decay"},
    )
    return StagePlan(pair, {"certifier": {"seed": derive_seed(config.seed, "mollify", "samples")}}, {})


def _solve_bsde(config: ExperimentConfig) -> StagePlan:
    solve = _pipeline(
        builder=ProblemBuilder(**_problem_sections(config)), solver=BackwardSolver(_solver_params(config))
    )
    solve.connect("builder.problem", "solver.problem")
    check = _pipeline(checker=SolutionChecker(tolerance=config.bsde.tolerance, p=config.bsde.p))
    pair = StagePair(
        solve=solve,
        check=check,
        links={
            "builder.problem": ["checker.problem"],
            "builder.envelope": ["checker.envelope"],
            "solver.solution": ["checker.solution"],
            "solver.paths": ["checker.paths"],
        },
        keep_check_outputs={"checker"},
    )
    return StagePlan(pair, {"solver": {"seed": config.seed}}, {})


def _apriori_check(config: ExperimentConfig) -> StagePlan:
    section = config.apriori
    sections = _problem_sections(config)
    solve = _pipeline(
        instances=AprioriInstances(
            generator=sections["generator"],
            terminal=sections["terminal"],
            diffusion=sections["diffusion"],
            time_grid=sections["time_grid"],
            x0=sections["x0"],
            cases=[case.model_dump(mode="json") for case in section.cases],
        )
    )
    check = _pipeline(
        apriori=AprioriEstimator(
            solver=_solver_params(config), p=section.p, gamma=section.gamma, safety_factor=section.safety_factor
        )
    )
    pair = StagePair(
        solve=solve,
        check=check,
        links={"instances.calibration": ["apriori.calibration"], "instances.sweep": ["apriori.sweep"]},
        keep_check_outputs={"apriori"},
    )
    return StagePlan(pair, {}, {"apriori": {"seed": config.seed}})


def _stability_sweep(config: ExperimentConfig) -> StagePlan:
    section = config.stability
    solve = _pipeline(builder=ProblemBuilder(**_problem_sections(config)))
    check = _pipeline(
        stability=StabilitySweeper(
            schedule=list(section.schedule),
            solver=_solver_params(config),
            p_prime=section.p_prime,
            N=section.N,
            burn_in=section.burn_in,
            threshold=section.threshold,
            grid_density=section.grid_density,
            reference=section.reference,
        ),
        decay=DecayRate(column="y_error"),
    )
    check.connect("stability.rows", "decay.rows")
    pair = StagePair(
        solve=solve,
        check=check,
        links={"builder.problem": ["stability.problem"], "builder.envelope": ["stability.envelope"]},
        keep_check_outputs={"stability", "decay"},
    )
    return StagePlan(pair, {}, {"stability": {"seed": config.seed}})


def _field_solver(config: ExperimentConfig, method: str, stream: str) -> FieldSolver:
    section = config.pde
    return FieldSolver(
        method=method,
        space_grid=config.space_grid.model_dump(mode="json"),
        solver=_solver_params(config),
        steps_per_unit=section.steps_per_unit,
        mc_mode=section.mc_mode,
        fd_mesh=section.fd_mesh.model_dump(mode="json"),
        ode_tol=section.ode_tol,
        stream=stream,
    )


def _pde_compare(config: ExperimentConfig) -> StagePlan:
    section = config.pde
    sections = _problem_sections(config)
    solve = _pipeline(
        builder=PdeProblemBuilder(
            generator=sections["generator"],
            terminal=sections["terminal"],
            diffusion=sections["diffusion"],
            T=config.time_grid.T,
            assumptions=dict(section.assumptions),
        ),
        candidate=_field_solver(config, section.candidate, "candidate"),
        reference=_field_solver(config, section.reference, "reference"),
    )
    solve.connect("builder.problem", "candidate.problem")
    solve.connect("builder.problem", "reference.problem")
    check = _pipeline(
        comparator=FieldComparator(
            budget=section.budget,
            node_budget=section.node_budget,
            delta_prime=section.delta_prime,
            p=section.p,
            z_tolerance=section.z_tolerance,
        )
    )
    pair = StagePair(
        solve=solve,
        check=check,
        links={
            "builder.problem": ["comparator.problem"],
            "candidate.field": ["comparator.candidate"],
            "reference.field": ["comparator.reference"],
        },
        keep_check_outputs={"comparator"},
    )
    return StagePlan(pair, {"candidate": {"seed": config.seed}, "reference": {"seed": config.seed}}, {})


_BUILDERS: Dict[Command, Callable[[ExperimentConfig], StagePlan]] = {
    Command.SIMULATE_FORWARD: _simulate_forward,
    Command.CHECK_ASSUMPTIONS: _check_assumptions,
    Command.MOLLIFY_DEMO: _mollify_demo,
    Command.SOLVE_BSDE: _solve_bsde,
    Command.APRIORI_CHECK: _apriori_check,
    Command.STABILITY_SWEEP: _stability_sweep,
    Command.PDE_COMPARE: _pde_compare,
}


def build_stage_plan(config: ExperimentConfig) -> StagePlan:
    """
    The solving and checking stages of a configuration's command, with their inputs.

    :param config:
        The configuration.
    :returns:
        The plan.
    """
    logger.debug("Building the stages of {command}", command=str(config.command))
    return _BUILDERS[config.command](config)
