# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

import time
from numbers import Real
from pathlib import Path
from typing import Any, Dict, List, Optional, Type

from haystack import Pipeline, logging
from haystack.core.errors import PipelineRuntimeError
from haystack.core.serialization import DeserializationCallbacks

from logbsde_lab.dataclasses.path_batch import PathBatch
from logbsde_lab.dataclasses.reports import Verdict
from logbsde_lab.errors import InvalidParametersError, LabError, ScenarioError
from logbsde_lab.experiments.config import ExperimentConfig, config_hash
from logbsde_lab.experiments.parameters import ResultRecord, StageOverrides
from logbsde_lab.experiments.stages import StagePair, StagePlan, build_stage_plan
from logbsde_lab.util.io import dump_config, write_csv, write_json

logger = logging.getLogger(__name__)


class ScenarioHarness:
    """
    Runs the solving and checking stages of one experiment configuration and records the outcome.

    Every component output named `metrics` contributes its scalars to the record as `component.metric`, every
    output named `verdict` contributes a verdict. When the solving stage runs once per case, only the checking
    stage's verdicts count, since the per-case verdicts are what it checks. With an output directory the record,
    the resolved configuration, both serialized stages, every `rows` output as CSV and every `report` output as
    JSON are written there.

    Usage example:
    ```python
    from logbsde_lab.experiments import ScenarioHarness, get_scenario

    record = ScenarioHarness(get_scenario("example1-oracle")).run(output_dir="out/example1-oracle")
    record.verdict  # Verdict.PASS
    ```
    """

    def __init__(self, config: ExperimentConfig, *, progress_bar: bool = False):
        """
        Create a harness.

        :param config:
            The configuration to run.
        :param progress_bar:
            Whether to show a progress bar over the cases of a per-case run.
        """
        self.config = config
        self.progress_bar = progress_bar

    @staticmethod
    def _override_pipeline(pipeline: Pipeline, parameter_overrides: Optional[Dict[str, Any]]) -> Pipeline:
        # pylint: disable=unused-argument
        def component_pre_init_callback(name: str, cls: Type, init_params: Dict[str, Any]):
            assert parameter_overrides is not None
            overrides = parameter_overrides.get(name)
            if overrides:
                init_params.update(overrides)

        def validate_overrides():
            if parameter_overrides is None:
                return

            pipeline_components = {name for name, _ in pipeline.walk()}
            for component_name in parameter_overrides.keys():
                if component_name not in pipeline_components:
                    raise InvalidParametersError(f"Cannot override non-existent component '{component_name}'")

        callbacks = DeserializationCallbacks(component_pre_init_callback)
        if parameter_overrides:
            validate_overrides()
            serialized_pipeline = pipeline.dumps()
            pipeline = Pipeline.loads(serialized_pipeline, callbacks=callbacks)

        return pipeline

    def _overridden_pair(self, pair: StagePair, overrides: Optional[StageOverrides]) -> StagePair:
        solve = {**self.config.overrides.solve, **((overrides.solve if overrides else None) or {})}
        check = {**self.config.overrides.check, **((overrides.check if overrides else None) or {})}
        if not solve and not check:
            return pair
        return StagePair(
            solve=self._override_pipeline(pair.solve, solve),
            check=self._override_pipeline(pair.check, check),
            links=pair.links,
            keep_solve_outputs=pair.keep_solve_outputs,
            keep_check_outputs=pair.keep_check_outputs,
        )

    def run(
        self, *, output_dir: Optional[Path] = None, overrides: Optional[StageOverrides] = None
    ) -> ResultRecord:
        """
        Run the experiment.

        :param output_dir:
            Directory the artifacts are written to; `None` writes nothing.
        :param overrides:
            Component init parameter overrides applied on top of those of the configuration.
        :returns:
            The record of the run.
        :raises ScenarioError:
            If a stage cannot be built or fails, with the failing error as its cause.
        """
        scenario = self.config.scenario
        digest = config_hash(self.config)
        logger.info(
            "Running scenario {scenario} ({command}) with config {digest}",
            scenario=scenario,
            command=str(self.config.command),
            digest=digest[:12],
        )
        start = time.perf_counter()
        try:
            plan = build_stage_plan(self.config)
            pair = self._overridden_pair(plan.pair, overrides)
            outputs = self._execute(pair, plan)
        except PipelineRuntimeError as error:
            cause = error.__cause__ if error.__cause__ is not None else error
            raise ScenarioError(f"Scenario '{scenario}' failed: {cause}", scenario=scenario) from cause
        except LabError as error:
            raise ScenarioError(f"Scenario '{scenario}' failed: {error}", scenario=scenario) from error
        wall_time = time.perf_counter() - start

        record = ResultRecord(
            scenario=scenario,
            command=self.config.command,
            config_hash=digest,
            seed=self.config.seed,
            wall_time=wall_time,
            solve_pipeline=pair.solve.dumps(),
            check_pipeline=pair.check.dumps(),
        )
        self._collect(record, outputs["solve"], count_verdicts=not plan.per_case)
        self._collect(record, outputs["check"], count_verdicts=True)
        if output_dir is not None:
            self._write_artifacts(record, outputs, Path(output_dir))
        logger.info(
            "Scenario {scenario} finished in {seconds}s: {verdict}",
            scenario=scenario,
            seconds=round(wall_time, 2),
            verdict=str(record.verdict),
        )
        return record

    def _execute(self, pair: StagePair, plan: StagePlan) -> Dict[str, Dict[str, Any]]:
        if plan.per_case:
            return pair.run_per_case(plan.solve_inputs, plan.check_inputs, progress_bar=self.progress_bar)
        return pair.run(plan.solve_inputs, plan.check_inputs)

    @staticmethod
    def _collect(record: ResultRecord, outputs: Dict[str, Dict[str, Any]], *, count_verdicts: bool):
        for component_name, component_outputs in outputs.items():
            for name, value in (component_outputs.get("metrics") or {}).items():
                if isinstance(value, Real):
                    record.metrics[f"{component_name}.{name}"] = float(value)
            verdict = component_outputs.get("verdict")
            if count_verdicts and isinstance(verdict, Verdict):
                record.verdicts[component_name] = verdict

    def _write_artifacts(self, record: ResultRecord, outputs: Dict[str, Dict[str, Any]], directory: Path):
        artifacts: Dict[str, Path] = {
            "config": dump_config(directory / "config.yaml", self.config.resolved()),
        }
        (directory / "solve_pipeline.yaml").write_text(record.solve_pipeline, encoding="utf-8")
        (directory / "check_pipeline.yaml").write_text(record.check_pipeline, encoding="utf-8")
        artifacts["solve_pipeline"] = directory / "solve_pipeline.yaml"
        artifacts["check_pipeline"] = directory / "check_pipeline.yaml"

        for stage in ("solve", "check"):
            for component_name, component_outputs in outputs[stage].items():
                rows = component_outputs.get("rows")
                if rows:
                    artifacts[f"{component_name}_rows"] = write_csv(directory / f"{component_name}.csv", rows)
                report = component_outputs.get("report")
                if report is not None and hasattr(report, "to_dict"):
                    artifacts[f"{component_name}_report"] = write_json(
                        directory / f"{component_name}_report.json", report.to_dict()
                    )
                reports = component_outputs.get("reports")
                if reports:
                    artifacts[f"{component_name}_reports"] = write_json(
                        directory / f"{component_name}_reports.json", self._case_reports(reports)
                    )
                paths = component_outputs.get("paths")
                if isinstance(paths, PathBatch) and self.config.forward.dump_paths:
                    paths.dump(directory / f"{component_name}_paths.bin")
                    artifacts[f"{component_name}_paths"] = directory / f"{component_name}_paths.bin"

        record.artifacts = {name: str(path) for name, path in artifacts.items()}
        record.artifacts["result"] = str(directory / "result.json")
        write_json(directory / "result.json", record.to_dict())

    def _case_reports(self, reports: List[Any]) -> Dict[str, Any]:
        cases = self.config.assumptions.cases
        if len(reports) != len(cases):
            return {"reports": reports}
        return {case.label or case.generator.kind: case_reports for case, case_reports in zip(cases, reports)}
