# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from logbsde_lab.errors import ConfigError
from logbsde_lab.experiments.parameters import Command
from logbsde_lab.forward.diffusions import DIFFUSION_KINDS
from logbsde_lab.generators.examples import SUPPORTED_KINDS
from logbsde_lab.pde.finite_difference import FdMesh
from logbsde_lab.solvers.config import SolverConfig
from logbsde_lab.solvers.problem import TERMINAL_KINDS

#: The schema version this module reads and writes.
SCHEMA_VERSION = 1

#: Generator kinds accepted by configurations; `linear_log` is only meaningful for PDE comparisons.
GENERATOR_KINDS = SUPPORTED_KINDS + ("linear_log",)

FieldMethod = Literal["monte_carlo", "finite_difference", "characteristics"]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GeneratorSection(_Section):
    """
    A driver by kind, its parameters and overrides of its envelope.
    """

    kind: str
    params: Dict[str, Any] = Field(default_factory=dict)
    envelope: Dict[str, float] = Field(default_factory=dict)

    @field_validator("kind")
    @classmethod
    def _check_kind(cls, kind: str) -> str:
        if kind not in GENERATOR_KINDS:
            raise ValueError(f"unknown generator kind '{kind}', supported kinds are: {list(GENERATOR_KINDS)}")
        return kind


class TerminalSection(_Section):
    kind: str = "constant"
    params: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("kind")
    @classmethod
    def _check_kind(cls, kind: str) -> str:
        if kind not in TERMINAL_KINDS:
            raise ValueError(f"unknown terminal kind '{kind}', supported kinds are: {list(TERMINAL_KINDS)}")
        return kind


class DiffusionSection(_Section):
    kind: str = "zero"
    dim_k: int = Field(default=1, ge=1)
    dim_r: Optional[int] = Field(default=None, ge=1)
    params: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("kind")
    @classmethod
    def _check_kind(cls, kind: str) -> str:
        if kind not in DIFFUSION_KINDS:
            raise ValueError(f"unknown diffusion kind '{kind}', supported kinds are: {list(DIFFUSION_KINDS)}")
        return kind


class TimeGridSection(_Section):
    t0: float = 0.0
    T: float = 1.0
    n_steps: int = Field(default=100, ge=0)

    @model_validator(mode="after")
    def _check_interval(self) -> "TimeGridSection":
        if self.T < self.t0:
            raise ValueError(f"T must not lie before t0, got t0={self.t0} and T={self.T}")
        return self


class SpaceGridSection(_Section):
    """
    Tensor grid of a field: per-axis bounds and point counts, scalars shared by all axes, and the times.
    """

    x_min: Union[float, List[float]] = -4.0
    x_max: Union[float, List[float]] = 4.0
    n_points: Union[int, List[int]] = 21
    t_points: List[float] = Field(default_factory=lambda: [0.0])


class ForwardSection(_Section):
    n_paths: int = Field(default=10_000, ge=1)
    kappa: float = Field(default=0.1, gt=0)
    kappa_max: float = Field(default=10.0, gt=0)
    reflection_tolerance: Optional[float] = Field(default=None, gt=0)
    n_jobs: int = Field(default=1, ge=1)
    dump_paths: bool = False


class AssumptionCase(_Section):
    generator: GeneratorSection
    expect: Literal["pass", "fail", "inconclusive"] = "pass"
    label: Optional[str] = None


class AssumptionsSection(_Section):
    checks: List[Literal["H1", "H2", "H3", "H4"]] = Field(default_factory=lambda: ["H1", "H2", "H3", "H4"])
    n_samples: int = Field(default=2000, ge=1)
    sampler: Dict[str, float] = Field(default_factory=dict)
    N_list: List[float] = Field(default_factory=lambda: [10.0, 100.0])
    cases: List[AssumptionCase] = Field(default_factory=list)


class MollifySection(_Section):
    schedule: List[float] = Field(default_factory=lambda: [4.0, 8.0, 16.0, 32.0])
    n_samples: int = Field(default=10_000, ge=1)
    N: float = Field(default=1.0, gt=0)
    grid_density: int = Field(default=101, ge=2)
    quad_nodes: int = Field(default=16, ge=1)
    threshold: float = Field(default=1e-2, gt=0)
    h: Optional[float] = Field(default=None, gt=0, le=1)
    sampler: Dict[str, float] = Field(default_factory=dict)


class AprioriCase(_Section):
    label: str
    generator: Dict[str, Any] = Field(default_factory=dict)
    terminal: Dict[str, Any] = Field(default_factory=dict)


class AprioriSection(_Section):
    """
    The instance family of the a-priori check; the first case calibrates the constant.
    """

    cases: List[AprioriCase] = Field(default_factory=list)
    p: Optional[float] = Field(default=None, gt=1)
    gamma: Optional[float] = Field(default=None, gt=0)
    safety_factor: float = Field(default=2.0, gt=0)


class StabilitySection(_Section):
    schedule: List[float] = Field(default_factory=lambda: [4.0, 8.0, 16.0, 32.0])
    p_prime: float = Field(default=1.5, gt=1)
    N: float = Field(default=1.0, gt=0)
    burn_in: int = Field(default=0, ge=0)
    threshold: float = Field(default=1e-2, gt=0)
    grid_density: int = Field(default=101, ge=2)
    reference: Literal["auto", "oracle", "direct", "largest"] = "auto"


class BsdeSection(_Section):
    tolerance: float = Field(default=1e-3, gt=0)
    p: float = Field(default=2.0, gt=1)


class PdeSection(_Section):
    candidate: FieldMethod = "monte_carlo"
    reference: FieldMethod = "finite_difference"
    budget: float = Field(default=0.05, gt=0)
    node_budget: Optional[float] = Field(default=None, gt=0)
    delta_prime: Optional[float] = Field(default=None, ge=0)
    p: float = Field(default=2.0, gt=1)
    steps_per_unit: float = Field(default=100.0, gt=0)
    mc_mode: Literal["per_node", "shared"] = "per_node"
    fd_mesh: FdMesh = Field(default_factory=FdMesh)
    ode_tol: float = Field(default=1e-10, gt=0)
    z_tolerance: Optional[float] = Field(default=None, gt=0)
    assumptions: Dict[str, float] = Field(default_factory=dict)


class OverridesSection(_Section):
    """
    Init parameter overrides of the stage components, keyed by component name.
    """

    solve: Dict[str, Dict[str, Any]] = Field(default_factory=dict)
    check: Dict[str, Dict[str, Any]] = Field(default_factory=dict)


class ExperimentConfig(_Section):  # pylint: disable=too-many-instance-attributes
    """
    The complete, validated configuration of one experiment run.

    Sections that the command does not use keep their defaults and are still part of the resolved config and its
    hash. The output directory is left out of the hash.
    """

    schema_version: Literal[1] = SCHEMA_VERSION
    scenario: str = "custom"
    command: Command
    seed: int = Field(default=0, ge=0, lt=2**64)
    generator: GeneratorSection = Field(default_factory=lambda: GeneratorSection(kind="zero"))
    terminal: TerminalSection = Field(default_factory=TerminalSection)
    diffusion: DiffusionSection = Field(default_factory=DiffusionSection)
    time_grid: TimeGridSection = Field(default_factory=TimeGridSection)
    x0: List[float] = Field(default_factory=lambda: [0.0])
    space_grid: SpaceGridSection = Field(default_factory=SpaceGridSection)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    forward: ForwardSection = Field(default_factory=ForwardSection)
    bsde: BsdeSection = Field(default_factory=BsdeSection)
    assumptions: AssumptionsSection = Field(default_factory=AssumptionsSection)
    mollify: MollifySection = Field(default_factory=MollifySection)
    apriori: AprioriSection = Field(default_factory=AprioriSection)
    stability: StabilitySection = Field(default_factory=StabilitySection)
    pde: PdeSection = Field(default_factory=PdeSection)
    overrides: OverridesSection = Field(default_factory=OverridesSection)
    output_dir: Optional[str] = None

    @model_validator(mode="after")
    def _check_command_sections(self) -> "ExperimentConfig":
        if len(self.x0) != self.diffusion.dim_k:
            raise ValueError(f"x0 has {len(self.x0)} entries but the diffusion has dim_k={self.diffusion.dim_k}")
        if self.command == Command.CHECK_ASSUMPTIONS and not self.assumptions.cases:
            raise ValueError("check-assumptions needs at least one case in assumptions.cases")
        if self.command == Command.APRIORI_CHECK and len(self.apriori.cases) < 2:
            raise ValueError("apriori-check needs a calibration case and at least one sweep case in apriori.cases")
        if self.generator.kind == "linear_log" and self.command != Command.PDE_COMPARE:
            raise ValueError("the linear_log generator kind is only available to pde-compare")
        return self

    def with_overrides(self, **changes: Any) -> "ExperimentConfig":
        """
        A validated copy with top-level fields replaced, e.g. the seed given on the command line.
        """
        return parse_config({**self.model_dump(mode="json"), **changes})

    def resolved(self) -> Dict[str, Any]:
        """
        The resolved configuration as plain data, every default filled in.
        """
        return self.model_dump(mode="json")


def _key_path(error: Dict[str, Any]) -> str:
    return ".".join(str(part) for part in error["loc"])


def parse_config(data: Dict[str, Any]) -> ExperimentConfig:
    """
    Validate configuration data.

    :param data:
        The configuration as plain data.
    :returns:
        The configuration.
    :raises ConfigError:
        If the data does not validate; the error names the dotted path of the first offending key.
    """
    if not isinstance(data, dict):
        raise ConfigError(f"A configuration must be a mapping, got {type(data).__name__}.")
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as error:
        first = error.errors()[0]
        key_path = _key_path(first)
        raise ConfigError(f"Invalid configuration at '{key_path or '.'}': {first['msg']}", key_path=key_path) from error


def read_config_data(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read a YAML or JSON configuration file without validating it.

    :param path:
        The file.
    :returns:
        The parsed data.
    :raises ConfigError:
        If the file cannot be read or parsed, or does not hold a mapping.
    """
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = yaml.safe_load(handle)
    except (OSError, yaml.YAMLError) as error:
        raise ConfigError(f"Cannot read configuration '{path}': {error}") from error
    if not isinstance(data, dict):
        raise ConfigError(f"Configuration '{path}' must hold a mapping, got {type(data).__name__}.")
    return data


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Load and validate a YAML or JSON configuration file.

    :param path:
        The file.
    :returns:
        The configuration.
    :raises ConfigError:
        If the file cannot be read or parsed, or does not validate.
    """
    return parse_config(read_config_data(path))


def config_hash(config: ExperimentConfig) -> str:
    """
    SHA-256 of the canonical JSON of the resolved configuration, sorted keys and no whitespace.

    The output directory is left out, so the same experiment hashes equally wherever it writes.
    """
    data = config.model_dump(mode="json", exclude={"output_dir"})
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
