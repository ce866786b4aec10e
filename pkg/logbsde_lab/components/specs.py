# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from dataclasses import replace
from typing import Any, Dict, Optional, Tuple

import numpy as np

from logbsde_lab.dataclasses.diffusion import DiffusionSpec
from logbsde_lab.dataclasses.envelope import AssumptionEnvelope, ConstantMap
from logbsde_lab.dataclasses.generator import Generator
from logbsde_lab.dataclasses.time_grid import TimeGrid, make_time_grid
from logbsde_lab.errors import InvalidParametersError
from logbsde_lab.forward.diffusions import make_diffusion
from logbsde_lab.generators.examples import make_example
from logbsde_lab.generators.sampling import BoxSampler
from logbsde_lab.pde.linear_log import linear_log_assumptions, make_linear_log_pde
from logbsde_lab.pde.problem import PdeAssumptions, PdeProblem
from logbsde_lab.solvers.problem import BsdeProblem, TerminalMap, make_terminal

#: Kinds whose driver is `-K·y·log|y|`; their PDE assumptions are those of the linear-logarithmic system.
LOG_KINDS = ("log_drift", "neveu")

_SCALAR_FIELDS = ("p", "gamma", "q", "alpha", "alpha_prime", "q_prime", "K_prime", "mu")
_MAP_FIELDS = ("eta", "f0", "M", "K", "eta_bar", "v")
_PDE_FIELDS = ("delta", "p_bar", "M", "M_prime", "q", "alpha", "alpha_prime", "K", "r")


def apply_envelope_overrides(envelope: AssumptionEnvelope, overrides: Dict[str, float]) -> AssumptionEnvelope:
    """
    Replace scalar exponents of an envelope, and maps by constants.

    :param envelope:
        The envelope.
    :param overrides:
        Values keyed by field name; map fields such as `eta` or `M` become constant maps.
    :returns:
        The validated envelope.
    :raises InvalidParametersError:
        If a key is not an envelope field.
    """
    unknown = set(overrides) - set(_SCALAR_FIELDS) - set(_MAP_FIELDS)
    if unknown:
        raise InvalidParametersError(f"Unknown envelope fields {sorted(unknown)}.")
    changes: Dict[str, Any] = {}
    for name, value in overrides.items():
        changes[name] = ConstantMap(float(value)) if name in _MAP_FIELDS else float(value)
    return replace(envelope, **changes).validate() if changes else envelope


def build_generator(spec: Dict[str, Any]) -> Tuple[Generator, AssumptionEnvelope]:
    """
    Build a library generator from `{"kind", "params", "envelope"}`.
    """
    generator, envelope = make_example(spec["kind"], spec.get("params") or {})
    return generator, apply_envelope_overrides(envelope, spec.get("envelope") or {})


def build_diffusion(spec: Dict[str, Any]) -> DiffusionSpec:
    return make_diffusion(spec["kind"], spec.get("dim_k", 1), spec.get("dim_r"), **(spec.get("params") or {}))


def build_terminal(spec: Dict[str, Any], dim_k: int, dim_d: int) -> TerminalMap:
    return make_terminal(spec["kind"], dim_k, dim_d, **(spec.get("params") or {}))


def build_time_grid(spec: Dict[str, Any]) -> TimeGrid:
    return make_time_grid(float(spec.get("t0", 0.0)), float(spec["T"]), int(spec["n_steps"]))


def build_sampler(spec: Optional[Dict[str, Any]], dim_k: int, t_range: Tuple[float, float]) -> BoxSampler:
    """
    Box sampler of the given state dimension; `spec` may set the half-widths, the log fraction and the seed.
    """
    return BoxSampler(dim_k=dim_k, t_range=t_range, **(spec or {}))


def build_problem(
    generator: Dict[str, Any],
    terminal: Dict[str, Any],
    diffusion: Dict[str, Any],
    time_grid: Dict[str, Any],
    x0: Any,
) -> Tuple[BsdeProblem, AssumptionEnvelope]:
    """
    Assemble a Markovian backward problem and the envelope of its driver from configuration sections.

    :returns:
        The problem and the envelope.
    """
    driver, envelope = build_generator(generator)
    forward = build_diffusion(diffusion)
    problem = BsdeProblem(
        generator=driver,
        terminal=build_terminal(terminal, forward.dim_k, driver.dim_d),
        diffusion=forward,
        grid=build_time_grid(time_grid),
        x0=np.asarray(x0, dtype=float),
    )
    return problem, envelope


def _pde_assumptions(generator: Generator, overrides: Dict[str, float]) -> PdeAssumptions:
    unknown = set(overrides) - set(_PDE_FIELDS)
    if unknown:
        raise InvalidParametersError(f"Unknown PDE assumption fields {sorted(unknown)}.")
    if generator.kind in LOG_KINDS:
        base = linear_log_assumptions(
            float(generator.params["K"]),
            generator.dim_d,
            delta=float(overrides.get("delta", 0.0)),
            p_bar=float(overrides.get("p_bar", 2.0)),
        )
        rest = {key: float(value) for key, value in overrides.items() if key not in ("delta", "p_bar")}
        return replace(base, **rest).validate()
    return PdeAssumptions(**{key: float(value) for key, value in overrides.items()}).validate()


def build_pde_problem(
    generator: Dict[str, Any],
    terminal: Dict[str, Any],
    diffusion: Dict[str, Any],
    T: float,
    assumptions: Optional[Dict[str, float]] = None,
) -> PdeProblem:
    """
    Assemble a semilinear terminal value problem from configuration sections.

    The kind `linear_log` takes the parameters `A`, `B`, `C` (nested lists) and `K` of the linear-logarithmic
    system; the logarithmic library kinds get the assumption data of that system with `A = B = 0`; other kinds
    take their assumption data from `assumptions`.

    :param generator:
        Generator section, `{"kind", "params"}`.
    :param terminal:
        Terminal section.
    :param diffusion:
        Diffusion section.
    :param T:
        The horizon.
    :param assumptions:
        Scalar assumption data overriding the defaults.
    :returns:
        The problem.
    """
    assumptions = dict(assumptions or {})
    forward = build_diffusion(diffusion)
    if generator["kind"] == "linear_log":
        params = dict(generator.get("params") or {})
        C = np.asarray(params["C"], dtype=float)
        return make_linear_log_pde(
            np.asarray(params.get("A", np.zeros_like(C)), dtype=float),
            np.asarray(params.get("B", np.zeros((C.shape[0], forward.dim_r, C.shape[0]))), dtype=float),
            C,
            build_terminal(terminal, forward.dim_k, C.shape[0]),
            forward,
            float(T),
            K=float(params["K"]),
            delta=float(assumptions.get("delta", 0.0)),
            p_bar=float(assumptions.get("p_bar", 2.0)),
        )
    driver, _ = make_example(generator["kind"], generator.get("params") or {})
    return PdeProblem(
        diffusion=forward,
        terminal=build_terminal(terminal, forward.dim_k, driver.dim_d),
        F=driver,
        T=float(T),
        assumptions=_pde_assumptions(driver, assumptions),
    )
