# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np
from haystack import logging

from logbsde_lab.dataclasses.envelope import AssumptionEnvelope, ConstantMap
from logbsde_lab.dataclasses.generator import Generator
from logbsde_lab.errors import InvalidEnvelopeError, InvalidParametersError
from logbsde_lab.generators.bounds import log_growth_constant, young_constant

logger = logging.getLogger(__name__)

EXAMPLE_KINDS = ("log_drift", "gh_product", "state_coupled", "stochastic_monotone", "composite5", "neveu")
BASELINE_KINDS = ("zero", "linear", "sine", "constant")
VIOLATOR_KINDS = ("cubic_violator", "exp_violator", "kink_violator")
SUPPORTED_KINDS = EXAMPLE_KINDS + BASELINE_KINDS + VIOLATOR_KINDS

_COMMON_DEFAULTS: Dict[str, Any] = {"d": 1, "r": 1, "p": 2.0, "gamma": 0.25}

_KIND_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "log_drift": {"K": 1.0, "epsilon": 0.5},
    "neveu": {"K": 1.0, "epsilon": 0.5},
    "gh_product": {"epsilon0": 0.5},
    "state_coupled": {"q_bar": 1.0, "alpha": 1.5},
    "stochastic_monotone": {"c": 1.0, "c0": 1.0, "beta": 1.0, "alpha": 1.5},
    "composite5": {"q_bar": 0.5, "q_bar_prime": 0.25, "q_bar_second": 0.25, "beta": 1.0, "c0": 1.0},
    "zero": {},
    "linear": {"rate": 0.5, "c": 0.0},
    "sine": {"a": 0.5},
    "constant": {"c": 1.0},
    "cubic_violator": {},
    "exp_violator": {},
    "kink_violator": {"a": 10.0},
}


def _norm(values: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(values.reshape(values.shape[0], -1) ** 2, axis=1))


def _y_log_norm(y: np.ndarray) -> np.ndarray:
    # y·log|y| with the continuous extension 0 at y = 0.
    norm = _norm(y)
    log_norm = np.log(np.where(norm > 0, norm, 1.0))
    return y * log_norm[:, None]


def _state_norm(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.asarray(x, dtype=float) ** 2, axis=1))


def _resolve_params(kind: str, params: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    resolved = {**_COMMON_DEFAULTS, **_KIND_DEFAULTS[kind]}
    unexpected = set(params or {}) - set(resolved)
    if unexpected:
        raise InvalidParametersError(
            f"Unknown parameters {sorted(unexpected)} for generator kind '{kind}'. "
            f"Supported parameters are: {sorted(resolved)}"
        )
    resolved.update(params or {})
    resolved["d"], resolved["r"] = int(resolved["d"]), int(resolved["r"])
    if resolved["d"] < 1 or resolved["r"] < 1:
        raise InvalidParametersError(f"Dimensions must be positive, got d={resolved['d']}, r={resolved['r']}.")
    if resolved["p"] <= 1:
        raise InvalidParametersError(f"p must exceed 1, got {resolved['p']}.")
    return resolved


def _default_alpha_prime(p: float) -> float:
    return (1.0 + min(p, 2.0)) / 2.0


def _log_drift(params: Dict[str, Any], label: str, kind: str) -> Tuple[Generator, AssumptionEnvelope]:
    K, epsilon, p = float(params["K"]), float(params["epsilon"]), float(params["p"])
    if K < 0:
        raise InvalidParametersError(f"K must be nonnegative, got {K}.")
    if not 0.1 <= epsilon < p - 1:
        raise InvalidParametersError(f"epsilon must lie in [0.1, p-1[ = [0.1, {p - 1}[, got {epsilon}.")
    alpha = 1.0 + epsilon

    # K|y||log|y|| <= max(K/e, 1) on |y| <= 1; above 1 the power term absorbs it up to a numeric sup.
    u = np.linspace(0.0, 200.0, 200_001)
    with np.errstate(over="ignore"):
        excess = K * np.exp(u) * u - np.exp(alpha * u)
    tail = 1.01 * max(0.0, float(np.nanmax(excess)))
    eta_bar = max(K / np.e, 1.0) + 1.0 / epsilon + tail

    def func(t, x, y, z):
        return -K * _y_log_norm(y)

    generator = Generator(params["d"], params["r"], func, label, kind=kind, params=params, z_free=True, x_free=True)
    envelope = AssumptionEnvelope(
        p=p,
        gamma=params["gamma"],
        eta=ConstantMap(K),
        eta_bar=ConstantMap(eta_bar),
        alpha=alpha,
        alpha_prime=_default_alpha_prime(p),
        K_prime=2.0 * K + 1.0,
    )
    return generator, envelope


def _annulus_profile(epsilon0: float) -> Tuple[Callable[[np.ndarray], np.ndarray], float]:
    inner, outer = 1.0 - epsilon0, 1.0 + epsilon0
    log_inner, log_outer = -np.log(inner), np.log(outer)
    value_inner = inner * np.sqrt(log_inner)
    value_outer = outer * np.sqrt(log_outer)
    slope_inner = np.sqrt(log_inner) - 1.0 / (2.0 * np.sqrt(log_inner))
    slope_outer = np.sqrt(log_outer) + 1.0 / (2.0 * np.sqrt(log_outer))
    width = outer - inner

    def profile(radius: np.ndarray) -> np.ndarray:
        radius = np.asarray(radius, dtype=float)
        out = np.zeros_like(radius)
        small = (radius > 0) & (radius < inner)
        out[small] = radius[small] * np.sqrt(-np.log(radius[small]))
        large = radius > outer
        out[large] = radius[large] * np.sqrt(np.log(radius[large]))
        band = (radius >= inner) & (radius <= outer)
        # Cubic Hermite interpolant matching values and slopes on both spheres.
        s = (radius[band] - inner) / width
        h00, h10 = 2 * s**3 - 3 * s**2 + 1, s**3 - 2 * s**2 + s
        h01, h11 = -2 * s**3 + 3 * s**2, s**3 - s**2
        out[band] = np.maximum(
            h00 * value_inner + h10 * width * slope_inner + h01 * value_outer + h11 * width * slope_outer, 0.0
        )
        return out

    samples = np.linspace(inner, outer, 2001)
    band_slope = float(np.max(np.abs(np.gradient(profile(samples), samples))))
    return profile, band_slope


def _gh_product(params: Dict[str, Any], label: str, kind: str) -> Tuple[Generator, AssumptionEnvelope]:
    epsilon0, p = float(params["epsilon0"]), float(params["p"])
    if not 0 < epsilon0 < 1:
        raise InvalidParametersError(f"epsilon0 must lie in ]0, 1[, got {epsilon0}.")
    if p <= 1.5:
        raise InvalidParametersError(f"gh_product needs p > 1.5 for its growth exponents, got {p}.")
    profile, band_slope = _annulus_profile(epsilon0)

    def func(t, x, y, z):
        norm = _norm(y)
        ratio = np.where(norm > 0, norm / (1.0 + norm), 1.0)
        g = y * np.log(ratio)[:, None]
        return g * profile(_norm(z))[:, None]

    radii = np.linspace(0.0, 1.0 + epsilon0, 4001)
    eta_bar = 1.01 * float(np.max(profile(radii))) + 1e-3
    c = 2.0 * (1.0 + band_slope + 1.0 / (2.0 * np.sqrt(np.log(1.0 + epsilon0))))
    generator = Generator(params["d"], params["r"], func, label, kind=kind, params=params, x_free=True)
    envelope = AssumptionEnvelope(
        p=p,
        gamma=params["gamma"],
        eta_bar=ConstantMap(eta_bar),
        alpha=1.5,
        alpha_prime=1.5,
        K_prime=c**2 + 1.0,
    )
    return generator, envelope


def _state_coupled(params: Dict[str, Any], label: str, kind: str) -> Tuple[Generator, AssumptionEnvelope]:
    q_bar, alpha, p = float(params["q_bar"]), float(params["alpha"]), float(params["p"])
    if not 0 < q_bar < 2:
        raise InvalidParametersError(f"q_bar must lie in ]0, 2[, got {q_bar}.")
    if not 1 < alpha < p:
        raise InvalidParametersError(f"alpha must lie in ]1, p[, got {alpha}.")
    log_constant = log_growth_constant(1.0, alpha, 0.5)

    def coupling(t, x):
        return _state_norm(x) ** q_bar

    def func(t, x, y, z):
        return coupling(t, x)[:, None] * y - _y_log_norm(y)

    def eta_bar(t, x):
        return young_constant(coupling(t, x), alpha, 0.5) + log_constant

    def localizer(t, x):
        return np.exp(coupling(t, x))

    generator = Generator(params["d"], params["r"], func, label, kind=kind, params=params, z_free=True)
    envelope = AssumptionEnvelope(
        p=p,
        gamma=params["gamma"],
        eta=ConstantMap(1.0),
        M=coupling,
        eta_bar=eta_bar,
        alpha=alpha,
        alpha_prime=_default_alpha_prime(p),
        v=localizer,
        K_prime=4.0,
    )
    return generator, envelope


def _monotone_process(params: Dict[str, Any]) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    c, c0 = float(params["c"]), float(params["c0"])

    def process(t, x):
        return c0 + c * _state_norm(x)

    return process


def _stochastic_monotone(params: Dict[str, Any], label: str, kind: str) -> Tuple[Generator, AssumptionEnvelope]:
    c, c0, beta, alpha, p = (float(params[key]) for key in ("c", "c0", "beta", "alpha", "p"))
    if c < 0 or c0 <= 0 or beta < 0:
        raise InvalidParametersError(f"Need c >= 0, c0 > 0 and beta >= 0, got c={c}, c0={c0}, beta={beta}.")
    if not 1 < alpha < p:
        raise InvalidParametersError(f"alpha must lie in ]1, p[, got {alpha}.")
    dim_r = params["r"]
    alpha_prime = _default_alpha_prime(p)
    process = _monotone_process(params)
    log_constant = log_growth_constant(1.0, alpha, 0.5)
    z_constant = float(young_constant(beta * np.sqrt(dim_r), alpha_prime, 1.0))

    def func(t, x, y, z):
        return -_y_log_norm(y) + process(t, x)[:, None] * y + beta * z.sum(axis=2)

    def eta_bar(t, x):
        return young_constant(process(t, x), alpha, 0.5) + log_constant + z_constant

    def localizer(t, x):
        return np.exp(process(t, x))

    generator = Generator(params["d"], dim_r, func, label, kind=kind, params=params)
    envelope = AssumptionEnvelope(
        p=p,
        gamma=params["gamma"],
        eta=ConstantMap(1.0),
        M=process,
        K=ConstantMap(beta * np.sqrt(dim_r)),
        eta_bar=eta_bar,
        alpha=alpha,
        alpha_prime=alpha_prime,
        v=localizer,
        K_prime=4.0 + beta**2 * dim_r,
    )
    return generator, envelope


def _composite5(params: Dict[str, Any], label: str, kind: str) -> Tuple[Generator, AssumptionEnvelope]:
    q_bar, q_bar_prime, q_bar_second = (float(params[key]) for key in ("q_bar", "q_bar_prime", "q_bar_second"))
    beta, c0, p = float(params["beta"]), float(params["c0"]), float(params["p"])
    if min(q_bar, q_bar_prime, q_bar_second) < 0:
        raise InvalidParametersError("The state exponents of composite5 must be nonnegative.")
    if not (q_bar + q_bar_second < 2 and q_bar_prime + q_bar_second < 1):
        raise InvalidParametersError(
            f"composite5 needs q_bar + q_bar_second < 2 and q_bar_prime + q_bar_second < 1, got "
            f"{q_bar}, {q_bar_prime}, {q_bar_second}."
        )
    if beta < 0 or c0 < 0:
        raise InvalidParametersError(f"beta and c0 must be nonnegative, got {beta}, {c0}.")
    dim_d, dim_r = params["d"], params["r"]
    alpha, alpha_prime = 1.5, _default_alpha_prime(p)
    if alpha >= p:
        raise InvalidParametersError(f"composite5 needs p > 1.5, got {p}.")

    def func(t, x, y, z):
        norm = _state_norm(x)
        inner = -(norm**q_bar)[:, None] * y + beta * (norm**q_bar_prime)[:, None] * z.sum(axis=2) + c0
        return (norm**q_bar_second)[:, None] * inner

    def f0(t, x):
        return c0 * np.sqrt(dim_d) * _state_norm(x) ** q_bar_second

    def cross(t, x):
        return beta * np.sqrt(dim_r) * _state_norm(x) ** (q_bar_prime + q_bar_second)

    def eta_bar(t, x):
        norm = _state_norm(x)
        return (
            young_constant(norm ** (q_bar + q_bar_second), alpha, 1.0)
            + young_constant(cross(t, x), alpha_prime, 1.0)
            + f0(t, x)
        )

    def localizer(t, x):
        return np.exp(_state_norm(x) ** (2.0 * (q_bar_prime + q_bar_second)))

    generator = Generator(dim_d, dim_r, func, label, kind=kind, params=params)
    envelope = AssumptionEnvelope(
        p=p,
        gamma=params["gamma"],
        f0=f0,
        K=cross,
        eta_bar=eta_bar,
        alpha=alpha,
        alpha_prime=alpha_prime,
        v=localizer,
        K_prime=beta**2 * dim_r + 1.0,
    )
    return generator, envelope


def _baseline(params: Dict[str, Any], label: str, kind: str) -> Tuple[Generator, AssumptionEnvelope]:
    dim_d, dim_r, p = params["d"], params["r"], float(params["p"])
    common = {"p": p, "gamma": params["gamma"], "alpha_prime": _default_alpha_prime(p)}

    if kind == "zero":

        def func(t, x, y, z):
            return np.zeros_like(y)

        return (
            Generator(dim_d, dim_r, func, label, kind=kind, params=params, z_free=True, x_free=True),
            AssumptionEnvelope(**common),
        )

    if kind == "linear":
        rate = float(params["rate"])
        shift = np.broadcast_to(np.asarray(params["c"], dtype=float), (dim_d,)).copy()
        shift_norm = float(np.linalg.norm(shift))

        def func(t, x, y, z):
            return -rate * y + shift

        envelope = AssumptionEnvelope(
            f0=ConstantMap(shift_norm),
            M=ConstantMap(max(0.0, -rate)),
            eta_bar=ConstantMap(float(young_constant(abs(rate), 1.5)) + shift_norm),
            K_prime=max(0.0, -rate),
            **common,
        )
        return Generator(dim_d, dim_r, func, label, kind=kind, params=params, z_free=True, x_free=True), envelope

    if kind == "sine":
        amplitude = float(params["a"])
        bound = abs(amplitude) * np.sqrt(dim_d)

        def func(t, x, y, z):
            return amplitude * np.sin(y)

        envelope = AssumptionEnvelope(
            f0=ConstantMap(bound), eta_bar=ConstantMap(bound), K_prime=abs(amplitude), **common
        )
        return Generator(dim_d, dim_r, func, label, kind=kind, params=params, z_free=True, x_free=True), envelope

    value = np.broadcast_to(np.asarray(params["c"], dtype=float), (dim_d,)).copy()
    value_norm = float(np.linalg.norm(value))

    def constant(t, x, y, z):
        return np.broadcast_to(value, y.shape)

    envelope = AssumptionEnvelope(f0=ConstantMap(value_norm), eta_bar=ConstantMap(value_norm), **common)
    return Generator(dim_d, dim_r, constant, label, kind=kind, params=params, z_free=True, x_free=True), envelope


def _violator(params: Dict[str, Any], label: str, kind: str) -> Tuple[Generator, AssumptionEnvelope]:
    reference_params = {key: params[key] for key in _COMMON_DEFAULTS}
    _, envelope = _log_drift({**reference_params, **_KIND_DEFAULTS["log_drift"]}, label, "log_drift")

    if kind == "cubic_violator":

        def func(t, x, y, z):
            return np.sum(y**2, axis=1, keepdims=True) * y

    elif kind == "exp_violator":

        def func(t, x, y, z):
            return np.exp(np.abs(y))

    else:
        amplitude = float(params["a"])

        def func(t, x, y, z):
            return amplitude * np.sign(y) * np.sqrt(np.abs(y))

    generator = Generator(params["d"], params["r"], func, label, kind=kind, params=params, z_free=True, x_free=True)
    return generator, envelope


_BUILDERS: Dict[str, Callable[[Dict[str, Any], str, str], Tuple[Generator, AssumptionEnvelope]]] = {
    "log_drift": _log_drift,
    "neveu": _log_drift,
    "gh_product": _gh_product,
    "state_coupled": _state_coupled,
    "stochastic_monotone": _stochastic_monotone,
    "composite5": _composite5,
    **{kind: _baseline for kind in BASELINE_KINDS},
    **{kind: _violator for kind in VIOLATOR_KINDS},
}


def make_example(kind: str, params: Optional[Dict[str, Any]] = None) -> Tuple[Generator, AssumptionEnvelope]:
    """
    Build a library generator together with its certified assumption envelope.

    Every kind accepts the dimensions `d` and `r`, the integrability exponent `p` and the weight exponent
    `gamma`. The kind-specific parameters are:
    - `log_drift`, `neveu`: `K` and `epsilon` for `f(y) = -K·y·log|y|`.
    - `gh_product`: `epsilon0` for `f(y, z) = y·log(|y|/(1+|y|))·h(z)`.
    - `state_coupled`: `q_bar` and `alpha` for `f(x, y) = |x|^q̄·y - y·log|y|`.
    - `stochastic_monotone`: `c`, `c0`, `beta` and `alpha` for `f = -y·log|y| + C·y + β·z·1` with `C = c0 + c|x|`.
    - `composite5`: `q_bar`, `q_bar_prime`, `q_bar_second`, `beta` and `c0` for
      `f = |x|^q̄″·F(|x|^q̄·y, |x|^q̄′·z)` with the monotone linear `F(y, z) = -y + β·z·1 + c0`.
    - `zero`; `linear` (`rate`, `c`) for `-rate·y + c`; `sine` (`a`) for `a·sin(y)`; `constant` (`c`).
    - `cubic_violator`, `exp_violator` and `kink_violator` (`a`): drivers that break the growth, monotonicity
      or log-Lipschitz bounds, returned with the `log_drift` envelope they violate.

    The returned generator records the kind and the resolved parameters, so `Generator.to_dict` rebuilds it.

    :param kind:
        Name of the kind.
    :param params:
        Parameters overriding the kind's defaults.
    :returns:
        The generator and its envelope.
    :raises InvalidParametersError:
        If the kind is unknown or a parameter is out of range.
    """
    builder = _BUILDERS.get(kind)
    if builder is None:
        raise InvalidParametersError(f"Unknown generator kind '{kind}'. Supported kinds are: {list(SUPPORTED_KINDS)}")
    resolved = _resolve_params(kind, params)
    label = f"{kind}({', '.join(f'{key}={value}' for key, value in sorted((params or {}).items()))})"
    generator, envelope = builder(resolved, label, kind)
    logger.debug("Built generator {label}", label=label)
    return generator, envelope


def monotone_certificate(
    generator: Generator,
) -> Tuple[Callable[[np.ndarray, np.ndarray], np.ndarray], float]:
    """
    Positive process `C` and constant `K′` of the stochastic-monotone condition of a `stochastic_monotone` driver.

    :param generator:
        A generator built by `make_example("stochastic_monotone", ...)`.
    :returns:
        The process map `(t, x) -> C(t, x)` and the constant.
    :raises InvalidParametersError:
        If the generator is of another kind.
    """
    if generator.kind != "stochastic_monotone":
        raise InvalidParametersError(f"No stochastic-monotone certificate for kind '{generator.kind}'.")
    params = _resolve_params("stochastic_monotone", generator.params)
    cross = float(params["beta"]) * np.sqrt(params["r"])
    return _monotone_process(params), max(2.0, cross) + 1.0


def lambda_weight(envelope: AssumptionEnvelope, t: Any, x: Any) -> np.ndarray:
    """
    The weight `λ = 2M + K²/(2γ)` of an envelope.

    :param envelope:
        The envelope.
    :param t:
        Times of shape `(n,)`, or a scalar.
    :param x:
        States of shape `(n, k)`, or a single state.
    :returns:
        Values of shape `(n,)`; a scalar input gives a length-one array.
    :raises InvalidEnvelopeError:
        If `γ ≤ 0`.
    """
    if envelope.gamma <= 0:
        raise InvalidEnvelopeError(f"gamma must be positive, got {envelope.gamma}.")
    x = np.asarray(x, dtype=float)
    if x.ndim <= 1:
        x = x.reshape(1, -1)
    t = np.broadcast_to(np.asarray(t, dtype=float), (x.shape[0],))
    return 2.0 * envelope.M(t, x) + envelope.K(t, x) ** 2 / (2.0 * envelope.gamma)
