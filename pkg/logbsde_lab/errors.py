# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

from typing import Optional


class LabError(Exception):
    """
    Base class of all errors raised by the laboratory.
    """

    pass


class InvalidIntervalError(LabError, ValueError):
    """
    Raised when a time interval ends before it starts.
    """

    pass


class InvalidResolutionError(LabError, ValueError):
    """
    Raised when a non-degenerate interval is discretized with zero steps.
    """

    pass


class InvalidParametersError(LabError, ValueError):
    """
    Raised when parameters of a generator kind, diffusion or terminal map are out of range.
    """

    pass


class InvalidEnvelopeError(LabError, ValueError):
    """
    Raised when an assumption envelope violates its structural constraints.
    """

    pass


class InvalidExponentsError(LabError, ValueError):
    """
    Raised when integrability exponents are outside their admissible ranges.
    """

    pass


class InvalidCoefficientsError(LabError, ValueError):
    """
    Raised when sampled PDE coefficients violate their declared bounds.
    """

    pass


class IncompatibleGeneratorsError(LabError, ValueError):
    """
    Raised when two generators with different dimensions are compared.
    """

    pass


class DegenerateTestFunctionError(LabError, ValueError):
    """
    Raised when a test function has zero weighted mass on the quadrature grid.
    """

    pass


class UnsupportedDimensionError(LabError, ValueError):
    """
    Raised when a computation is requested in a dimension it does not support.
    """

    pass


class NumericFaultError(LabError, ArithmeticError):
    """
    Raised when a model map produces non-finite values.

    :param message:
        Human readable description.
    :param path_index:
        Index of the first offending path, if known.
    :param step_index:
        Index of the first offending time step, if known.
    """

    def __init__(self, message: str, path_index: Optional[int] = None, step_index: Optional[int] = None):
        super().__init__(message)
        self.path_index = path_index
        self.step_index = step_index


class FixedPointDivergenceError(LabError, ArithmeticError):
    """
    Raised when the implicit backward step does not converge.

    :param message:
        Human readable description.
    :param path_index:
        Path with the largest remaining update.
    :param step_index:
        Time step at which the iteration gave up.
    :param residual:
        Largest remaining update.
    """

    def __init__(self, message: str, path_index: int, step_index: int, residual: float):
        super().__init__(message)
        self.path_index = path_index
        self.step_index = step_index
        self.residual = residual


class DivergenceError(LabError, ArithmeticError):
    """
    Raised when a deterministic integration blows up.
    """

    pass


class NewtonConvergenceError(LabError, ArithmeticError):
    """
    Raised when the Newton iteration of the finite difference solver fails.

    :param message:
        Human readable description.
    :param time:
        Time slice on which the iteration failed.
    :param x:
        Spatial node with the largest residual.
    """

    def __init__(self, message: str, time: float, x: float):
        super().__init__(message)
        self.time = time
        self.x = x


class OracleMismatchError(LabError, AssertionError):
    """
    Raised when a numerical result disagrees with a closed-form cross-check.
    """

    pass


class ConfigError(LabError, ValueError):
    """
    Raised when an experiment configuration fails validation.

    :param message:
        Human readable description.
    :param key_path:
        Dotted path of the offending key.
    """

    def __init__(self, message: str, key_path: str = ""):
        super().__init__(message)
        self.key_path = key_path


class ScenarioError(LabError):
    """
    Raised when a scenario cannot be resolved or one of its stages fails.

    :param message:
        Human readable description.
    :param scenario:
        Id of the scenario.
    """

    def __init__(self, message: str, scenario: str):
        super().__init__(message)
        self.scenario = scenario
