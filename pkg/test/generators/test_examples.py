# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0
import numpy as np
import pytest

from logbsde_lab.dataclasses.envelope import AssumptionEnvelope, ConstantMap
from logbsde_lab.errors import InvalidEnvelopeError, InvalidParametersError
from logbsde_lab.generators.examples import SUPPORTED_KINDS, lambda_weight, make_example, monotone_certificate


@pytest.mark.parametrize("kind", SUPPORTED_KINDS)
def test_every_kind_builds_a_valid_envelope(kind):
    generator, envelope = make_example(kind)
    assert generator.kind == kind
    assert envelope.validate() is envelope
    out = generator.evaluate(np.zeros(3), np.zeros((3, 1)), np.array([[0.0], [0.5], [-2.0]]), np.zeros((3, 1, 1)))
    assert out.shape == (3, 1)
    assert np.all(np.isfinite(out))


class TestMakeExample:
    def test_log_drift_values(self):
        generator, _ = make_example("log_drift", {"K": 2.0})
        np.testing.assert_allclose(generator.evaluate_point(0.0, 0.0, np.e), [-2.0 * np.e])
        np.testing.assert_allclose(generator.evaluate_point(0.0, 0.0, 0.0), [0.0])
        assert generator.z_free and generator.x_free

    def test_neveu_is_the_same_driver(self):
        log_drift, _ = make_example("log_drift")
        neveu, _ = make_example("neveu")
        y = np.array([[0.3], [4.0]])
        np.testing.assert_array_equal(
            neveu.evaluate(0.0, np.zeros((2, 1)), y, np.zeros((2, 1, 1))),
            log_drift.evaluate(0.0, np.zeros((2, 1)), y, np.zeros((2, 1, 1))),
        )

    def test_state_coupled_depends_on_state(self):
        generator, _ = make_example("state_coupled")
        at_origin = generator.evaluate_point(0.0, 0.0, 1.0)
        away = generator.evaluate_point(0.0, 2.0, 1.0)
        np.testing.assert_allclose(at_origin, [0.0])
        np.testing.assert_allclose(away, [2.0])

    def test_linear_and_constant(self):
        linear, _ = make_example("linear", {"rate": 1.0, "c": 0.5})
        constant, _ = make_example("constant", {"c": 3.0})
        np.testing.assert_allclose(linear.evaluate_point(0.0, 0.0, 2.0), [-1.5])
        np.testing.assert_allclose(constant.evaluate_point(0.0, 0.0, 2.0), [3.0])

    def test_label_names_parameters(self):
        generator, _ = make_example("log_drift", {"K": 0.5})
        assert generator.label == "log_drift(K=0.5)"

    def test_params_are_recorded(self):
        generator, _ = make_example("kink_violator")
        assert generator.params["a"] == 10.0

    def test_unknown_kind(self):
        with pytest.raises(InvalidParametersError, match="Unknown generator kind 'foo'"):
            make_example("foo")

    def test_unknown_parameter(self):
        with pytest.raises(InvalidParametersError, match="Unknown parameters \\['L'\\]"):
            make_example("log_drift", {"L": 1.0})

    def test_parameter_range(self):
        with pytest.raises(InvalidParametersError, match="epsilon"):
            make_example("log_drift", {"p": 1.2})
        with pytest.raises(InvalidParametersError, match="K must be nonnegative"):
            make_example("log_drift", {"K": -1.0})

    def test_dimensions(self):
        generator, _ = make_example("composite5", {"d": 2, "r": 3})
        assert (generator.dim_d, generator.dim_r) == (2, 3)
        out = generator.evaluate(np.zeros(4), np.ones((4, 1)), np.ones((4, 2)), np.ones((4, 2, 3)))
        assert out.shape == (4, 2)


def test_monotone_certificate():
    generator, _ = make_example("stochastic_monotone", {"c": 2.0, "c0": 1.0})
    process, K_prime = monotone_certificate(generator)
    np.testing.assert_allclose(process(np.zeros(2), np.array([[0.0], [1.5]])), [1.0, 4.0])
    assert K_prime >= 3.0
    with pytest.raises(InvalidParametersError):
        monotone_certificate(make_example("log_drift")[0])


def test_lambda_weight():
    envelope = AssumptionEnvelope(M=ConstantMap(1.0), K=ConstantMap(2.0), gamma=0.25)
    np.testing.assert_allclose(lambda_weight(envelope, 0.0, np.zeros(1)), [10.0])
    with pytest.raises(InvalidEnvelopeError):
        lambda_weight(AssumptionEnvelope(gamma=0.0), 0.0, np.zeros(1))


class TestExampleStructure:
    def test_gh_product_is_monotone_in_y(self):
        generator, _ = make_example("gh_product", {"d": 2})
        rng = np.random.default_rng(0)
        n = 2000
        y, y2 = rng.uniform(-3.0, 3.0, (n, 2)), rng.uniform(-3.0, 3.0, (n, 2))
        z = rng.uniform(-2.0, 2.0, (n, 2, 1))
        t, x = np.zeros(n), np.zeros((n, 1))
        gap = generator.evaluate(t, x, y, z) - generator.evaluate(t, x, y2, z)
        assert np.max(np.sum((y - y2) * gap, axis=1)) <= 1e-12

    def test_gh_product_vanishes_at_zero(self):
        generator, _ = make_example("gh_product", {"d": 2})
        z = np.random.default_rng(1).normal(size=(50, 2, 1))
        out = generator.evaluate(np.zeros(50), np.zeros((50, 1)), np.zeros((50, 2)), z)
        np.testing.assert_array_equal(out, 0.0)

    def test_log_drift_is_continuous_at_zero(self):
        generator, _ = make_example("log_drift", {"d": 2})
        direction = np.array([[0.6, -0.8]])
        scales = 10.0 ** -np.arange(1, 13)
        norms = [
            float(np.linalg.norm(generator.evaluate(0.0, np.zeros((1, 1)), s * direction, np.zeros((1, 2, 1)))))
            for s in scales
        ]
        assert all(a > b for a, b in zip(norms, norms[1:]))
        assert norms[-1] < 1e-10
