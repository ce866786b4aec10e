# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0
import numpy as np
import pytest

from logbsde_lab.dataclasses.envelope import AssumptionEnvelope, ConstantMap
from logbsde_lab.dataclasses.generator import Generator
from logbsde_lab.errors import InvalidEnvelopeError, InvalidParametersError


class TestAssumptionEnvelope:
    def test_defaults_validate(self):
        envelope = AssumptionEnvelope()
        assert envelope.validate() is envelope

    def test_gamma_out_of_range(self):
        with pytest.raises(InvalidEnvelopeError, match="gamma"):
            AssumptionEnvelope(p=1.5, gamma=0.3).validate()

    def test_alpha_must_stay_below_p(self):
        with pytest.raises(InvalidEnvelopeError, match="alpha"):
            AssumptionEnvelope(p=2.0, alpha=2.5).validate()

    def test_sequence_must_be_dominated_by_power(self):
        with pytest.raises(InvalidEnvelopeError, match="N\\^mu"):
            AssumptionEnvelope(A=lambda level: level**2, mu=1.0).validate()

    def test_with_gamma(self):
        envelope = AssumptionEnvelope().with_gamma(0.1)
        assert envelope.gamma == 0.1

    def test_lambda_bar(self):
        envelope = AssumptionEnvelope(eta=ConstantMap(1.0), eta_bar=ConstantMap(2.0))
        t = np.zeros(3)
        x = np.zeros((3, 1))
        np.testing.assert_allclose(envelope.lambda_bar(t, x, np.full(3, 0.5)), 5.0)


class TestGenerator:
    def test_evaluate_point(self):
        generator = Generator(1, 1, lambda t, x, y, z: -y, "neg", z_free=True, x_free=True)
        np.testing.assert_allclose(generator.evaluate_point(0.0, 0.0, 2.0), [-2.0])

    def test_evaluate_broadcasts_constant_output(self):
        generator = Generator(2, 1, lambda t, x, y, z: np.array(1.0), "one")
        out = generator.evaluate(0.0, np.zeros((4, 1)), np.zeros((4, 2)), np.zeros((4, 2, 1)))
        assert out.shape == (4, 2)
        np.testing.assert_array_equal(out, 1.0)

    def test_rejects_bad_dimensions(self):
        with pytest.raises(InvalidParametersError):
            Generator(0, 1, lambda t, x, y, z: y, "bad")

    def test_custom_generator_cannot_be_serialized(self):
        with pytest.raises(ValueError, match="not a library kind"):
            Generator(1, 1, lambda t, x, y, z: y, "custom").to_dict()

    def test_library_generator_round_trip(self):
        original = Generator.from_dict({"kind": "log_drift", "params": {"K": 0.5}})
        rebuilt = Generator.from_dict(original.to_dict())
        y = np.array([[0.5], [2.0]])
        np.testing.assert_allclose(
            rebuilt.evaluate(0.0, np.zeros((2, 1)), y, np.zeros((2, 1, 1))),
            original.evaluate(0.0, np.zeros((2, 1)), y, np.zeros((2, 1, 1))),
        )
