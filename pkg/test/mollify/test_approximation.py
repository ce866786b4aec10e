# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0
import numpy as np
import pytest

from logbsde_lab.dataclasses.reports import Verdict
from logbsde_lab.errors import InvalidParametersError, UnsupportedDimensionError
from logbsde_lab.generators.examples import make_example
from logbsde_lab.mollify.approximation import ApproxGenerator, default_weight, mollify_generator, truncate_terminal
from logbsde_lab.mollify.certification import verify_approx_properties


def test_truncate_terminal():
    np.testing.assert_array_equal(truncate_terminal(np.array([[0.5], [2.0], [-1.0]]), 1.0), [[0.5], [0.0], [-1.0]])
    np.testing.assert_array_equal(truncate_terminal(np.array([3.0, 4.0]), 5.0), [3.0, 4.0])
    with pytest.raises(InvalidParametersError):
        truncate_terminal(np.ones(1), 0.5)


def test_default_weight():
    np.testing.assert_allclose(default_weight(np.zeros(2), np.array([[0.0], [-2.0]])), [1.0, np.exp(-2.0)])


class TestApproxGenerator:
    def test_constant_is_reproduced_at_the_origin(self):
        generator, envelope = make_example("constant", {"c": 1.0})
        f_n = mollify_generator(generator, envelope, 4.0, h=1.0)
        np.testing.assert_allclose(f_n.evaluate_point(0.0, 0.0, 0.0), [1.0])

    def test_inactive_below_the_level(self):
        generator, envelope = make_example("constant", {"c": 1.0})
        f_n = mollify_generator(generator, envelope, 2.0, h=1.0)
        np.testing.assert_array_equal(f_n.evaluate_point(0.0, 0.0, 0.0), [0.0])
        assert not f_n.active(np.zeros(1), np.zeros((1, 1)))[0]

    def test_vanishes_outside_the_ball(self):
        generator, envelope = make_example("constant", {"c": 1.0})
        f_n = mollify_generator(generator, envelope, 4.0, h=1.0)
        np.testing.assert_array_equal(f_n.evaluate_point(0.0, 0.0, 4.5), [0.0])

    def test_close_to_a_linear_driver(self):
        generator, envelope = make_example("linear", {"rate": 0.5})
        f_n = mollify_generator(generator, envelope, 16.0)
        y = np.array([[-0.3], [0.1], [0.8]])
        values = f_n.evaluate(np.zeros(3), np.zeros((3, 1)), y, np.zeros((3, 1, 1)))
        np.testing.assert_allclose(values, -0.5 * y, rtol=1e-2)

    def test_scale(self):
        generator, envelope = make_example("zero")
        f_n = mollify_generator(generator, envelope, 2.0, h=0.5)
        np.testing.assert_allclose(f_n.scale(np.zeros(1), np.zeros((1, 1))), [2.0**4 / 0.5])

    def test_invalid_arguments(self):
        generator, envelope = make_example("zero")
        with pytest.raises(InvalidParametersError):
            mollify_generator(generator, envelope, 0.5)
        with pytest.raises(InvalidParametersError):
            mollify_generator(generator, envelope, 2.0, h=2.0)

    def test_too_many_axes(self):
        generator, envelope = make_example("composite5", {"d": 2, "r": 3})
        with pytest.raises(UnsupportedDimensionError):
            mollify_generator(generator, envelope, 2.0)

    def test_serialization(self):
        generator, envelope = make_example("linear", {"rate": 0.5})
        f_n = mollify_generator(generator, envelope, 8.0, h=0.5, quad_nodes=8)
        data = f_n.to_dict()
        assert data["n"] == 8.0
        assert data["h"] == 0.5
        restored = ApproxGenerator.from_dict(data)
        np.testing.assert_allclose(restored.evaluate_point(0.0, 0.0, 0.7), f_n.evaluate_point(0.0, 0.0, 0.7))

    def test_custom_weight_is_not_serializable(self):
        generator, envelope = make_example("zero")
        f_n = mollify_generator(generator, envelope, 2.0, h=lambda t, x: np.ones(len(t)))
        with pytest.raises(ValueError):
            f_n.to_dict()


class TestVerifyApproxProperties:
    def test_linear_driver_schedule(self):
        generator, envelope = make_example("linear", {"rate": 0.5})
        report = verify_approx_properties(
            generator, envelope, [4, 8], n_samples=200, lipschitz_samples=200, threshold=1.0
        )
        assert report.verdict == Verdict.PASS
        assert report.rho_strictly_decreasing
        assert len(report.rows) == 2
        assert report.rho[1] < report.rho[0]
        assert all(row["growth_violations"] == 0 for row in report.rows)
        assert report.to_dict()["verdict"] == "pass"

    def test_threshold_decides(self):
        generator, envelope = make_example("linear", {"rate": 0.5})
        report = verify_approx_properties(
            generator, envelope, [4], n_samples=50, lipschitz_samples=50, threshold=1e-6
        )
        assert report.verdict == Verdict.FAIL

    def test_schedule_must_increase(self):
        generator, envelope = make_example("zero")
        with pytest.raises(InvalidParametersError):
            verify_approx_properties(generator, envelope, [8, 4])
        with pytest.raises(InvalidParametersError):
            verify_approx_properties(generator, envelope, [])


@pytest.mark.parametrize(
    "kind, z",
    [("log_drift", np.zeros((4, 1, 1))), ("gh_product", np.full((4, 1, 1), 0.3))],
    ids=["log_drift", "gh_product"],
)
def test_quadrature_converges_in_the_node_count(kind, z):
    generator, envelope = make_example(kind)
    coarse = mollify_generator(generator, envelope, 8.0, h=1.0, quad_nodes=16)
    fine = mollify_generator(generator, envelope, 8.0, h=1.0, quad_nodes=32)
    t, x, y = np.zeros(4), np.zeros((4, 1)), np.array([[-2.0], [-0.5], [0.3], [1.5]])
    assert coarse.active(t, x).all()
    coarse_values = coarse.evaluate(t, x, y, z)
    assert np.all(coarse_values != 0.0)
    np.testing.assert_allclose(coarse_values, fine.evaluate(t, x, y, z), atol=1e-6)
