# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0
import numpy as np
import pytest

from logbsde_lab.dataclasses.time_grid import TimeGrid, make_time_grid
from logbsde_lab.errors import InvalidIntervalError, InvalidResolutionError


def test_make_time_grid_uniform():
    grid = make_time_grid(0.0, 1.0, 4)
    np.testing.assert_allclose(grid.points, [0.0, 0.25, 0.5, 0.75, 1.0])
    assert grid.n_steps == 4
    np.testing.assert_allclose(grid.dt, 0.25)
    assert grid.points[-1] == 1.0


def test_make_time_grid_degenerate():
    grid = make_time_grid(0.5, 0.5, 10)
    assert grid.is_degenerate
    assert grid.n_steps == 0
    np.testing.assert_array_equal(grid.points, [0.5])


def test_make_time_grid_rejects_reversed_interval():
    with pytest.raises(InvalidIntervalError, match="before t0"):
        make_time_grid(1.0, 0.0, 10)


def test_make_time_grid_rejects_zero_steps():
    with pytest.raises(InvalidResolutionError):
        make_time_grid(0.0, 1.0, 0)


def test_time_grid_rejects_unsorted_points():
    with pytest.raises(InvalidIntervalError, match="strictly increasing"):
        TimeGrid(t0=0.0, T=1.0, points=np.array([0.0, 0.7, 0.3, 1.0]))


def test_time_grid_points_are_read_only():
    grid = make_time_grid(0.0, 1.0, 2)
    with pytest.raises(ValueError):
        grid.points[0] = 3.0


def test_time_grid_to_from_dict():
    grid = make_time_grid(0.0, 2.0, 8)
    data = grid.to_dict()
    assert data == {"t0": 0.0, "T": 2.0, "n_steps": 8}
    np.testing.assert_array_equal(TimeGrid.from_dict(data).points, grid.points)
