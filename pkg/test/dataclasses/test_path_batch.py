# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0
import numpy as np
import pytest

from logbsde_lab.dataclasses.path_batch import PathBatch
from logbsde_lab.dataclasses.time_grid import make_time_grid


@pytest.fixture
def batch():
    grid = make_time_grid(0.0, 1.0, 3)
    rng = np.random.default_rng(0)
    return PathBatch(grid=grid, states=rng.normal(size=(5, 4, 2)), increments=rng.normal(size=(5, 3, 1)), seed=9)


def test_path_batch_properties(batch):
    assert batch.n_paths == 5
    assert batch.dim_k == 2
    assert batch.dim_r == 1
    assert batch.x0.shape == (5, 2)
    np.testing.assert_array_equal(batch.terminal_states, batch.states[:, -1, :])


def test_path_batch_is_read_only(batch):
    with pytest.raises(ValueError):
        batch.states[0, 0, 0] = 1.0


def test_path_batch_dump_load(batch, tmp_path):
    path = tmp_path / "paths.bin"
    batch.dump(path)
    loaded = PathBatch.load(path)
    assert loaded.seed == 9
    np.testing.assert_array_equal(loaded.states, batch.states)
    np.testing.assert_array_equal(loaded.increments, batch.increments)
    np.testing.assert_array_equal(loaded.grid.points, batch.grid.points)


def test_path_batch_load_rejects_other_files(tmp_path):
    path = tmp_path / "other.bin"
    path.write_bytes(b"not a dump at all")
    with pytest.raises(ValueError, match="not a path batch dump"):
        PathBatch.load(path)
