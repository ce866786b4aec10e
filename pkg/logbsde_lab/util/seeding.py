# SPDX-FileCopyrightText: 2022-present deepset GmbH <info@deepset.ai>
#
# SPDX-License-Identifier: Apache-2.0

import hashlib
from typing import Tuple

import numpy as np

_SEED_MASK = (1 << 64) - 1


def derive_seed(master_seed: int, module: str, purpose: str) -> int:
    """
    Derive a child seed from a master seed by labeled hashing.

    Streams depend on the labels only, never on the order in which they are requested.

    :param master_seed:
        The master seed of the experiment.
    :param module:
        Name of the consuming module.
    :param purpose:
        What the stream is used for inside the module.
    :returns:
        A 64-bit seed.
    """
    digest = hashlib.blake2b(
        f"{master_seed & _SEED_MASK}:{module}:{purpose}".encode("utf-8"), digest_size=8
    ).digest()
    return int.from_bytes(digest, "little")


def block_generator(seed: int, block_index: int, stream: Tuple[int, ...] = ()) -> np.random.Generator:
    """
    Counter-based random generator for one block of paths.

    :param seed:
        64-bit seed of the batch.
    :param block_index:
        Index of the path block.
    :param stream:
        Extra spawn key entries separating independent uses of the same seed.
    :returns:
        A Philox-backed numpy generator.
    """
    sequence = np.random.SeedSequence(seed & _SEED_MASK, spawn_key=(*stream, block_index))
    return np.random.Generator(np.random.Philox(sequence))
