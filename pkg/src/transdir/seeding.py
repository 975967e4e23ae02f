"""Deterministic derived random streams.

Every independent unit of work (a chunking partition, a CV fold, an
experiment cell) gets its own generator derived from the run seed and a
string key, so results do not depend on execution order or parallelism.
"""

import zlib

import numpy as np


def derive_seed(seed, *keys):
    words = [int(seed) & 0xFFFFFFFF] + [zlib.crc32(str(k).encode("utf-8")) for k in keys]
    return int(np.random.SeedSequence(words).generate_state(1)[0])


def derive_rng(seed, *keys):
    return np.random.default_rng(derive_seed(seed, *keys))
