"""Deterministic named RNG substreams.

Every random quantity in an experiment flows from one master seed plus a
tuple of string/int labels naming the cell (feeder, method, run,
direction, ...). The label tuple is hashed into extra entropy words for
a ``SeedSequence``, so any cell can be reproduced in isolation and
results do not depend on scheduling or worker count.
"""

from __future__ import annotations

import hashlib

import numpy as np


def seed_sequence(master_seed: int, *labels) -> np.random.SeedSequence:
    digest = hashlib.sha256("/".join(str(x) for x in labels).encode()).digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    return np.random.SeedSequence([int(master_seed)] + words)


def substream(master_seed: int, *labels) -> np.random.Generator:
    """Generator for the experiment cell named by ``labels``."""
    return np.random.default_rng(seed_sequence(master_seed, *labels))
