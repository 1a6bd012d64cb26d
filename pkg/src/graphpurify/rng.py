"""Deterministic random-stream derivation.

Every stochastic routine in the package draws from a stream derived here.
Streams are keyed by (seed, *key) so that independent pieces of work —
chunks of a Monte Carlo run, rounds of a protocol — get independent,
reproducible generators regardless of execution order or worker count.
"""

from __future__ import annotations

import random

import numpy as np


def derive_rng(seed: int, *key: int | str) -> random.Random:
    """Return a ``random.Random`` for the stream named by ``key`` under ``seed``.

    The same (seed, key) always yields an identical generator; distinct keys
    yield statistically independent ones.
    """
    spawn_key = tuple(_as_word(k) for k in key)
    ss = np.random.SeedSequence(entropy=seed, spawn_key=spawn_key)
    # 128 bits of state material is plenty for random.Random.
    material = int.from_bytes(ss.generate_state(4, dtype=np.uint32).tobytes(), "little")
    return random.Random(material)


def derive_seed(seed: int, *key: int | str) -> int:
    """A 64-bit integer sub-seed for the stream named by ``key``.

    Used where a routine needs an integer seed of its own (so it can derive
    further sub-streams) rather than a generator.
    """
    spawn_key = tuple(_as_word(k) for k in key)
    ss = np.random.SeedSequence(entropy=seed, spawn_key=spawn_key)
    return int.from_bytes(ss.generate_state(2, dtype=np.uint32).tobytes(), "little")


def _as_word(k: int | str) -> int:
    if isinstance(k, int):
        if k < 0:
            raise ValueError("spawn key parts must be non-negative")
        return k
    # Stable string -> int folding; SeedSequence spawn keys must be ints.
    acc = 0
    for ch in k.encode("utf-8"):
        acc = (acc * 257 + ch) % (2**63)
    return acc
