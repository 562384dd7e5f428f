"""Reproducible random streams.

Every stream is a Philox (counter-based) generator keyed by the user seed and
an operation tag, so results do not depend on call order or scheduling.
"""
import zlib

import numpy as np


def _tag_key(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


def stream(seed: int, tag: str, *path: int) -> np.random.Generator:
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, _tag_key(tag), *map(int, path)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
