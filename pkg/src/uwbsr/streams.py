"""Hierarchically splittable random streams.

A stream is identified by ``(seed, path)``; ``split(i)`` appends ``i`` to the
path. Children depend only on their identity, never on how much of the parent
has been consumed, so results do not depend on scheduling order.
"""

from __future__ import annotations

import numpy as np


class RandomStream:
    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        if seed < 0 or seed >= 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = int(seed)
        self.path = tuple(int(p) for p in path)
        seq = np.random.SeedSequence(self.seed, spawn_key=self.path)
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def split(self, index: int) -> RandomStream:
        return RandomStream(self.seed, self.path + (index,))

    # Pickling transfers the stream identity, not its consumed position.
    def __reduce__(self):
        return (RandomStream, (self.seed, self.path))

    def __repr__(self) -> str:
        return f"RandomStream({self})"

    def __str__(self) -> str:
        return "/".join(str(p) for p in (self.seed,) + self.path)
