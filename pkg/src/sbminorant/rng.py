"""Counter-based, index-splittable random streams.

A :class:`RngStream` is a value: the pair ``(seed, stream)`` names a Philox
key, so the same pair always reproduces the same draws and different stream
indices give independent streams. Samplers accept either a stream or an
already-advanced :class:`numpy.random.Generator`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RngStream", "as_generator"]


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream: int = 0
    path: tuple = ()

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        if int(self.stream) < 0:
            raise ValueError("stream index must be non-negative")

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of this stream."""
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream), *self.path))
        return np.random.Generator(np.random.Philox(ss))

    def substream(self, index: int) -> "RngStream":
        """Derive a child stream, disjoint from its parent and its siblings."""
        return RngStream(self.seed, self.stream, self.path + (int(index),))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if rng is None:
        raise TypeError("an RngStream or numpy Generator is required")
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator()
    raise TypeError(f"cannot build a generator from {type(rng).__name__}")
