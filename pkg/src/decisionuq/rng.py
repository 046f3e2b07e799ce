"""Counter-style random streams.

A stream is identified by ``(master_seed, stream_index)`` plus an optional
path of child indices.  The underlying generator is PCG64 seeded through
:class:`numpy.random.SeedSequence` with the index path as ``spawn_key``, so
two streams with the same identity replay the same draws whatever the
thread layout, and distinct identities are statistically independent.
"""
from __future__ import annotations

import numpy as np

_U64 = 2**64


class RngStream:
    """Deterministic random stream.

    Parameters
    ----------
    master_seed : int
        64-bit unsigned master seed.
    stream_index : int
        64-bit unsigned stream index.
    path : tuple of int, optional
        Extra derivation path, set by :meth:`child`.

    Notes
    -----
    The generator is created lazily and then advanced by every draw.  Do not
    share one stream between concurrent consumers; derive one per task with
    :meth:`child`.
    """

    __slots__ = ("master_seed", "stream_index", "path", "_gen")

    def __init__(self, master_seed: int, stream_index: int = 0, path: tuple[int, ...] = ()):
        for name, v in (("master_seed", master_seed), ("stream_index", stream_index)):
            if not (0 <= int(v) < _U64):
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {v}")
        self.master_seed = int(master_seed)
        self.stream_index = int(stream_index)
        self.path = tuple(int(p) for p in path)
        self._gen = None

    @property
    def key(self) -> tuple[int, ...]:
        return (self.stream_index,) + self.path

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(entropy=self.master_seed, spawn_key=self.key)
            self._gen = np.random.Generator(np.random.PCG64(ss))
        return self._gen

    def child(self, index: int) -> "RngStream":
        """Fresh independent stream derived from this one's identity (not its state)."""
        return RngStream(self.master_seed, self.stream_index, self.path + (int(index),))

    def fresh(self) -> "RngStream":
        """Same identity, rewound to the start of the sequence."""
        return RngStream(self.master_seed, self.stream_index, self.path)

    def __repr__(self) -> str:
        return f"RngStream(master_seed={self.master_seed}, stream_index={self.stream_index}, path={self.path})"


def as_generator(rng) -> np.random.Generator:
    """Accept an :class:`RngStream`, a numpy ``Generator`` or an integer seed."""
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator
    raise TypeError(f"cannot build a random generator from {type(rng).__name__}")


def shard_streams(rng, count: int, shard_size: int):
    """Split ``count`` draws into ``(stream, size)`` shards.

    An :class:`RngStream` yields child streams ``0, 1, ...`` so results are
    independent of how shards are scheduled; a bare generator is one shard.
    """
    if isinstance(rng, RngStream):
        return [(rng.child(k), min(shard_size, count - s)) for k, s in enumerate(range(0, count, shard_size))]
    return [(as_generator(rng), count)]
