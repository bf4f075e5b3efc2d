"""Seeded uniform streams.

Every repetition of an experiment owns one ``RngStream`` derived from
``(root_seed, repetition)``, so results never depend on how repetitions are
scheduled. ``StreamBank`` serves a batch of streams to the vectorized swarm
engine; it pulls contiguous chunks from each stream, which yields exactly the
same draw sequence as drawing one value at a time.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

DEFAULT_SEED = 20130517


class RngStream:
    """Independent uniform [0, 1) draws from a PCG64 generator."""

    def __init__(self, seed: int, key: Sequence[int] = ()):
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.key)
        self._gen = np.random.Generator(np.random.PCG64(ss))

    @classmethod
    def for_repetition(cls, seed: int, rep: int) -> RngStream:
        return cls(seed, (rep,))

    def uniform(self, k: int) -> np.ndarray:
        return self._gen.random(k)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, key={self.key})"


class StreamBank:
    """Row-per-stream buffer of uniforms with an independent cursor per row.

    The bank takes ownership of its streams: once a stream is in a bank it
    should not be drawn from directly.
    """

    def __init__(self, streams: Sequence[RngStream], chunk: int = 2048):
        if not streams:
            raise ValueError("StreamBank needs at least one stream")
        self.streams = list(streams)
        self.chunk = int(chunk)
        self._buf = np.empty((len(self.streams), 0))
        self._cur = np.zeros(len(self.streams), dtype=np.int64)
        self._cols = np.arange(0)

    @classmethod
    def coerce(cls, rng: RngStream | StreamBank | Sequence[RngStream]) -> StreamBank:
        if isinstance(rng, StreamBank):
            return rng
        if isinstance(rng, RngStream):
            return cls([rng])
        return cls(list(rng))

    def __len__(self) -> int:
        return len(self.streams)

    def _ensure(self, width: int) -> None:
        if self._buf.shape[1] - int(self._cur.max()) >= width:
            return
        size = max(self.chunk, 4 * width)
        fresh = np.empty((len(self.streams), size))
        for b, stream in enumerate(self.streams):
            rest = self._buf[b, self._cur[b]:]
            fresh[b, : rest.size] = rest
            fresh[b, rest.size:] = stream.uniform(size - rest.size)
        self._buf = fresh
        self._cur[:] = 0

    def draw(self, width: int, counts: np.ndarray | None = None) -> np.ndarray:
        """Return a ``(streams, width)`` block of the next draws of each stream.

        Row ``b`` advances by ``counts[b]`` (default ``width``); values past
        ``counts[b]`` in that row are peeked, not consumed.
        """
        self._ensure(width)
        if self._cols.size != width:
            self._cols = np.arange(width)
        idx = self._cur[:, None] + self._cols
        out = np.take_along_axis(self._buf, idx, axis=1)
        if counts is None:
            self._cur += width
        else:
            self._cur += counts
        return out
