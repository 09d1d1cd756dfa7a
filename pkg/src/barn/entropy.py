"""Random-bit sources.

The cipher only ever calls ``next_bits(n)``; any object with that method
works as a source. Three are provided: the operating system's CSPRNG, a file
of pre-captured bits (e.g. a dump from a hardware generator), and a seeded
xorshift64* generator whose output is fixed bit-for-bit for tests.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Protocol, Union, runtime_checkable

import numpy as np

from .bitstream import BitString

MASK64 = (1 << 64) - 1
ZERO_SEED_REMAP = 0x9E3779B97F4A7C15
XORSHIFT_MULTIPLIER = 2685821657736338717


class EntropyUnderrun(RuntimeError):
    """A finite source cannot supply the requested bits."""

    def __init__(self, requested: int, remaining: int):
        super().__init__(
            f"entropy underrun: requested {requested} bits, {remaining} remaining"
        )
        self.requested = requested
        self.remaining = remaining


@runtime_checkable
class EntropySource(Protocol):
    def next_bits(self, n: int) -> BitString: ...


class _BufferedSource:
    """Serves bits from an internal buffer refilled in whole bytes."""

    min_refill = 64

    def __init__(self) -> None:
        self._buf = np.empty(0, dtype=np.uint8)
        self._pos = 0

    def _refill(self, nbytes: int) -> bytes:
        raise NotImplementedError

    def next_bits(self, n: int) -> BitString:
        if n < 0:
            raise ValueError(f"n must be >= 0, got {n}")
        have = len(self._buf) - self._pos
        if have < n:
            need = n - have
            raw = self._refill(max((need + 7) // 8, self.min_refill))
            fresh = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))
            self._buf = np.concatenate([self._buf[self._pos :], fresh])
            self._pos = 0
        out = self._buf[self._pos : self._pos + n].copy()
        self._pos += n
        return BitString._wrap(out)


class SeededSource(_BufferedSource):
    """Deterministic xorshift64* generator.

    Output words are serialised big-endian and read MSB-first, so the bit
    stream for a given seed is identical on every platform.
    """

    def __init__(self, seed: int):
        super().__init__()
        if not 0 <= seed <= MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.seed = seed
        self.state = seed or ZERO_SEED_REMAP

    def next_word(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * XORSHIFT_MULTIPLIER) & MASK64

    def _refill(self, nbytes: int) -> bytes:
        words = (nbytes + 7) // 8
        # Whole words only; leftover bits stay buffered for the next call.
        return b"".join(self.next_word().to_bytes(8, "big") for _ in range(words))


class OSSource(_BufferedSource):
    def _refill(self, nbytes: int) -> bytes:
        return os.urandom(nbytes)


class FileSource:
    """Serves the bits of a file in order and raises on exhaustion."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self._bits = BitString.from_bytes(self.path.read_bytes()).array
        self._pos = 0

    @property
    def remaining(self) -> int:
        return len(self._bits) - self._pos

    def next_bits(self, n: int) -> BitString:
        if n < 0:
            raise ValueError(f"n must be >= 0, got {n}")
        if n > self.remaining:
            raise EntropyUnderrun(n, self.remaining)
        out = self._bits[self._pos : self._pos + n].copy()
        self._pos += n
        return BitString._wrap(out)


def os_source() -> OSSource:
    return OSSource()


def file_source(path: Union[str, Path]) -> FileSource:
    return FileSource(path)


def seeded_source(seed: int) -> SeededSource:
    return SeededSource(seed)


def parse_source(spec: str) -> EntropySource:
    """Build a source from ``os``, ``seed:<u64>`` or ``file:<path>``."""
    if spec == "os":
        return os_source()
    kind, sep, arg = spec.partition(":")
    if sep and kind == "seed":
        try:
            return seeded_source(int(arg, 0))
        except ValueError as exc:
            raise ValueError(f"bad seed in source spec {spec!r}: {exc}") from None
    if sep and kind == "file" and arg:
        return file_source(arg)
    raise ValueError(f"unknown entropy source {spec!r}; use os, seed:N or file:PATH")
