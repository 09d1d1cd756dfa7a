"""Embedding message bits into a random stream.

Message bit ``j`` replaces stream bit ``i``, where the gaps between
successive ``i`` are the key digits, reused cyclically. The stream ends at
the last inserted bit unless extra tail bits are requested.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional

import numpy as np

from .bitstream import BitString
from .entropy import EntropySource, EntropyUnderrun
from .keygen import Key

CONTAINER_MAGIC = b"BARN"
CONTAINER_VERSION = 1
_HEADER = struct.Struct(">4sBQ")


class CipherFormatError(ValueError):
    pass


class MessageRangeError(ValueError):
    """The requested message length needs positions past the end of the cipher."""


class StreamError(RuntimeError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at stream offset {offset})")
        self.offset = offset


def position(key: Key, j: int) -> int:
    """Stream position (1-based) receiving message bit ``j``, in closed form."""
    if j < 1:
        raise ValueError(f"message index must be >= 1, got {j}")
    kappa = key.kappa
    cycles = (j - 1) // kappa
    t = j - cycles * kappa
    return cycles * key.period + sum(key.digits[:t])


class PositionIterator:
    """Yields insertion positions one at a time by stepping through the key."""

    def __init__(self, key: Key):
        self.key = key
        self.j = 0
        self.i = 0

    def __iter__(self) -> "PositionIterator":
        return self

    def __next__(self) -> int:
        k = self.j % self.key.kappa
        self.j += 1
        self.i += self.key.digits[k]
        return self.i


def insertion_positions(key: Key, mu: int) -> list[int]:
    return _positions(key, mu).tolist()


def _positions(key: Key, mu: int) -> np.ndarray:
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    steps = np.resize(np.asarray(key.digits, dtype=np.int64), mu)
    return np.cumsum(steps)


def cipher_length(key: Key, mu: int) -> int:
    if mu < 1:
        raise ValueError(f"mu must be >= 1, got {mu}")
    return position(key, mu)


def max_message_bits(key: Key, n: int) -> int:
    """Largest message length whose last position fits in ``n`` stream bits."""
    full, rest = divmod(n, key.period)
    mu = full * key.kappa
    for d in key.digits:
        if d > rest:
            break
        rest -= d
        mu += 1
    return mu


@dataclass(frozen=True)
class CipherEnvelope:
    cipher: BitString
    message_bits: Optional[int] = None

    def __post_init__(self):
        mu = self.message_bits
        if mu is not None and not 0 <= mu <= len(self.cipher):
            raise CipherFormatError(
                f"message length {mu} cannot fit in a {len(self.cipher)}-bit cipher"
            )

    def to_container(self) -> bytes:
        """Header (magic, version, 64-bit big-endian message length) plus packed bits."""
        if self.message_bits is None:
            raise CipherFormatError("container mode needs the message length")
        payload, _ = self.cipher.to_bytes()
        return _HEADER.pack(CONTAINER_MAGIC, CONTAINER_VERSION, self.message_bits) + payload

    @classmethod
    def from_container(cls, data: bytes) -> "CipherEnvelope":
        if len(data) < _HEADER.size:
            raise CipherFormatError("truncated cipher container")
        magic, version, mu = _HEADER.unpack_from(data)
        if magic != CONTAINER_MAGIC:
            raise CipherFormatError("missing BARN magic bytes")
        if version != CONTAINER_VERSION:
            raise CipherFormatError(f"unsupported container version {version}")
        return cls(BitString.from_bytes(data[_HEADER.size :]), mu)

    def to_raw(self) -> bytes:
        return self.cipher.to_bytes()[0]

    @classmethod
    def from_raw(cls, data: bytes, bit_length: int | None = None) -> "CipherEnvelope":
        return cls(BitString.from_bytes(data, bit_length))

    @staticmethod
    def is_container(data: bytes) -> bool:
        return data[:5] == CONTAINER_MAGIC + bytes([CONTAINER_VERSION])


def encode(
    message: BitString, key: Key, src: EntropySource, *, tail_bits: int = 0
) -> CipherEnvelope:
    """Draw ``cipher_length`` random bits and overwrite the key positions with ``message``.

    ``tail_bits`` extra random bits may be appended so the stream length
    does not give away the message length.
    """
    mu = len(message)
    if mu < 1:
        raise ValueError("message must contain at least one bit")
    if tail_bits < 0:
        raise ValueError("tail_bits must be >= 0")
    pos = _positions(key, mu)
    stream = src.next_bits(int(pos[-1]) + tail_bits).array.copy()
    stream[pos - 1] = message.array
    return CipherEnvelope(BitString._wrap(stream), mu)


def decode(env: CipherEnvelope, key: Key, mu: int | None = None) -> BitString:
    """Extract the message bits.

    ``mu`` falls back to the envelope's recorded length, then to the longest
    message whose positions fit inside the cipher.
    """
    n = len(env.cipher)
    if mu is None:
        mu = env.message_bits
    if mu is None:
        mu = max_message_bits(key, n)
    if mu == 0:
        return BitString()
    pos = _positions(key, mu)
    if pos[-1] > n:
        raise MessageRangeError(
            f"{mu} message bits need {int(pos[-1])} cipher bits, only {n} present"
        )
    return BitString._wrap(env.cipher.array[pos - 1])


def _pull(it: Iterator[int], offset: int) -> Optional[int]:
    try:
        return next(it)
    except StopIteration:
        return None
    except OSError as exc:
        raise StreamError(f"input stream failed: {exc}", offset) from exc


def iter_encode(message: Iterable[int], key: Key, src: EntropySource) -> Iterator[int]:
    """Lazily encode a bit stream: for each message bit, emit the next gap of
    random bits with the last one replaced by the message bit."""
    digits = key.digits
    kappa = key.kappa
    it = iter(message)
    j = 0
    while (bit := _pull(it, j + 1)) is not None:
        gap = digits[j % kappa]
        j += 1
        try:
            chunk = src.next_bits(gap).to_list()
        except EntropyUnderrun as exc:
            raise StreamError(str(exc), j) from exc
        chunk[-1] = bit
        yield from chunk


def iter_decode(cipher: Iterable[int], key: Key) -> Iterator[int]:
    digits = key.digits
    kappa = key.kappa
    it = iter(cipher)
    j = 0
    left = digits[0]
    offset = 0
    while (bit := _pull(it, offset + 1)) is not None:
        offset += 1
        left -= 1
        if left == 0:
            yield bit
            j += 1
            left = digits[j % kappa]


def encode_stream(
    message: Iterable[int],
    key: Key,
    src: EntropySource,
    sink: Callable[[int], object],
) -> int:
    """Push the encoding of ``message`` into ``sink`` bit by bit; returns bits emitted."""
    count = 0
    for bit in iter_encode(message, key, src):
        sink(bit)
        count += 1
    return count


def decode_stream(
    cipher: Iterable[int], key: Key, sink: Callable[[int], object]
) -> int:
    """Push recovered message bits into ``sink``; returns the number recovered."""
    count = 0
    for bit in iter_decode(cipher, key):
        sink(bit)
        count += 1
    return count
