"""Immutable, 1-indexed bit sequences with MSB-first byte packing."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Iterator, Union

import numpy as np


class BitLengthError(ValueError):
    """Requested more bits than the byte data holds."""


class BitString:
    """An ordered, immutable sequence of bits.

    Public indexing is 1-based: ``s.get(1)`` is the first bit. Storage is a
    read-only ``uint8`` numpy array of zeros and ones, exposed as ``.array``
    for vectorised consumers.
    """

    __slots__ = ("_bits",)

    def __init__(self, bits: Union[Iterable[int], np.ndarray] = ()):
        arr = np.array(bits, dtype=np.uint8).reshape(-1)
        if arr.size and arr.max() > 1:
            raise ValueError("bits must be 0 or 1")
        arr.flags.writeable = False
        self._bits = arr

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "BitString":
        # Trusted fast path: arr is already a fresh 0/1 uint8 array.
        obj = cls.__new__(cls)
        arr.flags.writeable = False
        obj._bits = arr
        return obj

    @classmethod
    def from_bytes(cls, data: bytes, bit_length: int | None = None) -> "BitString":
        """Unpack ``data`` MSB-first, keeping the first ``bit_length`` bits.

        ``bit_length`` defaults to every bit of ``data``.
        """
        available = 8 * len(data)
        if bit_length is None:
            bit_length = available
        if bit_length < 0:
            raise BitLengthError(f"bit_length must be >= 0, got {bit_length}")
        if bit_length > available:
            raise BitLengthError(
                f"bit_length {bit_length} exceeds the {available} bits available"
            )
        arr = np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8))[:bit_length]
        return cls._wrap(arr.copy())

    @classmethod
    def from_str(cls, text: str) -> "BitString":
        """Parse a string such as ``"1110001101"``; spaces are ignored."""
        text = text.replace(" ", "")
        if set(text) - {"0", "1"}:
            raise ValueError(f"not a bit string: {text!r}")
        return cls._wrap(np.frombuffer(text.encode(), dtype=np.uint8) - ord("0"))

    @classmethod
    def concat(cls, parts: Iterable["BitString"]) -> "BitString":
        arrays = [p._bits for p in parts]
        if not arrays:
            return cls()
        return cls._wrap(np.concatenate(arrays))

    def to_bytes(self) -> tuple[bytes, int]:
        """Pack MSB-first; a final partial byte is zero-padded on the low side."""
        return np.packbits(self._bits).tobytes(), len(self._bits)

    @property
    def array(self) -> np.ndarray:
        return self._bits

    def _check(self, i: int) -> None:
        if not 1 <= i <= len(self._bits):
            raise IndexError(f"bit index {i} outside 1..{len(self._bits)}")

    def get(self, i: int) -> int:
        self._check(i)
        return int(self._bits[i - 1])

    def set(self, i: int, b: int) -> "BitString":
        """Return a copy with bit ``i`` (1-based) replaced by ``b``."""
        self._check(i)
        if b not in (0, 1):
            raise ValueError(f"bit must be 0 or 1, got {b!r}")
        arr = self._bits.copy()
        arr[i - 1] = b
        return BitString._wrap(arr)

    def slice(self, start: int, stop: int) -> "BitString":
        """Bits ``start..stop`` inclusive, 1-based."""
        if start < 1 or stop > len(self._bits) or stop < start - 1:
            raise IndexError(f"slice {start}..{stop} outside 1..{len(self._bits)}")
        return BitString._wrap(self._bits[start - 1 : stop].copy())

    def head(self, n: int) -> "BitString":
        return self.slice(1, min(n, len(self._bits)))

    def count_ones(self) -> int:
        return int(np.count_nonzero(self._bits))

    def to_list(self) -> list[int]:
        return self._bits.tolist()

    def __len__(self) -> int:
        return len(self._bits)

    def __iter__(self) -> Iterator[int]:
        return iter(self._bits.tolist())

    def __add__(self, other: "BitString") -> "BitString":
        if not isinstance(other, BitString):
            return NotImplemented
        return BitString._wrap(np.concatenate([self._bits, other._bits]))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, BitString):
            return np.array_equal(self._bits, other._bits)
        if isinstance(other, (list, tuple)):
            return self.to_list() == list(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((len(self._bits), self._bits.tobytes()))

    def __str__(self) -> str:
        return (self._bits + ord("0")).tobytes().decode()

    def __repr__(self) -> str:
        text = str(self)
        if len(text) > 64:
            text = text[:64] + "..."
        return f"BitString('{text}', length={len(self)})"


def read_bits(path: Union[str, Path], bit_length: int | None = None) -> BitString:
    return BitString.from_bytes(Path(path).read_bytes(), bit_length)


def write_bits(path: Union[str, Path], bits: BitString) -> int:
    """Write packed bits to ``path``; returns the bit length, which the file does not record."""
    data, n = bits.to_bytes()
    Path(path).write_bytes(data)
    return n
