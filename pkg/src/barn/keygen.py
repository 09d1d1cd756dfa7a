"""Key derivation from random bits.

A key is a list of non-zero digits in one of five counting systems. Digits
are cut from a random bit string in fixed-width chunks; a chunk whose value
is zero or not below the radix is thrown away and the next chunk is read.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .bitstream import BitString
from .entropy import EntropySource

KEY_FILE_MAGIC = "BARN-KEY 1"


class InvalidKey(ValueError):
    """Base for invalid keys and key files."""


class InsufficientEntropy(InvalidKey):
    pass


class DegenerateKey(InvalidKey):
    """Every digit is 1; such a key would copy the message verbatim."""


class Base(enum.Enum):
    TERNARY = (3, 2)
    QUATERNARY = (4, 2)
    OCTAL = (8, 3)
    DECIMAL = (10, 4)
    HEXADECIMAL = (16, 4)

    def __init__(self, radix: int, chunk_bits: int):
        self.radix = radix
        self.chunk_bits = chunk_bits

    @property
    def valid_digits(self) -> range:
        return range(1, self.radix)

    @property
    def efficiency(self) -> Fraction:
        """Fraction of chunks that yield a usable digit."""
        return Fraction(self.radix - 1, 2**self.chunk_bits)

    @classmethod
    def from_radix(cls, radix: int) -> "Base":
        for base in cls:
            if base.radix == radix:
                return base
        raise ValueError(f"unsupported radix {radix}; choose one of 3, 4, 8, 10, 16")

    @classmethod
    def parse(cls, text: str) -> "Base":
        """Accept a radix (``"4"``) or a name (``"quaternary"``)."""
        text = text.strip().lower()
        if text.isdigit():
            return cls.from_radix(int(text))
        try:
            return cls[text.upper()]
        except KeyError:
            raise ValueError(f"unknown base {text!r}") from None


@dataclass(frozen=True)
class Key:
    base: Base
    digits: tuple[int, ...]

    def __init__(self, base: Base, digits: Iterable[int], *, _check: bool = True):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "digits", tuple(int(d) for d in digits))
        if _check:
            self.validate()

    @classmethod
    def unchecked(cls, base: Base, digits: Iterable[int]) -> "Key":
        """Build a key without the non-degeneracy rules. Test use only."""
        return cls(base, digits, _check=False)

    def validate(self) -> None:
        if not self.digits:
            raise InvalidKey("a key needs at least one digit")
        bad = [d for d in self.digits if d not in self.base.valid_digits]
        if bad:
            raise InvalidKey(
                f"digits {bad} outside 1..{self.base.radix - 1} for {self.base.name.lower()}"
            )
        if all(d == 1 for d in self.digits):
            raise DegenerateKey("a key made only of ones is not allowed")

    @property
    def kappa(self) -> int:
        return len(self.digits)

    @property
    def period(self) -> int:
        """Stream bits consumed by one full pass over the key."""
        return sum(self.digits)

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.digits)) + "}"

    def dumps(self) -> str:
        return f"{KEY_FILE_MAGIC}\n{self.base.radix}\n{' '.join(map(str, self.digits))}\n"

    @classmethod
    def loads(cls, text: str) -> "Key":
        lines = text.splitlines()
        if len(lines) < 3 or lines[0].strip() != KEY_FILE_MAGIC:
            raise InvalidKey(f"not a key file (expected {KEY_FILE_MAGIC!r} header)")
        if any(line.strip() for line in lines[3:]):
            raise InvalidKey("trailing content after key digits")
        try:
            base = Base.from_radix(int(lines[1]))
            digits = [int(tok) for tok in lines[2].split()]
        except ValueError as exc:
            raise InvalidKey(f"malformed key file: {exc}") from None
        return cls(base, digits)

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.dumps(), encoding="ascii", newline="\n")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Key":
        return cls.loads(Path(path).read_text(encoding="ascii"))


def chunk_digits(bits: BitString, base: Base) -> list[int]:
    """Valid digits in ``bits``, read chunk by chunk, invalid chunks dropped."""
    w = base.chunk_bits
    n = len(bits) // w
    if n == 0:
        return []
    chunks = bits.array[: n * w].reshape(n, w)
    weights = 1 << np.arange(w - 1, -1, -1)
    values = chunks.astype(np.int64) @ weights
    keep = (values >= 1) & (values < base.radix)
    return values[keep].tolist()


def derive_key(bits: BitString, base: Base) -> Key:
    if len(bits) < base.chunk_bits:
        raise InsufficientEntropy(
            f"need at least {base.chunk_bits} bits for a {base.name.lower()} digit"
        )
    digits = chunk_digits(bits, base)
    if not digits:
        raise InsufficientEntropy(f"no valid digits in {len(bits)} bits; supply more")
    if all(d == 1 for d in digits):
        raise DegenerateKey(
            f"derived key is all ones ({len(digits)} digits); supply more bits"
        )
    return Key(base, digits)


def _draw_digit(src: EntropySource, base: Base) -> int:
    while True:
        chunk = src.next_bits(base.chunk_bits).array
        value = int(chunk @ (1 << np.arange(base.chunk_bits - 1, -1, -1)))
        if 1 <= value < base.radix:
            return value


def derive_key_exact(src: EntropySource, base: Base, kappa: int) -> Key:
    """Draw chunks from ``src`` until ``kappa`` valid digits are collected.

    If the result is all ones, the last digit is redrawn until it is not 1.
    """
    if kappa < 1:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    digits = [_draw_digit(src, base) for _ in range(kappa)]
    while all(d == 1 for d in digits):
        digits[-1] = _draw_digit(src, base)
    return Key(base, digits)


def expected_element_count(base: Base, key_bits: int) -> int:
    """Average digit count obtainable from ``key_bits`` random bits, floored."""
    if key_bits < base.chunk_bits:
        raise ValueError(f"key_bits must be >= {base.chunk_bits}")
    mean = Fraction(key_bits, base.chunk_bits) * base.efficiency
    return mean.numerator // mean.denominator
