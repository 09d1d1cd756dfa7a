"""Key-space arithmetic, brute-force search, randomness checks and sizing."""

from __future__ import annotations

import csv
import io
import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .bitstream import BitString
from .cipher import CipherEnvelope, max_message_bits
from .keygen import Base, Key, expected_element_count

SECONDS_PER_YEAR = 31_557_600  # 365.25 days
KEY_BITS = (64, 128, 256, 512, 1024)
DEFAULT_MAX_KEYS = 2**24

# Alphanumerics plus a few brackets and the full stop, counted as 7-bit codes.
BASIC_ASCII = (
    "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    "abcdefghijklmnopqrstuvwxyz"
    "0123456789"
    "()[]{}."
)

# Cells whose commonly quoted value disagrees with the exact computation.
TABLE_ERRATA = {("bits", Base.DECIMAL, 512): 128}


class InsufficientData(ValueError):
    pass


class KeySpaceTooLarge(RuntimeError):
    def __init__(self, count: int, cap: int):
        super().__init__(
            f"refusing to enumerate {count} keys (cap is {cap}); raise --max-keys or lower kappa"
        )
        self.count = count
        self.cap = cap


@dataclass(frozen=True)
class KeySpaceReport:
    base: Base
    kappa: int
    permutations: int
    bits: int
    derived_from_key_bits: Optional[int] = None

    @property
    def scientific(self) -> str:
        return sci(self.permutations)


def key_space(
    base: Base, kappa: int | None = None, *, key_bits: int | None = None
) -> KeySpaceReport:
    """Exact count of ``kappa``-digit keys, ``(radix-1)**kappa``.

    Pass ``key_bits`` instead to use the average digit count that many
    random bits yield.
    """
    if (kappa is None) == (key_bits is None):
        raise ValueError("give exactly one of kappa or key_bits")
    if key_bits is not None:
        kappa = expected_element_count(base, key_bits)
    if kappa < 1:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    n = (base.radix - 1) ** kappa
    return KeySpaceReport(base, kappa, n, n.bit_length() - 1, key_bits)


def sci(n: int, digits: int = 3) -> str:
    """Render a non-negative integer as ``d.ddE+eee``, rounding half up, exactly."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return "0." + "0" * (digits - 1) + "E+000"
    exp = len(str(n)) - 1
    shift = exp - (digits - 1)
    if shift > 0:
        q, r = divmod(n, 10**shift)
        if 2 * r >= 10**shift:
            q += 1
    else:
        q = n * 10**-shift
    if q == 10**digits:
        q //= 10
        exp += 1
    mant = str(q)
    return f"{mant[0]}.{mant[1:]}E+{exp:03d}"


def expansion_factor(base: Base) -> Fraction:
    """Mean key digit, i.e. the expected cipher-to-message length ratio."""
    return Fraction(base.radix, 2)


def attack_time_estimate(
    report: Union[KeySpaceReport, int], keys_per_second: Union[int, Fraction]
) -> Fraction:
    """Seconds to try every key at the given rate, as an exact fraction."""
    if keys_per_second <= 0:
        raise ValueError("keys_per_second must be positive")
    count = report.permutations if isinstance(report, KeySpaceReport) else report
    return Fraction(count) / Fraction(keys_per_second)


def seconds_to_years(seconds: Fraction) -> Fraction:
    return Fraction(seconds) / SECONDS_PER_YEAR


def format_duration(seconds: Fraction) -> str:
    years = seconds_to_years(seconds)
    if years >= 1:
        return f"{float(years):.4g} years"
    return f"{float(seconds):.4g} s"


# -- brute force -------------------------------------------------------------


class KnownPlaintext:
    """Accepts an extraction that starts with the known message bits."""

    def __init__(self, known: BitString):
        self.known = known.array

    def __call__(self, extracted: BitString) -> bool:
        n = len(self.known)
        arr = extracted.array
        return len(arr) >= n and np.array_equal(arr[:n], self.known)


_PRINTABLE = np.zeros(256, dtype=bool)
_PRINTABLE[0x20:0x7F] = True
_PRINTABLE[[0x09, 0x0A, 0x0D]] = True


class Printable:
    """Accepts an extraction whose whole bytes are all printable ASCII."""

    def __call__(self, extracted: BitString) -> bool:
        nbytes = len(extracted) // 8
        if nbytes == 0:
            return False
        data = np.packbits(extracted.array[: nbytes * 8])
        return bool(_PRINTABLE[data].all())


@dataclass
class AttackResult:
    keys_tested: int
    matches: list[tuple[Key, BitString]] = field(default_factory=list)
    elapsed: float = 0.0


def key_count(base: Base, kappa: int) -> int:
    """Keys a brute-force pass tries: every digit vector except all ones."""
    return (base.radix - 1) ** kappa - 1


def key_at(base: Base, kappa: int, index: int) -> tuple[int, ...]:
    """Digit vector at ``index`` in lexicographic order (index 0 is all ones)."""
    r = base.radix - 1
    out = []
    for _ in range(kappa):
        index, d = divmod(index, r)
        out.append(d + 1)
    return tuple(reversed(out))


def partition(total: int, parts: int) -> list[tuple[int, int]]:
    """Split ``range(total)`` into ``parts`` contiguous, near-equal ranges."""
    parts = max(1, min(parts, total)) if total else 1
    step, extra = divmod(total, parts)
    out, lo = [], 0
    for p in range(parts):
        hi = lo + step + (p < extra)
        out.append((lo, hi))
        lo = hi
    return out


def _scan(
    cipher: np.ndarray,
    mu: Optional[int],
    base: Base,
    kappa: int,
    predicate: Callable[[BitString], bool],
    start: int,
    stop: int,
) -> tuple[int, list[tuple[int, tuple[int, ...], np.ndarray]]]:
    n = len(cipher)
    tested = 0
    found = []
    vectors = itertools.product(range(1, base.radix), repeat=kappa)
    for index, digits in enumerate(itertools.islice(vectors, start, stop), start):
        if index == 0:
            continue  # all ones
        tested += 1
        steps = np.array(digits, dtype=np.int64)
        m = max_message_bits(Key.unchecked(base, digits), n) if mu is None else mu
        if m == 0:
            continue
        pos = np.cumsum(np.resize(steps, m))
        if pos[-1] > n:
            continue
        extracted = cipher[pos - 1]
        if predicate(BitString._wrap(extracted)):
            found.append((index, digits, extracted))
    return tested, found


def brute_force(
    env: CipherEnvelope,
    base: Base,
    kappa: int,
    predicate: Callable[[BitString], bool],
    *,
    max_keys: int = DEFAULT_MAX_KEYS,
    workers: int = 1,
    start: int = 0,
    stop: int | None = None,
) -> AttackResult:
    """Try every ``kappa``-digit key in lexicographic order.

    ``start``/``stop`` restrict the search to a slice of the enumeration
    (indices into the full lexicographic order), so independent runs can
    split the work. With ``workers > 1`` the slice is fanned out over
    processes; the predicate must then be picklable. Keys whose positions
    overrun the cipher are counted as tested and rejected.
    """
    if kappa < 1:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    total = (base.radix - 1) ** kappa
    if total - 1 > max_keys:
        raise KeySpaceTooLarge(total - 1, max_keys)
    stop = total if stop is None else min(stop, total)
    if not 0 <= start <= stop:
        raise ValueError(f"bad enumeration range {start}..{stop}")

    cipher = env.cipher.array
    mu = env.message_bits
    t0 = time.perf_counter()
    ranges = [(start + lo, start + hi) for lo, hi in partition(stop - start, workers)]
    if workers > 1 and len(ranges) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_scan, cipher, mu, base, kappa, predicate, lo, hi)
                for lo, hi in ranges
            ]
            chunks = [f.result() for f in futures]
    else:
        chunks = [_scan(cipher, mu, base, kappa, predicate, lo, hi) for lo, hi in ranges]

    tested = sum(c[0] for c in chunks)
    hits = sorted((h for c in chunks for h in c[1]), key=lambda h: h[0])
    matches = [(Key(base, d), BitString._wrap(np.array(bits))) for _, d, bits in hits]
    return AttackResult(tested, matches, time.perf_counter() - t0)


# -- randomness ---------------------------------------------------------------


def _bits_array(s: BitString, minimum: int = 100) -> np.ndarray:
    arr = s.array
    if len(arr) < minimum:
        raise InsufficientData(f"need at least {minimum} bits, got {len(arr)}")
    return arr


def monobit_test(s: BitString) -> float:
    """Frequency test p-value: erfc(|S| / sqrt(2n)) with S the +/-1 sum."""
    arr = _bits_array(s)
    n = len(arr)
    total = 2 * int(np.count_nonzero(arr)) - n
    return math.erfc(abs(total) / math.sqrt(2 * n))


def runs_test(s: BitString) -> float:
    """Runs test p-value; 0.0 when the ones proportion already fails the
    frequency prerequisite |pi - 1/2| < 2/sqrt(n)."""
    arr = _bits_array(s)
    n = len(arr)
    pi = np.count_nonzero(arr) / n
    if abs(pi - 0.5) >= 2 / math.sqrt(n):
        return 0.0
    runs = 1 + int(np.count_nonzero(arr[1:] != arr[:-1]))
    spread = 2 * math.sqrt(2 * n) * pi * (1 - pi)
    return math.erfc(abs(runs - 2 * n * pi * (1 - pi)) / spread)


class EncodingError(ValueError):
    pass


def bit_balance(
    data: Union[bytes, bytearray, str, BitString], seven_bit: bool = False
) -> tuple[int, int]:
    """Return ``(ones, zeros)``.

    Byte input is counted over 8 bits per byte, or over the low 7 bits when
    ``seven_bit`` is set (any byte >= 0x80 is then an error). Strings are
    taken as ASCII.
    """
    if isinstance(data, BitString):
        ones = data.count_ones()
        return ones, len(data) - ones
    if isinstance(data, str):
        try:
            data = data.encode("ascii")
        except UnicodeEncodeError as exc:
            raise EncodingError(str(exc)) from None
    arr = np.frombuffer(bytes(data), dtype=np.uint8)
    width = 8
    if seven_bit:
        if arr.size and arr.max() >= 0x80:
            raise EncodingError("byte >= 0x80 in 7-bit mode")
        width = 7
    ones = int(np.unpackbits(arr).sum())
    return ones, width * arr.size - ones


# -- sizing -------------------------------------------------------------------


def throughput_requirement(message_rate: Union[int, Fraction], base: Base) -> Fraction:
    """Random-bit rate needed to encode ``message_rate`` bits/s with keys in ``base``."""
    if message_rate <= 0:
        raise ValueError("message_rate must be positive")
    return Fraction(message_rate) * expansion_factor(base)


# -- tables -------------------------------------------------------------------

TABLE_KINDS = ("elements", "permutations", "bits")


def table_values(kind: str) -> dict[Base, dict[int, int]]:
    if kind not in TABLE_KINDS:
        raise ValueError(f"unknown table kind {kind!r}; choose from {TABLE_KINDS}")
    grid: dict[Base, dict[int, int]] = {}
    for base in Base:
        row = {}
        for bits in KEY_BITS:
            if kind == "elements":
                row[bits] = expected_element_count(base, bits)
            else:
                report = key_space(base, key_bits=bits)
                row[bits] = report.permutations if kind == "permutations" else report.bits
        grid[base] = row
    return grid


def _cells(kind: str) -> list[list[str]]:
    grid = table_values(kind)
    rows = [[""] + [f"{b}-bit" for b in KEY_BITS]]
    for base, row in grid.items():
        fmt = sci if kind == "permutations" else str
        rows.append([base.name.capitalize()] + [fmt(row[b]) for b in KEY_BITS])
    return rows


def tables(kind: str, csv_format: bool = False) -> str:
    """Render the 5x5 grid over key sizes 64..1024 bits as aligned text or CSV."""
    rows = _cells(kind)
    if csv_format:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(rows)
        return buf.getvalue()
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    lines = []
    for r in rows:
        first = r[0].ljust(widths[0])
        rest = [cell.rjust(w) for cell, w in zip(r[1:], widths[1:])]
        lines.append("  ".join([first] + rest).rstrip())
    notes = _footnotes(kind)
    return "\n".join(lines + notes) + "\n"


def _footnotes(kind: str) -> list[str]:
    notes = []
    for (k, base, bits), quoted in TABLE_ERRATA.items():
        if k != kind:
            continue
        report = key_space(base, key_bits=bits)
        exact = report.kappa * math.log2(base.radix - 1)
        notes.append(
            f"note: {base.name.lower()} {bits}-bit = {report.bits} "
            f"({report.kappa} digits x log2({base.radix - 1}) = {exact:.1f}); "
            f"the often-quoted {quoted} is an arithmetic slip"
        )
    return [""] + notes if notes else []


def p_value_line(name: str, p: float) -> str:
    return f"{name}: p = {p:.4f}"


def summarize_bits(s: BitString) -> Sequence[str]:
    ones, zeros = bit_balance(s)
    out = [f"bits: {len(s)}", f"ones: {ones}", f"zeros: {zeros}"]
    for name, test in (("monobit", monobit_test), ("runs", runs_test)):
        try:
            out.append(p_value_line(name, test(s)))
        except InsufficientData as exc:
            out.append(f"{name}: {exc}")
    return out
