import numpy as np
import pytest

from barn import Base, BitString, Key

# Worked example: 10-bit message hidden with a four-digit quaternary key.
EXAMPLE_MESSAGE = "1110001101"
EXAMPLE_KEY = (1, 3, 2, 1)
GUESSED_KEY = (2, 1, 2, 1)
GUESSED_EXTRACTION = "001100001011"

# Stream bits at the positions the true key leaves alone. Positions 10 and
# 16 are not pinned down by the example and are set to 0.
FILLER = {2: 0, 3: 0, 5: 1, 9: 0, 12: 0, 17: 1, 10: 0, 16: 0}


class ListSource:
    """Entropy source that replays a fixed bit list, then runs dry."""

    def __init__(self, bits):
        self.bits = list(bits)
        self.pos = 0

    def next_bits(self, n):
        from barn.entropy import EntropyUnderrun

        if n > len(self.bits) - self.pos:
            raise EntropyUnderrun(n, len(self.bits) - self.pos)
        out = self.bits[self.pos : self.pos + n]
        self.pos += n
        return BitString(out)


def example_stream():
    """18 raw stream bits; the inserted positions carry the complement of the
    message so the test sees every replacement actually happen."""
    bits = [0] * 18
    message = [int(c) for c in EXAMPLE_MESSAGE]
    for p, m in zip((1, 4, 6, 7, 8, 11, 13, 14, 15, 18), message):
        bits[p - 1] = 1 - m
    for p, b in FILLER.items():
        bits[p - 1] = b
    return bits


@pytest.fixture
def example_key():
    return Key(Base.QUATERNARY, EXAMPLE_KEY)


@pytest.fixture
def example_message():
    return BitString.from_str(EXAMPLE_MESSAGE)


@pytest.fixture
def example_cipher(example_key, example_message):
    from barn import encode

    return encode(example_message, example_key, ListSource(example_stream()))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
