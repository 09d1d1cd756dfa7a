"""Hide message bits among random bits at key-determined positions."""

from .bitstream import BitString, read_bits, write_bits
from .cipher import (
    CipherEnvelope,
    PositionIterator,
    cipher_length,
    decode,
    decode_stream,
    encode,
    encode_stream,
    insertion_positions,
)
from .entropy import EntropySource, file_source, os_source, seeded_source
from .keygen import Base, Key, derive_key, derive_key_exact, expected_element_count

__all__ = [
    "Base",
    "BitString",
    "CipherEnvelope",
    "EntropySource",
    "Key",
    "PositionIterator",
    "cipher_length",
    "decode",
    "decode_stream",
    "derive_key",
    "derive_key_exact",
    "encode",
    "encode_stream",
    "expected_element_count",
    "file_source",
    "insertion_positions",
    "os_source",
    "read_bits",
    "seeded_source",
    "write_bits",
]

__version__ = "0.1.0"
