import io
import subprocess
import sys

import pytest

from barn.bitstream import BitString
from barn.cli import run
from barn.keygen import Base, Key

from conftest import EXAMPLE_MESSAGE


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(map(str, argv)), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("radix", [3, 4, 8, 10, 16])
def test_round_trip(tmp_path, radix):
    key, msg, enc, dec = (tmp_path / n for n in ("k.bk", "m.bin", "c.bb", "m2.bin"))
    msg.write_bytes(b"bury me among random numbers\n" * 3)
    assert call("keygen", "--base", radix, "--kappa", 4, "--source", "seed:1", "--out", key)[0] == 0
    assert call("encrypt", "--key", key, "--in", msg, "--source", "seed:2", "--out", enc)[0] == 0
    assert enc.read_bytes()[:5] == b"BARN\x01"
    assert call("decrypt", "--key", key, "--in", enc, "--out", dec)[0] == 0
    assert dec.read_bytes() == msg.read_bytes()


def test_keygen_from_bits(tmp_path):
    out = tmp_path / "k.bk"
    code, text, _ = call("keygen", "--base", "octal", "--bits", 64, "--source", "seed:1", "--out", out)
    assert code == 0
    key = Key.load(out)
    assert key.base is Base.OCTAL and "octal" in text


def test_keygen_degenerate_is_data_error(tmp_path):
    src = tmp_path / "e.bin"
    src.write_bytes(bytes([0b01010101]))
    code, _, err = call("keygen", "--base", 3, "--bits", 8, "--source", f"file:{src}", "--out", tmp_path / "k")
    assert code == 2 and "all ones" in err


def test_keygen_underrun(tmp_path):
    src = tmp_path / "e.bin"
    src.write_bytes(b"\x00")
    code, _, err = call("keygen", "--base", 3, "--kappa", 4, "--source", f"file:{src}", "--out", tmp_path / "k")
    assert code == 2 and "underrun" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["keygen", "--base", 3, "--kappa", 2, "--bits", 64, "--out", "k"],
        ["keygen", "--base", 3, "--out", "k"],
        ["keygen", "--base", 5, "--kappa", 2, "--out", "k"],
        ["keygen", "--base", 3, "--kappa", 2, "--source", "tape", "--out", "k"],
        ["encrypt", "--key", "k"],
        ["bogus"],
        ["tables", "--kind", "volume"],
        ["plan", "--rate", "fast", "--base", 4],
        ["tables", "--kind", "bits", "--frobnicate"],
        [],
    ],
)
def test_usage_errors(argv):
    code, _, err = call(*argv)
    assert code == 1
    assert "error" in err


def test_decrypt_raw_flags_together(tmp_path):
    code, _, _ = call("decrypt", "--key", "k", "--in", "c", "--out", "o", "--raw")
    assert code == 1
    code, _, _ = call("decrypt", "--key", "k", "--in", "c", "--out", "o", "--length", 3)
    assert code == 1


def test_raw_mode_with_bit_length(tmp_path):
    key = tmp_path / "k.bk"
    Key(Base.QUATERNARY, [1, 3, 2, 1]).save(key)
    msg = tmp_path / "m.bin"
    msg.write_bytes(bytes([0xE3, 0x40]))
    enc, dec = tmp_path / "c.raw", tmp_path / "m2.bin"
    code, text, _ = call("encrypt", "--key", key, "--in", msg, "--source", "seed:9", "--out", enc, "--raw", "--bit-length", 10)
    assert code == 0 and "cipher 18 bits" in text
    assert len(enc.read_bytes()) == 3
    assert call("decrypt", "--key", key, "--in", enc, "--out", dec, "--raw", "--length", 10)[0] == 0
    assert dec.read_bytes() == bytes([0xE3, 0x40])
    assert str(BitString.from_bytes(dec.read_bytes(), 10)) == EXAMPLE_MESSAGE


def test_decrypt_bad_container(tmp_path):
    key = tmp_path / "k.bk"
    Key(Base.TERNARY, [1, 2]).save(key)
    bad = tmp_path / "c.bb"
    bad.write_bytes(b"nope")
    assert call("decrypt", "--key", key, "--in", bad, "--out", tmp_path / "o")[0] == 2


def test_decrypt_bad_key_file(tmp_path):
    key = tmp_path / "k.bk"
    key.write_text("BARN-KEY 1\n3\n1 1\n")
    assert call("decrypt", "--key", key, "--in", key, "--out", tmp_path / "o")[0] == 2


def test_missing_input(tmp_path):
    key = tmp_path / "k.bk"
    Key(Base.TERNARY, [1, 2]).save(key)
    code, _, _ = call("encrypt", "--key", key, "--in", tmp_path / "none", "--source", "seed:1", "--out", tmp_path / "c")
    assert code == 2


def test_tables_permutations():
    code, text, _ = call("tables", "--kind", "permutations")
    assert code == 0
    assert text.splitlines()[3].split() == [
        "Octal", "1.63E+015", "1.86E+031", "3.45E+062", "8.31E+125", "6.91E+251",
    ]
    assert call("tables", "--kind", "permutations")[1] == text


def test_tables_csv():
    code, text, _ = call("tables", "--kind", "bits", "--csv")
    assert code == 0
    assert "Decimal,28,57,114,228,456" in text.splitlines()


def test_plan():
    assert call("plan", "--rate", 500_000_000, "--base", 4)[1] == "1000000000\n"
    assert call("plan", "--rate", 8000, "--base", 3)[1] == "12000\n"
    assert call("plan", "--rate", 0, "--base", 3)[0] == 1


def test_attack_known_plaintext(tmp_path):
    key = tmp_path / "k.bk"
    Key(Base.QUATERNARY, [1, 3, 2, 1]).save(key)
    msg = tmp_path / "m.bin"
    msg.write_bytes(b"OK")
    enc = tmp_path / "c.bb"
    call("encrypt", "--key", key, "--in", msg, "--source", "seed:3", "--out", enc)
    code, text, _ = call("attack", "--in", enc, "--base", 4, "--kappa", 4, "--known", msg)
    assert code == 0
    assert "keys tested: 80" in text
    assert "{1,3,2,1}" in text
    code, text, _ = call("attack", "--in", enc, "--base", 4, "--kappa", 4, "--known", msg, "--csv", "--workers", 2)
    assert code == 0
    assert "1 3 2 1,4f4b,16" in text.splitlines()


def test_attack_refusal(tmp_path):
    enc = tmp_path / "c.raw"
    enc.write_bytes(bytes(16))
    code, _, err = call("attack", "--in", enc, "--base", 16, "--kappa", 15, "--printable")
    assert code == 3
    assert str(15**15 - 1) in err


def test_stats(tmp_path):
    path = tmp_path / "r.bin"
    path.write_bytes(bytes(range(256)) * 8)
    code, text, _ = call("stats", "--in", path)
    assert code == 0
    assert "bits: 16384" in text and "monobit: p = 1.0000" in text
    code, text, _ = call("stats", "--in", path, "--bits", 50)
    assert code == 0 and "at least 100" in text
    assert call("stats", "--in", path, "--bits", 10**6)[0] == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "barn", "plan", "--rate", "25000000", "--base", "ternary"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout == "37500000\n"
