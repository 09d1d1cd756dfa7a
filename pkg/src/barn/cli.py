"""Command-line front end: ``barn <command> [options]``.

Exit codes: 0 success, 1 usage error, 2 bad data or file format,
3 refusal (key space too large to enumerate).
"""

from __future__ import annotations

import argparse
import csv
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import analysis
from .bitstream import BitLengthError, BitString
from .cipher import (
    CipherEnvelope,
    CipherFormatError,
    MessageRangeError,
    decode,
    encode,
)
from .entropy import EntropyUnderrun, parse_source
from .keygen import Base, InvalidKey, Key, derive_key, derive_key_exact

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_REFUSED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _base(text: str) -> Base:
    try:
        return Base.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _count(text: str) -> int:
    value = int(text, 0)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _positive(text: str) -> int:
    value = _count(text)
    if value == 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return value


def _source(text: str) -> str:
    if text == "os" or text.startswith(("seed:", "file:")):
        return text
    raise argparse.ArgumentTypeError("expected os, seed:<u64> or file:<path>")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="barn", description="Hide bits among random bits.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    kg = sub.add_parser("keygen", help="derive a key from entropy")
    kg.add_argument("--base", type=_base, required=True)
    size = kg.add_mutually_exclusive_group(required=True)
    size.add_argument("--kappa", type=_positive, help="exact number of digits")
    size.add_argument("--bits", type=_positive, help="number of random bits to chunk")
    kg.add_argument("--source", type=_source, default="os")
    kg.add_argument("--out", required=True)

    enc = sub.add_parser("encrypt", help="embed a message in random bits")
    enc.add_argument("--key", required=True)
    enc.add_argument("--in", dest="inp", required=True)
    enc.add_argument("--source", type=_source, default="os")
    enc.add_argument("--out", required=True)
    enc.add_argument("--raw", action="store_true", help="write bare cipher bits")
    enc.add_argument("--bit-length", type=_positive)
    enc.add_argument("--tail", type=_count, default=0, help="extra random bits appended")

    dec = sub.add_parser("decrypt", help="extract a message")
    dec.add_argument("--key", required=True)
    dec.add_argument("--in", dest="inp", required=True)
    dec.add_argument("--out", required=True)
    dec.add_argument("--raw", action="store_true")
    dec.add_argument("--length", type=_count, help="message bits (raw mode)")

    tb = sub.add_parser("tables", help="print key-size tables")
    tb.add_argument("--kind", choices=analysis.TABLE_KINDS, required=True)
    tb.add_argument("--csv", action="store_true")

    at = sub.add_parser("attack", help="brute-force a cipher")
    at.add_argument("--in", dest="inp", required=True)
    at.add_argument("--base", type=_base, required=True)
    at.add_argument("--kappa", type=_positive, required=True)
    pred = at.add_mutually_exclusive_group(required=True)
    pred.add_argument("--known", help="file holding the known plaintext bytes")
    pred.add_argument("--printable", action="store_true")
    at.add_argument("--max-keys", type=_positive, default=analysis.DEFAULT_MAX_KEYS)
    at.add_argument("--workers", type=_positive, default=1)
    at.add_argument("--csv", action="store_true")

    st = sub.add_parser("stats", help="randomness statistics of a file")
    st.add_argument("--in", dest="inp", required=True)
    st.add_argument("--bits", type=_positive)

    pl = sub.add_parser("plan", help="random-bit rate needed for a message rate")
    pl.add_argument("--rate", type=Fraction, required=True)
    pl.add_argument("--base", type=_base, required=True)
    return p


def _load_envelope(path: str) -> CipherEnvelope:
    data = Path(path).read_bytes()
    if CipherEnvelope.is_container(data):
        return CipherEnvelope.from_container(data)
    return CipherEnvelope.from_raw(data)


def _fmt_number(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{float(x):.6f}"


def cmd_keygen(args, out) -> int:
    src = parse_source(args.source)
    if args.kappa is not None:
        key = derive_key_exact(src, args.base, args.kappa)
    else:
        key = derive_key(src.next_bits(args.bits), args.base)
    key.save(args.out)
    print(f"wrote {args.base.name.lower()} key, kappa={key.kappa}, to {args.out}", file=out)
    return EXIT_OK


def cmd_encrypt(args, out) -> int:
    key = Key.load(args.key)
    message = BitString.from_bytes(Path(args.inp).read_bytes(), args.bit_length)
    if len(message) == 0:
        raise CipherFormatError("message is empty")
    src = parse_source(args.source)
    env = encode(message, key, src, tail_bits=args.tail)
    data = env.to_raw() if args.raw else env.to_container()
    Path(args.out).write_bytes(data)
    print(f"message {env.message_bits} bits -> cipher {len(env.cipher)} bits", file=out)
    return EXIT_OK


def cmd_decrypt(args, out) -> int:
    if args.raw != (args.length is not None):
        raise UsageError("barn decrypt: --raw and --length must be given together")
    key = Key.load(args.key)
    data = Path(args.inp).read_bytes()
    if args.raw:
        message = decode(CipherEnvelope.from_raw(data), key, args.length)
    else:
        message = decode(CipherEnvelope.from_container(data), key)
    payload, n = message.to_bytes()
    Path(args.out).write_bytes(payload)
    print(f"recovered {n} bits", file=out)
    return EXIT_OK


def cmd_tables(args, out) -> int:
    out.write(analysis.tables(args.kind, csv_format=args.csv))
    return EXIT_OK


def cmd_attack(args, out) -> int:
    env = _load_envelope(args.inp)
    if args.known:
        predicate = analysis.KnownPlaintext(BitString.from_bytes(Path(args.known).read_bytes()))
    else:
        predicate = analysis.Printable()
    result = analysis.brute_force(
        env, args.base, args.kappa, predicate, max_keys=args.max_keys, workers=args.workers
    )
    if args.csv:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["key", "message_hex", "message_bits"])
        for key, bits in result.matches:
            w.writerow([" ".join(map(str, key.digits)), bits.to_bytes()[0].hex(), len(bits)])
        return EXIT_OK
    print(f"keys tested: {result.keys_tested}", file=out)
    print(f"matches: {len(result.matches)}", file=out)
    print(f"elapsed: {result.elapsed:.3f} s", file=out)
    for key, bits in result.matches:
        print(f"  {str(key):<24} {bits.to_bytes()[0].hex()}", file=out)
    return EXIT_OK


def cmd_stats(args, out) -> int:
    env = _load_envelope(args.inp)
    bits = env.cipher if args.bits is None else env.cipher.head(args.bits)
    if args.bits is not None and len(bits) < args.bits:
        raise BitLengthError(f"file holds only {len(env.cipher)} bits")
    for line in analysis.summarize_bits(bits):
        print(line, file=out)
    return EXIT_OK


def cmd_plan(args, out) -> int:
    if args.rate <= 0:
        raise UsageError("barn plan: --rate must be positive")
    print(_fmt_number(analysis.throughput_requirement(args.rate, args.base)), file=out)
    return EXIT_OK


COMMANDS = {
    "keygen": cmd_keygen,
    "encrypt": cmd_encrypt,
    "decrypt": cmd_decrypt,
    "tables": cmd_tables,
    "attack": cmd_attack,
    "stats": cmd_stats,
    "plan": cmd_plan,
}


def run(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(exc, file=err)
        return EXIT_USAGE
    except analysis.KeySpaceTooLarge as exc:
        print(f"barn: {exc}", file=err)
        return EXIT_REFUSED
    except (
        OSError,
        InvalidKey,
        CipherFormatError,
        MessageRangeError,
        BitLengthError,
        EntropyUnderrun,
        ValueError,
    ) as exc:
        print(f"barn: {exc}", file=err)
        return EXIT_DATA


def main() -> None:
    sys.exit(run())
