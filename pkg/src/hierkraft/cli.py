"""Command-line front end.

Exit codes: 0 success, 1 kraft violation (or a failed check), 2 bad input.
"""

from __future__ import annotations

import argparse
import random
import sys
from fractions import Fraction
from pathlib import Path

from .codec import (
    CodeBook,
    EncodeFailure,
    InvalidLengthFunction,
    LengthFunction,
    build_codebook,
    check_use_bound,
    decode,
    encode,
    load_length_function,
)
from .dyadic import DyadicAmount, DyadicInterval
from .events import Alloc, Burn, Error
from .kraft import KraftViolation
from .stream import (
    DEFAULT_MAX_LABEL,
    Contam,
    StreamFormatError,
    format_log,
    format_stream,
    parse_log,
    parse_stream,
    run_stream,
)
from .verify import StreamSpec, kraft_chaitin_equiv, random_stream, replay_audit

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2


class InputError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _bits(text: str, what: str) -> str:
    text = text.strip()
    if text == "-":
        return ""
    if set(text) - {"0", "1"}:
        raise InputError(f"{what} must be a bit string, got {text!r}")
    return text


# ------------------------------------------------------------------ files

def parse_k_table(text: str) -> dict[str, int]:
    table: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if len(toks) != 3 or toks[0] != "k":
            raise StreamFormatError("expected 'k <bits> <label>'", lineno)
        bits = "" if toks[1] == "-" else toks[1]
        if not bits or set(bits) - {"0", "1"}:
            raise StreamFormatError(f"bad string {toks[1]!r}", lineno)
        try:
            label = int(toks[2])
        except ValueError:
            raise StreamFormatError(f"label {toks[2]!r} is not an integer", lineno) from None
        if label < 1:
            raise StreamFormatError(f"label {label} must be >= 1", lineno)
        if bits in table:
            raise StreamFormatError(f"duplicate string {bits}", lineno)
        table[bits] = label
    return table


def parse_contam_schedule(text: str) -> list[tuple[int, DyadicInterval]]:
    """``contam <bits> [<after>]``: contaminate once ``after`` requests are issued (default 0)."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if toks[0] != "contam" or len(toks) not in (2, 3):
            raise StreamFormatError("expected 'contam <bits> [<after>]'", lineno)
        try:
            iv = DyadicInterval.parse(toks[1])
            after = int(toks[2]) if len(toks) == 3 else 0
        except ValueError:
            raise StreamFormatError(f"bad contamination line {line!r}", lineno) from None
        out.append((after, iv))
    return out


def format_codebook(cb: CodeBook) -> str:
    lines = ["# hierkraft codebook", f"depth {cb.K.depth}"]
    lines += [f"k {x} {cb.K[x]}" for x in cb.K.strings()]
    lines += [f"code {x} {cw.serialize()} {seq}" for seq, x, cw in cb.enumeration()]
    lines += [ev.line() for ev in cb.log]
    return "\n".join(lines) + "\n"


def parse_codebook(text: str) -> CodeBook:
    depth = None
    table: dict[str, int] = {}
    codewords: dict[str, list] = {}
    events = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        try:
            if toks[0] == "depth" and len(toks) == 2:
                depth = int(toks[1])
            elif toks[0] == "k" and len(toks) == 3:
                table[toks[1]] = int(toks[2])
            elif toks[0] == "code" and len(toks) == 4:
                codewords.setdefault(toks[1], []).append((DyadicInterval.parse(toks[2]), int(toks[3])))
            elif toks[0] in ("alloc", "burn", "error"):
                events.extend(parse_log(line))
            else:
                raise ValueError
        except ValueError:
            raise StreamFormatError(f"bad codebook line {line!r}", lineno) from None
    if depth is None:
        raise StreamFormatError("codebook has no depth line")
    K = load_length_function(table, depth)
    for x in K.table:
        codewords.setdefault(x, [])
    for lst in codewords.values():
        lst.sort(key=lambda p: p[1])
    node_of = {x: i + 1 for i, x in enumerate(K.strings())}
    return CodeBook(K, codewords, events, node_of)


# --------------------------------------------------------------- commands

def cmd_alloc(args) -> int:
    directives = parse_stream(_read(args.infile), max_label=args.max_label)
    res = run_stream(directives)
    _write(args.out, format_log(res.log))
    if args.audit:
        report = replay_audit(directives, res.log)
        print(report, file=sys.stderr)
        if not report.ok:
            return EXIT_VIOLATION
    if res.violation is not None:
        print(f"kraft_violation: {res.violation}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_audit(args) -> int:
    directives = parse_stream(_read(args.infile), max_label=args.max_label)
    report = replay_audit(directives, parse_log(_read(args.log)))
    print(report)
    return EXIT_OK if report.ok else EXIT_VIOLATION


def cmd_build(args) -> int:
    table = parse_k_table(_read(args.k))
    if any(l > args.max_label for l in table.values()):
        raise InputError(f"labels above --max-label {args.max_label}")
    K = load_length_function(table, args.depth)
    schedule = parse_contam_schedule(_read(args.contam)) if args.contam else []
    if schedule:
        from .contam import ContaminationSet
        final = ContaminationSet(iv for _, iv in schedule).measure
        if K.kraft_sum + final > DyadicAmount.one():
            print(f"warning: Kraft sum {K.kraft_sum} + contamination {final} exceeds 1", file=sys.stderr)
    try:
        cb = build_codebook(K, schedule)
    except KraftViolation as exc:
        print(f"kraft_violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    _write(args.out, format_codebook(cb))
    if K.dropped:
        print(f"dropped {len(K.dropped)} strings outside the prefix-closed domain", file=sys.stderr)
    print(f"kraft sum {K.kraft_sum}", file=sys.stderr)
    return EXIT_OK


def cmd_encode(args) -> int:
    cb = parse_codebook(_read(args.codebook))
    alpha = _bits(args.alpha, "alpha")
    try:
        beta, chain = encode(cb, alpha)
    except EncodeFailure as exc:
        print(f"encode_failure: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    print(beta or "-")
    print(" ".join(iv.serialize() for iv in chain))
    return EXIT_OK


def cmd_decode(args) -> int:
    cb = parse_codebook(_read(args.codebook))
    raw = args.beta if args.beta not in (None, "-") else sys.stdin.read()
    res = decode(cb, _bits(raw, "beta"))
    print(res.out or "-")
    print(" ".join(str(u) for u in res.use_profile))
    return EXIT_OK


def cmd_check(args) -> int:
    cb = parse_codebook(_read(args.codebook))
    alpha = _bits(args.alpha, "alpha")
    try:
        beta, _ = encode(cb, alpha)
    except EncodeFailure as exc:
        print(f"encode_failure: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    res = decode(cb, beta)
    ok = res.out.startswith(alpha)
    if not ok:
        print(f"FAIL roundtrip out={res.out or '-'} alpha={alpha}")
    report = check_use_bound(cb.K, alpha, res.use_profile) if ok else None
    if report is not None:
        print(report)
        ok = report.ok
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_fuzz(args) -> int:
    frac = Fraction(args.contam_frac)
    seeds = random.Random(args.seed)
    passed = 0
    first_failure = None
    for i in range(args.iters):
        flat = args.hier_prob == 0 or i % 4 == 0
        spec = StreamSpec(seed=seeds.getrandbits(63), nodes=args.n, max_label=args.max_label,
                          hier_prob=0.0 if flat else args.hier_prob, contam_frac=frac)
        directives = random_stream(spec)
        res = run_stream(directives)
        ok = res.ok
        report = replay_audit(directives, res.log)
        ok = ok and report.ok
        if ok and flat and not any(isinstance(d, Contam) for d in directives):
            ok = kraft_chaitin_equiv([d.label for d in directives])
        if ok:
            passed += 1
        elif first_failure is None:
            first_failure = i
            dump = Path(args.dump_dir)
            dump.mkdir(parents=True, exist_ok=True)
            (dump / f"fuzz-fail-{i}.stream").write_text(format_stream(directives, spec.header()), encoding="utf-8")
            (dump / f"fuzz-fail-{i}.log").write_text(format_log(res.log), encoding="utf-8")
            (dump / f"fuzz-fail-{i}.report").write_text(str(report) + "\n", encoding="utf-8")
    print(f"{passed}/{args.iters} PASS")
    if first_failure is not None:
        print(f"first failure at iteration {first_failure}; artifacts in {args.dump_dir}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hierkraft", description="Hierarchical Kraft allocation and coding.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("alloc", help="run the allocator on a request stream")
    a.add_argument("--in", dest="infile", required=True)
    a.add_argument("--out", required=True)
    a.add_argument("--audit", action="store_true")
    a.add_argument("--max-label", type=int, default=DEFAULT_MAX_LABEL)
    a.set_defaults(func=cmd_alloc)

    r = sub.add_parser("audit", help="replay-audit an event log against its stream")
    r.add_argument("--in", dest="infile", required=True)
    r.add_argument("--log", required=True)
    r.add_argument("--max-label", type=int, default=DEFAULT_MAX_LABEL)
    r.set_defaults(func=cmd_audit)

    c = sub.add_parser("codec", help="hierarchical prefix codes")
    csub = c.add_subparsers(dest="codec_command", required=True)
    b = csub.add_parser("build")
    b.add_argument("--k", required=True)
    b.add_argument("--depth", type=int, required=True)
    b.add_argument("--contam")
    b.add_argument("--out", required=True)
    b.add_argument("--max-label", type=int, default=DEFAULT_MAX_LABEL)
    b.set_defaults(func=cmd_build)
    e = csub.add_parser("encode")
    e.add_argument("--codebook", required=True)
    e.add_argument("--alpha", required=True)
    e.set_defaults(func=cmd_encode)
    d = csub.add_parser("decode")
    d.add_argument("--codebook", required=True)
    d.add_argument("--beta")
    d.set_defaults(func=cmd_decode)
    k = csub.add_parser("check")
    k.add_argument("--codebook", required=True)
    k.add_argument("--alpha", required=True)
    k.set_defaults(func=cmd_check)

    f = sub.add_parser("fuzz", help="random streams through allocator and replay audit")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--n", type=int, default=100)
    f.add_argument("--max-label", type=int, default=16)
    f.add_argument("--contam-frac", default="0")
    f.add_argument("--hier-prob", type=float, default=0.5)
    f.add_argument("--iters", type=int, default=100)
    f.add_argument("--dump-dir", default=".")
    f.set_defaults(func=cmd_fuzz)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InvalidLengthFunction as exc:
        print(f"invalid_length_function: Kraft sum {exc.kraft_sum} > 1", file=sys.stderr)
        return EXIT_INPUT
    except (StreamFormatError, InputError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
