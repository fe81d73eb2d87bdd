"""Hierarchical prefix coding on top of the request-tree allocator.

Every binary string ``x`` in the domain of a length function ``K`` becomes a
request with label ``K(x)`` whose father is the request for ``x`` minus its
last bit.  The intervals a request is ever allocated are the codewords of
its string, so a codeword of ``x + b`` always extends a codeword of ``x``.

Decoding is an oracle machine that replays the allocation log as its
enumeration of codewords and reads the oracle lazily: a bit is read only
once some enumerated codeword for the next output position properly extends
what has been read so far.  It therefore never reads past a codeword.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .dyadic import DyadicAmount, DyadicInterval
from .events import Alloc, Event
from .hier import ROOT, RequestTree

__all__ = [
    "InvalidLengthFunction",
    "EncodeFailure",
    "LengthFunction",
    "CodeBook",
    "DecodeResult",
    "load_length_function",
    "tabulate",
    "build_codebook",
    "encode",
    "decode",
    "check_use_bound",
    "UseBoundReport",
]


class InvalidLengthFunction(ValueError):
    def __init__(self, kraft_sum: DyadicAmount):
        super().__init__(f"Kraft sum {kraft_sum} exceeds 1")
        self.kraft_sum = kraft_sum


class EncodeFailure(LookupError):
    pass


@dataclass
class LengthFunction:
    """Labels ``K(x) >= 1`` on a prefix-closed set of strings of length <= depth."""

    table: dict[str, int]
    depth: int
    kraft_sum: DyadicAmount
    dropped: list[str] = field(default_factory=list)

    def __getitem__(self, x: str) -> int:
        return self.table[x]

    def __contains__(self, x: str) -> bool:
        return x in self.table

    def __len__(self):
        return len(self.table)

    def strings(self) -> list[str]:
        """Breadth-first order: by length, then lexicographically."""
        return sorted(self.table, key=lambda x: (len(x), x))


def load_length_function(raw: Mapping[str, int], depth: int) -> LengthFunction:
    """Restrict ``raw`` to the largest prefix-closed part of depth <= ``depth``."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    for x, k in raw.items():
        if set(x) - {"0", "1"}:
            raise ValueError(f"malformed string {x!r}")
        if not isinstance(k, int) or k < 1:
            raise ValueError(f"label for {x!r} must be an integer >= 1, got {k!r}")
    kept: dict[str, int] = {}
    dropped = []
    for x in sorted(raw, key=lambda s: (len(s), s)):
        if x and len(x) <= depth and (len(x) == 1 or x[:-1] in kept):
            kept[x] = raw[x]
        else:
            dropped.append(x)
    total = DyadicAmount.zero()
    for k in kept.values():
        total = total + DyadicAmount.pow2(k)
    if total > DyadicAmount.one():
        raise InvalidLengthFunction(total)
    return LengthFunction(kept, depth, total, dropped)


def tabulate(func: Callable[[str], int], depth: int) -> dict[str, int]:
    """Evaluate ``func`` on every nonempty string of length <= ``depth``."""
    table = {}
    for n in range(1, depth + 1):
        for i in range(1 << n):
            x = format(i, f"0{n}b")
            table[x] = func(x)
    return table


@dataclass
class CodeBook:
    K: LengthFunction
    # string -> [(codeword, seq)] in allocation order
    codewords: dict[str, list[tuple[DyadicInterval, int]]]
    log: list[Event]
    node_of: dict[str, int]
    tree: RequestTree | None = None

    def string_of_node(self) -> dict[int, str]:
        return {v: x for x, v in self.node_of.items()}

    def enumeration(self) -> list[tuple[int, str, DyadicInterval]]:
        """All codewords as ``(seq, string, codeword)`` in enumeration order."""
        out = [(seq, x, cw) for x, lst in self.codewords.items() for cw, seq in lst]
        out.sort(key=lambda t: t[0])
        return out


def build_codebook(K: LengthFunction, contamination: Iterable[tuple[int, DyadicInterval]] = ()) -> CodeBook:
    """Run the allocator on the string tree of ``K`` in breadth-first order.

    ``contamination`` is a sequence of ``(after, interval)``: the interval is
    contaminated once ``after`` requests have been issued.  A KraftViolation
    propagates.
    """
    schedule = sorted(((int(a), iv if isinstance(iv, DyadicInterval) else DyadicInterval(iv))
                       for a, iv in contamination), key=lambda p: p[0])
    tree = RequestTree()
    node_of: dict[str, int] = {}
    pending = 0
    issued = 0

    def contaminate_due():
        nonlocal pending
        while pending < len(schedule) and schedule[pending][0] <= issued:
            tree.contaminate(schedule[pending][1])
            pending += 1

    for x in K.strings():
        contaminate_due()
        father = ROOT if len(x) == 1 else node_of[x[:-1]]
        v, _ = tree.add_request(father, K[x])
        node_of[x] = v
        issued += 1
    contaminate_due()

    string_of = {v: x for x, v in node_of.items()}
    codewords: dict[str, list[tuple[DyadicInterval, int]]] = {x: [] for x in node_of}
    for ev in tree.log:
        if isinstance(ev, Alloc):
            codewords[string_of[ev.node]].append((ev.interval, ev.seq))
    return CodeBook(K, codewords, list(tree.log), node_of, tree)


def encode(cb: CodeBook, alpha: str) -> tuple[str, list[DyadicInterval]]:
    """Oracle prefix for ``alpha`` plus the chain of nested codewords behind it.

    Uses the earliest codeword of ``alpha`` itself; each earlier link is the
    unique codeword of the shorter prefix that contains the next one.
    """
    if not alpha:
        return "", []
    if alpha not in cb.codewords or not cb.codewords[alpha]:
        raise EncodeFailure(f"no codeword for {alpha!r}")
    chain = [cb.codewords[alpha][0][0]]
    for n in range(len(alpha) - 1, 0, -1):
        below = chain[-1]
        for cw, _ in cb.codewords.get(alpha[:n], ()):
            if cw.contains(below):
                chain.append(cw)
                break
        else:
            raise EncodeFailure(f"no codeword of {alpha[:n]!r} contains {below}")
    chain.reverse()
    return chain[-1].bits, chain


@dataclass
class DecodeResult:
    out: str
    use_profile: list[int]
    # oracle bits read when the machine stopped
    z: str = ""
    # ("read", seq, z_before, justifying codeword bits) / ("output", seq, bit, z)
    trace: list[tuple] = field(default_factory=list)

    @property
    def bits_read(self) -> int:
        return len(self.z)


def decode(cb: CodeBook, beta: str) -> DecodeResult:
    """Run the delayed-read oracle machine on the finite oracle ``beta``.

    After each enumerated codeword the two rules are applied until neither
    fires; output takes priority over reading.
    """
    if set(beta) - {"0", "1"}:
        raise ValueError(f"malformed oracle {beta!r}")
    seen: dict[str, list[str]] = {}
    out = ""
    z = ""
    profile: list[int] = []
    trace: list[tuple] = []
    for seq, x, cw in cb.enumeration():
        seen.setdefault(x, []).append(cw.bits)
        while True:
            cand0 = seen.get(out + "0", ())
            cand1 = seen.get(out + "1", ())
            if z in cand0 or z in cand1:
                b = "0" if z in cand0 else "1"
                out += b
                profile.append(len(z))
                trace.append(("output", seq, b, z))
                continue
            if len(z) < len(beta):
                ext = next((c for c in (*cand0, *cand1) if len(c) > len(z) and c.startswith(z)), None)
                if ext is not None:
                    trace.append(("read", seq, z, ext))
                    z += beta[len(z)]
                    continue
            break
    return DecodeResult(out, profile, z, trace)


@dataclass
class UseBoundReport:
    # (n, use, K(alpha|n), min_{i>=n} K(alpha|i))
    rows: list[tuple[int, int, int, int]]

    @property
    def ok(self) -> bool:
        return all(use <= bound and use <= tight for _, use, bound, tight in self.rows)

    def lines(self) -> list[str]:
        out = []
        for n, use, bound, tight in self.rows:
            verdict = "PASS" if use <= bound and use <= tight else "FAIL"
            out.append(f"{verdict} n={n} use={use} bound={bound} min_bound={tight} margin={tight - use}")
        return out

    def __str__(self):
        return "\n".join(self.lines())


def check_use_bound(K: LengthFunction | Mapping[str, int], alpha: str, use_profile) -> UseBoundReport:
    """Compare oracle use with ``K`` on the prefixes of ``alpha``.

    Besides ``use[n] <= K(alpha[:n])`` this checks the monotone consequence
    ``use[n] <= min(K(alpha[:i]) for i >= n)`` over the prefixes ``K`` knows.
    """
    table = K.table if isinstance(K, LengthFunction) else K
    n_max = 0
    while n_max < len(alpha) and alpha[: n_max + 1] in table:
        n_max += 1
    if len(use_profile) < n_max:
        raise ValueError(f"use profile has {len(use_profile)} entries, need {n_max}")
    labels = [table[alpha[:n]] for n in range(1, n_max + 1)]
    rows = []
    tight = None
    for n in range(n_max, 0, -1):
        k = labels[n - 1]
        tight = k if tight is None else min(tight, k)
        rows.append((n, use_profile[n - 1], k, tight))
    rows.reverse()
    return UseBoundReport(rows)
