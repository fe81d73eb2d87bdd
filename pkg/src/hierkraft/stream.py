"""Line formats for request streams and event logs, and the stream driver.

Request stream::

    # comment
    req <id> <parent> <label>
    contam <bits>

Event log::

    alloc <id> <bits> <seq>
    burn <bits> <seq>
    error kraft_violation <seq>

The whole unit interval is written ``-``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dyadic import DyadicInterval
from .events import Alloc, Burn, Error, Event
from .hier import ROOT, RequestTree
from .kraft import KraftViolation

__all__ = [
    "Req",
    "Contam",
    "StreamFormatError",
    "parse_stream",
    "format_stream",
    "parse_log",
    "format_log",
    "run_stream",
    "RunResult",
]

DEFAULT_MAX_LABEL = 62


class StreamFormatError(ValueError):
    """Malformed input; ``lineno`` is 1-based when known."""

    def __init__(self, message: str, lineno: int | None = None):
        super().__init__(f"line {lineno}: {message}" if lineno else message)
        self.lineno = lineno


@dataclass(frozen=True)
class Req:
    id: int
    parent: int
    label: int

    def line(self) -> str:
        return f"req {self.id} {self.parent} {self.label}"


@dataclass(frozen=True)
class Contam:
    interval: DyadicInterval

    def line(self) -> str:
        return f"contam {self.interval.serialize()}"


Directive = Req | Contam


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line.split()


def _int(tok: str, lineno: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise StreamFormatError(f"{what} {tok!r} is not an integer", lineno) from None


def _interval(tok: str, lineno: int) -> DyadicInterval:
    try:
        return DyadicInterval.parse(tok)
    except ValueError:
        raise StreamFormatError(f"malformed bit string {tok!r}", lineno) from None


def parse_stream(text: str, max_label: int = DEFAULT_MAX_LABEL) -> list[Directive]:
    """Parse and validate a request stream (ids increasing, parents earlier, labels in range)."""
    out: list[Directive] = []
    seen = {ROOT}
    last_id = ROOT
    for lineno, toks in _content_lines(text):
        kind = toks[0]
        if kind == "req":
            if len(toks) != 4:
                raise StreamFormatError("expected 'req <id> <parent> <label>'", lineno)
            rid, parent, label = (_int(t, lineno, w) for t, w in zip(toks[1:], ("id", "parent", "label")))
            if rid <= last_id:
                raise StreamFormatError(f"id {rid} is not greater than {last_id}", lineno)
            if parent not in seen:
                raise StreamFormatError(f"parent {parent} has not appeared", lineno)
            if not 1 <= label <= max_label:
                raise StreamFormatError(f"label {label} outside 1..{max_label}", lineno)
            seen.add(rid)
            last_id = rid
            out.append(Req(rid, parent, label))
        elif kind == "contam":
            if len(toks) != 2:
                raise StreamFormatError("expected 'contam <bits>'", lineno)
            out.append(Contam(_interval(toks[1], lineno)))
        else:
            raise StreamFormatError(f"unknown directive {kind!r}", lineno)
    return out


def format_stream(directives, header: str | None = None) -> str:
    lines = [f"# {h}" for h in header.splitlines()] if header else []
    lines += [d.line() for d in directives]
    return "\n".join(lines) + "\n"


def parse_log(text: str) -> list[Event]:
    events: list[Event] = []
    for lineno, toks in _content_lines(text):
        kind = toks[0]
        if kind == "alloc" and len(toks) == 4:
            ev = Alloc(_int(toks[1], lineno, "id"), _interval(toks[2], lineno), _int(toks[3], lineno, "seq"))
        elif kind == "burn" and len(toks) == 3:
            ev = Burn(_interval(toks[1], lineno), _int(toks[2], lineno, "seq"))
        elif kind == "error" and len(toks) == 3:
            ev = Error(toks[1], _int(toks[2], lineno, "seq"))
        else:
            raise StreamFormatError(f"unrecognised event line {' '.join(toks)!r}", lineno)
        if events and ev.seq <= events[-1].seq:
            raise StreamFormatError("seq numbers must increase", lineno)
        events.append(ev)
    return events


def format_log(events) -> str:
    return "".join(ev.line() + "\n" for ev in events)


@dataclass
class RunResult:
    tree: RequestTree
    # stream id -> tree node id
    node_of: dict[int, int]
    violation: KraftViolation | None = None

    @property
    def ok(self) -> bool:
        return self.violation is None

    @property
    def log(self) -> list[Event]:
        """The event log with node ids translated back to stream ids."""
        back = {v: k for k, v in self.node_of.items()}
        if all(back.get(v) == v for v in back):
            return list(self.tree.log)
        return [Alloc(back[ev.node], ev.interval, ev.seq) if isinstance(ev, Alloc) else ev
                for ev in self.tree.log]


def run_stream(directives, after_step=None) -> RunResult:
    """Drive a fresh tree through ``directives``, stopping at the first violation.

    ``after_step(tree, directive)`` is called after every applied directive.
    """
    tree = RequestTree()
    node_of = {ROOT: ROOT}
    for d in directives:
        if isinstance(d, Contam):
            tree.contaminate(d.interval)
        else:
            try:
                v, _ = tree.add_request(node_of[d.parent], d.label)
            except KraftViolation as exc:
                return RunResult(tree, node_of, exc)
            node_of[d.id] = v
        if after_step is not None:
            after_step(tree, d)
    return RunResult(tree, node_of)
