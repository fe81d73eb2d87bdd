import pytest

from hierkraft.dyadic import DyadicInterval
from hierkraft.events import Alloc, Burn, Error
from hierkraft.stream import (
    Contam,
    Req,
    StreamFormatError,
    format_log,
    format_stream,
    parse_log,
    parse_stream,
    run_stream,
)


def test_parse_and_format_roundtrip():
    text = "# a comment\n\nreq 1 0 2\ncontam 01\nreq 3 1 4\ncontam -\n"
    ds = parse_stream(text)
    assert ds == [Req(1, 0, 2), Contam(DyadicInterval("01")), Req(3, 1, 4), Contam(DyadicInterval(""))]
    assert parse_stream(format_stream(ds, "hdr")) == ds


@pytest.mark.parametrize("text, line", [
    ("req 1 0 2\nreq 1 0 2\n", 2),
    ("req 1 2 2\n", 1),
    ("req 1 0 0\n", 1),
    ("req 1 0 63\n", 1),
    ("req 1 0\n", 1),
    ("\n\ncontam 012\n", 3),
    ("frob 1\n", 1),
])
def test_malformed_streams_report_line(text, line):
    with pytest.raises(StreamFormatError) as exc:
        parse_stream(text)
    assert exc.value.lineno == line
    assert f"line {line}:" in str(exc.value)


def test_max_label_is_configurable():
    assert parse_stream("req 1 0 100\n", max_label=128) == [Req(1, 0, 100)]


def test_log_roundtrip():
    evs = [Burn(DyadicInterval("0"), 1), Alloc(1, DyadicInterval("1"), 2), Error("kraft_violation", 3)]
    text = format_log(evs)
    assert text == "burn 0 1\nalloc 1 1 2\nerror kraft_violation 3\n"
    assert parse_log(text) == evs


def test_log_seq_must_increase():
    with pytest.raises(StreamFormatError):
        parse_log("alloc 1 0 2\nalloc 2 1 2\n")


def test_run_stream_uses_stream_ids():
    res = run_stream(parse_stream("req 5 0 2\nreq 9 5 3\n"))
    assert res.ok
    assert format_log(res.log) == "alloc 5 00 1\nalloc 9 000 2\n"


def test_run_stream_stops_at_violation():
    res = run_stream(parse_stream("req 1 0 1\nreq 2 0 1\nreq 3 0 1\nreq 4 0 9\n"))
    assert not res.ok
    assert format_log(res.log).splitlines()[-1] == "error kraft_violation 3"
    assert 4 not in res.node_of
