import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import symkit
from symkit.model import (
    Happens,
    HappensWithin,
    RelativeInterval,
    TrueLit,
)
from symkit.parser import parse, tokenize

TE = symkit.fixture_text("te.symboleo")

MINIMAL = """Contract X()

Domain
  R1: Role;
  R2: Role;
  Ping: Event;

Declarations
  a: R1;
  b: R2;
  evt_ping: Ping;

Obligations
{obligations}
Powers
{powers}"""


def make_spec(obligations: str = "", powers: str = "") -> str:
    return MINIMAL.format(obligations=obligations, powers=powers)


def test_paper_obligation_line():
    spec, diags = parse(TE)
    assert diags == []
    o = spec.obligation("O_deliver")
    assert o.debtor == "prosumer"
    assert o.creditor == "buyer"
    assert o.trigger == TrueLit()
    assert o.consequent == Happens("evt_dispatch_energy")


def test_empty_obligations_and_powers():
    spec, diags = parse(make_spec())
    assert diags == []
    assert spec.obligations == ()
    assert spec.powers == ()


def test_missing_semicolon_is_e001_with_span():
    src = make_spec(obligations="  O1: Obligation(a, b, true, Happens(evt_ping))\n")
    spec, diags = parse(src)
    assert spec is None
    codes = [d.code for d in diags]
    assert "E001" in codes
    d = next(d for d in diags if d.code == "E001")
    assert d.span.start.line >= 14  # points into the Obligations section, not at 1:1


def test_recovers_to_report_multiple_errors():
    src = make_spec(obligations=(
        "  O1: Obligation(a, b, true, Happens(evt_ping);\n"
        "  O2: Obligation(a b, true, Happens(evt_ping));\n"
    ))
    spec, diags = parse(src)
    assert spec is None
    assert len([d for d in diags if d.code == "E001"]) >= 2


def test_diagnostics_deterministic():
    src = "Contract ((" + TE
    a = parse(src)[1]
    b = parse(src)[1]
    assert [d.to_json() for d in a] == [d.to_json() for d in b]


def test_comments_are_skipped():
    src = make_spec().replace("Domain", "// a comment\nDomain")
    spec, diags = parse(src)
    assert diags == []
    assert spec.name == "X"


def test_window_declaration_is_inlined():
    src = make_spec(obligations=(
        "  O1: Obligation(a, b, true, HappensWithin(evt_ping, w));\n"
    )).replace("  evt_ping: Ping;", "  evt_ping: Ping;\n  w: Window(2, weeks, evt_ping);")
    spec, diags = parse(src)
    assert diags == []
    o = spec.obligation("O1")
    assert o.consequent == HappensWithin("evt_ping", RelativeInterval("evt_ping", 2, "weeks"))


def test_unresolved_window_reference():
    src = make_spec(obligations=(
        "  O1: Obligation(a, b, true, HappensWithin(evt_ping, nowhere));\n"
    ))
    spec, diags = parse(src)
    assert spec is None
    assert any(d.code == "E201" and "nowhere" in d.message for d in diags)


def test_duplicate_window_name():
    extra = ("  evt_ping: Ping;\n"
             "  w: Window(1, days, evt_ping);\n"
             "  w: Window(2, days, evt_ping);")
    src = make_spec().replace("  evt_ping: Ping;", extra)
    spec, diags = parse(src)
    assert any(d.code == "E101" for d in diags)


def test_bad_date_literal():
    src = make_spec(obligations=(
        "  O1: Obligation(a, b, true, HappensBefore(evt_ping, 2024-13-99));\n"
    ))
    spec, diags = parse(src)
    assert spec is None
    assert any(d.code == "E001" and "date" in d.message for d in diags)


def test_keyword_cannot_be_identifier():
    src = make_spec(obligations="  Obligation: Obligation(a, b, true, true);\n")
    spec, diags = parse(src)
    assert spec is None


def test_parse_never_raises_on_fixture_mutations():
    rng = random.Random(99)
    data = TE.encode()
    for _ in range(300):
        b = bytearray(data)
        for _ in range(rng.randint(1, 6)):
            op = rng.randint(0, 2)
            pos = rng.randrange(len(b))
            if op == 0:
                b[pos] = rng.randrange(256)
            elif op == 1:
                del b[pos]
            else:
                b.insert(pos, rng.randrange(256))
        text = bytes(b).decode("utf-8", errors="replace")
        parse(text)  # must not raise


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=200))
def test_parse_total_on_arbitrary_text(text):
    spec, diags = parse(text)
    if spec is None:
        assert any(d.severity == "Error" for d in diags)


def test_tokenizer_positions_are_one_based():
    toks = tokenize("Contract X()")
    assert toks[0].span.start.line == 1
    assert toks[0].span.start.col == 1
    assert toks[1].span.start.col == 10
