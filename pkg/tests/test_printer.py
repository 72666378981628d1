"""Canonical printing: golden fixture, fixpoint, round trip, window hoisting."""

import datetime as dt

import pytest

import symkit
from symkit.model import (
    AbsoluteInterval,
    And,
    DateLit,
    Happens,
    HappensWithin,
    Not,
    Or,
    RelativeInterval,
)
from symkit.parser import parse
from symkit.printer import print_spec

from genspec import random_spec

TE = symkit.fixture_text("te.symboleo")


def test_golden_fixture_is_canonical():
    spec, diags = parse(TE)
    assert diags == []
    assert print_spec(spec) == TE


def test_print_parse_fixpoint():
    spec, _ = parse(TE)
    once = print_spec(spec)
    again = print_spec(parse(once)[0])
    assert once == again


def test_whitespace_differences_canonicalize():
    messy = TE.replace("  ", "\t\t").replace(";\n", " ;\n\n")
    spec, diags = parse(messy)
    assert diags == []
    assert print_spec(spec) == TE


def test_one_line_per_obligation_and_power():
    spec, _ = parse(TE)
    lines = TE.splitlines()
    start = lines.index("Obligations") + 1
    end = lines.index("", start)
    assert end - start == len(spec.obligations)
    pstart = lines.index("Powers") + 1
    power_lines = [l for l in lines[pstart:] if l.strip()]
    assert len(power_lines) == len(spec.powers)


def test_relative_window_is_hoisted_and_named():
    spec, _ = parse(TE)
    refined = _with_consequent(spec, "O_pay",
                               HappensWithin("evt_pay", RelativeInterval("evt_dispatch_energy", 2, "weeks")))
    text = print_spec(refined)
    assert "  win_O_pay: Window(2, weeks, evt_dispatch_energy);" in text
    assert "HappensWithin(evt_pay, win_O_pay)" in text
    back, diags = parse(text)
    assert diags == []
    assert back == refined


def test_absolute_interval_stays_inline():
    spec, _ = parse(TE)
    refined = _with_consequent(
        spec, "O_deliver",
        HappensWithin("evt_dispatch_energy",
                      AbsoluteInterval(DateLit(dt.date(2024, 5, 1)),
                                       DateLit(dt.date(2024, 5, 31)))))
    text = print_spec(refined)
    assert "HappensWithin(evt_dispatch_energy, Interval(2024-05-01, 2024-05-31))" in text
    assert "Window(" not in text


def test_proposition_parenthesization_round_trips():
    cases = [
        And(Or(Happens("evt_pay"), Happens("evt_pay")), Happens("evt_pay")),
        Or(Happens("evt_pay"), And(Happens("evt_pay"), Happens("evt_pay"))),
        Not(And(Happens("evt_pay"), Happens("evt_pay"))),
        Not(Not(Happens("evt_pay"))),
        And(Happens("evt_pay"), And(Happens("evt_pay"), Happens("evt_pay"))),
    ]
    spec, _ = parse(TE)
    for prop in cases:
        refined = _with_consequent(spec, "O_pay", prop)
        back, diags = parse(print_spec(refined))
        assert diags == []
        assert back == refined


@pytest.mark.parametrize("seed", range(40))
def test_roundtrip_on_random_specs(seed):
    spec = random_spec(seed)
    text = print_spec(spec)
    back, diags = parse(text)
    assert diags == [], text
    assert back == spec
    assert print_spec(back) == text


def _with_consequent(spec, oid, consequent):
    obligations = tuple(
        o if o.id != oid else type(o)(o.id, o.debtor, o.creditor, o.trigger, consequent)
        for o in spec.obligations
    )
    return type(spec)(spec.name, spec.parameters, spec.domain, spec.bindings,
                      obligations, spec.powers)
