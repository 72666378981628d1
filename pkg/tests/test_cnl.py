"""CNL parsing, options, and accept/reject soundness against the grammar."""

import datetime as dt
import random

import pytest

import symkit
from symkit.cnl import (
    After,
    Before,
    Between,
    DatePlaceholder,
    If,
    WithinOf,
    available_options,
    gerund,
    parse_cnl,
    stem_gerund,
)
from symkit.diagnostics import SymkitError
from symkit.parser import parse
from symkit.template import MONTHS, bind_pair, identity_map, load_template

SPEC, _ = parse(symkit.fixture_text("te.symboleo"))
TEMPLATE = load_template(symkit.fixture_text("te.cttpl.json"))
PAIR, _ = bind_pair(TEMPLATE, SPEC, identity_map(TEMPLATE))


def ok(text, slot="P1"):
    refinement, diags = parse_cnl(text, PAIR, slot)
    assert diags == [], diags
    return refinement


def rejected(text, slot="P1"):
    refinement, diags = parse_cnl(text, PAIR, slot)
    assert refinement is None
    assert len(diags) == 1
    return diags[0]


def test_before_concrete_date():
    r = ok("before March 31, 2024", slot="P2")
    assert r.form == Before(dt.date(2024, 3, 31))
    assert r.surface == "before March 31, 2024"


def test_within_of_phrase():
    r = ok("within 2 weeks of Buyer paying Prosumer")
    assert r.form == WithinOf(2, "weeks", r.form.phrase)
    assert r.form.phrase.subject == "Buyer"
    assert r.form.phrase.verb == "paying"
    assert r.form.phrase.object == "Prosumer"


def test_between_placeholders():
    r = ok("between [START_DATE] and [END_DATE]")
    assert r.form == Between(DatePlaceholder("START_DATE"), DatePlaceholder("END_DATE"))


def test_after_and_singular_unit():
    assert ok("after January 1, 2025").form == After(dt.date(2025, 1, 1))
    assert ok("within 1 week of Prosumer dispatching energy").form.unit == "weeks"


def test_conditional():
    r = ok("if Buyer paying Prosumer", slot="P2")
    assert isinstance(r.form, If)
    assert r.is_conditional


def test_out_of_grammar_is_e602_with_suggestion():
    d = rejected("sometime soon")
    assert d.code == "E602"
    assert "closest form" in d.message or "one of" in d.message


def test_misspelled_keyword_suggests_nearest():
    d = rejected("befor March 31, 2024")
    assert d.code == "E602"
    assert "before <date>" in d.message


def test_unknown_party_is_e603():
    d = rejected("within 2 weeks of Regulator paying Prosumer")
    assert d.code == "E603"
    assert "Regulator" in d.message


def test_unknown_verb_is_e603():
    d = rejected("within 2 weeks of Buyer auditing Prosumer")
    assert d.code == "E603"
    assert "auditing" in d.message


def test_dates_out_of_order_rejected():
    d = rejected("between April 1, 2024 and March 1, 2024")
    assert d.code == "E602"


def test_invalid_calendar_date_rejected():
    d = rejected("before February 30, 2024")
    assert d.code == "E602"


def test_unknown_slot_is_e601():
    _, diags = parse_cnl("before March 31, 2024", PAIR, "P9")
    assert [d.code for d in diags] == ["E601"]


def test_whitespace_is_normalized():
    r = ok("  before   March 31,   2024 ", slot="P2")
    assert r.form == Before(dt.date(2024, 3, 31))
    assert r.surface == "before March 31, 2024"


def test_stemming():
    lex = ("pay", "dispatch", "deliver", "inspect", "ship", "provide")
    assert stem_gerund("paying", lex) == "pay"
    assert stem_gerund("dispatching", lex) == "dispatch"
    assert stem_gerund("shipping", lex) == "ship"
    assert stem_gerund("providing", lex) == "provide"
    assert stem_gerund("auditing", lex) is None
    assert stem_gerund("pay", lex) is None


def test_gerund_display_forms():
    assert gerund("pay") == "paying"
    assert gerund("dispatch") == "dispatching"
    assert gerund("ship") == "shipping"
    assert gerund("provide") == "providing"


# --- option tree ---------------------------------------------------------------

def test_options_include_between_form():
    options = available_options(PAIR, "P1")
    patterns = [o["pattern"] for o in options["options"]]
    assert "between <date> and <date>" in patterns


def test_options_subject_choices_enumerate_role_bindings():
    options = available_options(PAIR, "P1")
    within = next(o for o in options["options"] if o["form"] == "within_of")
    phrase = next(f for f in within["fields"] if f["type"] == "event_phrase")
    assert phrase["subjects"] == ["Buyer", "Prosumer"]
    assert phrase["verbs"] == ["delivering", "dispatching", "inspecting", "paying"]
    assert phrase["objects"] == ["Buyer", "Energy", "Prosumer"]


def test_options_unknown_slot():
    with pytest.raises(SymkitError) as e:
        available_options(PAIR, "P9")
    assert e.value.code == "E601"


def test_options_deterministic():
    assert available_options(PAIR, "P1") == available_options(PAIR, "P1")


# --- accept/reject soundness over the published grammar -------------------------

def generate_valid(rng: random.Random) -> str:
    def date():
        if rng.random() < 0.3:
            return f"[{rng.choice(['D_ONE', 'D_TWO', 'WHEN'])}]"
        month = rng.choice(MONTHS)
        return f"{month} {rng.randint(1, 28)}, {rng.randint(2020, 2030)}"

    def concrete_dates_sorted():
        d1 = dt.date(rng.randint(2020, 2029), rng.randint(1, 12), rng.randint(1, 28))
        d2 = dt.date(rng.randint(2020, 2029), rng.randint(1, 12), rng.randint(1, 28))
        if d1 > d2:
            d1, d2 = d2, d1
        fmt = lambda d: f"{MONTHS[d.month - 1]} {d.day}, {d.year}"
        return fmt(d1), fmt(d2)

    def phrase():
        subject = rng.choice(["Buyer", "Prosumer", "buyer", "prosumer"])
        verb = gerund(rng.choice(TEMPLATE.lexicon))
        if rng.random() < 0.5:
            return f"{subject} {verb}"
        obj = rng.choice(["Buyer", "Prosumer", "energy", "Energy"])
        return f"{subject} {verb} {obj}"

    kind = rng.randrange(5)
    if kind == 0:
        return f"before {date()}"
    if kind == 1:
        return f"after {date()}"
    if kind == 2:
        a, b = concrete_dates_sorted()
        return f"between {a} and {b}"
    if kind == 3:
        unit = rng.choice(["day", "days", "week", "weeks", "month", "months"])
        return f"within {rng.randint(1, 9)} {unit} of {phrase()}"
    return f"if {phrase()}"


def corrupt(text: str, rng: random.Random) -> tuple[str, int]:
    words = text.split()
    op = rng.randrange(4)
    if op == 0:
        words[0] = "perhaps"                      # unknown leading keyword
    elif op == 1:
        del words[rng.randrange(len(words))]      # drop a token
        if not words:
            words = ["?"]
    elif op == 2:
        words.append("immediately")               # trailing junk
    else:
        words.insert(0, "not")                    # negation is out of grammar
    return " ".join(words), op


def test_grammar_generated_strings_are_accepted():
    rng = random.Random(7)
    for _ in range(200):
        text = generate_valid(rng)
        refinement, diags = parse_cnl(text, PAIR, "P1")
        assert refinement is not None, (text, diags)


def test_corrupted_strings_are_rejected():
    rng = random.Random(8)
    survivors = 0
    for _ in range(200):
        text, op = corrupt(generate_valid(rng), rng)
        refinement, diags = parse_cnl(text, PAIR, "P1")
        if op == 1:
            # Dropping a token usually breaks the derivation, but deleting the
            # optional phrase object leaves a shorter valid sentence.
            survivors += refinement is not None
        else:
            assert refinement is None, text
            assert diags[0].code in ("E602", "E603")
    assert survivors <= 15
