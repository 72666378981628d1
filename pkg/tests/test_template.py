import json
import re

import pytest

import symkit
from symkit.diagnostics import SymkitError
from symkit.parser import parse
from symkit.template import (
    bind_pair,
    identity_map,
    instantiate,
    load_template,
    render_text,
    validate_template,
)

TE_SPEC, _ = parse(symkit.fixture_text("te.symboleo"))
TE_TEMPLATE_JSON = symkit.fixture_text("te.cttpl.json")

FULL_VALUES = {
    "date": "2024-05-01",
    "buyer": "Acme Retail Ltd.",
    "prosumer": "Sunny Roofs Inc.",
    "energy_qnt": 100,
    "location": "12 Main St, Ottawa",
    "amount": 1500,
    "percentage": 5,
    "min": 210,
    "max": 250,
}


def template():
    return load_template(TE_TEMPLATE_JSON)


def pair():
    p, diags = bind_pair(template(), TE_SPEC, identity_map(template()))
    assert diags == []
    return p


def test_fixture_template_loads_and_validates():
    t = template()
    assert validate_template(t) == []
    assert [s.id for s in t.slots] == ["P1", "P2"]


def test_identity_map_binds_slots_to_obligations():
    p = pair()
    assert p.template.slot("P1").obligation == "O_deliver"
    assert p.template.slot("P2").obligation == "O_pay"


def test_slot_bound_to_missing_obligation():
    broken = TE_TEMPLATE_JSON.replace('"obligation": "O_deliver"', '"obligation": "O_missing"')
    t = load_template(broken)
    p, diags = bind_pair(t, TE_SPEC, identity_map(t))
    assert p is None
    assert any(d.code == "E502" and "O_missing" in d.message for d in diags)


def test_unmapped_parameter():
    t = template()
    mapping = identity_map(t)
    del mapping["location"]
    p, diags = bind_pair(t, TE_SPEC, mapping)
    assert p is None
    assert any(d.code == "E501" and "location" in d.message for d in diags)


def test_map_kind_mismatch():
    t = template()
    mapping = identity_map(t)
    mapping["location"] = "amount"  # String template param -> Money spec param
    p, diags = bind_pair(t, TE_SPEC, mapping)
    assert p is None
    assert any(d.code == "E503" for d in diags)


def test_instantiate_substitutes_and_strips_markers():
    text = instantiate(pair(), FULL_VALUES)
    assert "Prosumer shall dispatch 100 kW of power to the Buyer." in text
    assert "as of May 1, 2024, between Acme Retail Ltd. as Buyer" in text


def test_instantiate_output_has_no_placeholder_or_marker_tokens():
    text = instantiate(pair(), FULL_VALUES)
    assert re.search(r"<[A-Za-z_][A-Za-z0-9_]*>", text) is None
    assert re.search(r"\[P\d+\]", text) is None
    numbered = [l for l in text.splitlines() if re.match(r"\d+\. ", l)]
    assert len(numbered) == 5


def test_instantiate_structure_preserved():
    t = template()
    text = instantiate(pair(), FULL_VALUES)
    assert len(text.splitlines()) == len(t.clauses)


def test_missing_value():
    values = dict(FULL_VALUES)
    del values["amount"]
    with pytest.raises(SymkitError) as e:
        instantiate(pair(), values)
    assert e.value.code == "E504"
    assert "amount" in e.value.message


def test_non_numeric_value_for_number_kind():
    values = dict(FULL_VALUES, energy_qnt="abc")
    with pytest.raises(SymkitError) as e:
        instantiate(pair(), values)
    assert e.value.code == "E505"


def test_non_date_value_for_date_kind():
    values = dict(FULL_VALUES, date="soonish")
    with pytest.raises(SymkitError) as e:
        instantiate(pair(), values)
    assert e.value.code == "E505"


def test_instantiate_deterministic():
    assert instantiate(pair(), FULL_VALUES) == instantiate(pair(), FULL_VALUES)


def test_render_text_with_adjunct():
    text = render_text(template(), {"P2": "before March 31, 2024"})
    assert "to the Prosumer before March 31, 2024." in text
    assert "[P2]" not in text
    assert "to the Buyer." in text  # P1 marker dropped with its space


def test_placeholder_without_parameter_rejected():
    raw = json.loads(TE_TEMPLATE_JSON)
    raw["clauses"][2] += " near <landmark>"
    with pytest.raises(SymkitError) as e:
        load_template(json.dumps(raw))
    assert e.value.code == "E510"


def test_duplicate_slot_marker_rejected():
    raw = json.loads(TE_TEMPLATE_JSON)
    raw["clauses"][2] += " [P1]"
    with pytest.raises(SymkitError) as e:
        load_template(json.dumps(raw))
    assert e.value.code == "E511"


def test_anchor_mismatch_rejected():
    raw = json.loads(TE_TEMPLATE_JSON)
    raw["slots"][0]["anchor"] = 3
    with pytest.raises(SymkitError) as e:
        load_template(json.dumps(raw))
    assert e.value.code == "E512"
