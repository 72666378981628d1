"""Controlled-natural-language refinements.

Normative grammar (docs/cnl.md):

    REF    := "before" DATE | "after" DATE | "between" DATE "and" DATE
            | "within" INT UNIT "of" PHRASE | "if" PHRASE
    PHRASE := PARTY GERUND [PARTY | ASSET]
    DATE   := MonthName D, YYYY | "[" NAME "]"
    UNIT   := day(s) | week(s) | month(s)

A bracketed DATE introduces a new Date parameter instead of a constant
(the between-form is typically used with two placeholders). Anything not
derivable from this grammar is rejected with E602 plus a nearest-match
suggestion; grammatical phrases whose names or verbs do not resolve
against the paired spec are rejected with E603.
"""

from __future__ import annotations

import datetime as dt
import difflib
import re
from dataclasses import dataclass
from typing import Union

from .diagnostics import (
    Diagnostic,
    E_NOT_IN_CNL,
    E_PHRASE_UNRESOLVED,
    E_UNKNOWN_SLOT,
)
from .model import Category, Spec, UNITS
from .template import MONTHS, TemplatePair, format_date


@dataclass(frozen=True)
class DatePlaceholder:
    name: str


CnlDate = Union[dt.date, DatePlaceholder]


@dataclass(frozen=True)
class EventPhrase:
    subject: str          # party surface name as entered
    verb: str             # gerund as entered
    object: str | None = None

    def surface(self) -> str:
        return f"{self.subject} {self.verb}" + (f" {self.object}" if self.object else "")


@dataclass(frozen=True)
class Before:
    date: CnlDate


@dataclass(frozen=True)
class After:
    date: CnlDate


@dataclass(frozen=True)
class Between:
    start: CnlDate
    end: CnlDate


@dataclass(frozen=True)
class WithinOf:
    magnitude: int
    unit: str
    phrase: EventPhrase


@dataclass(frozen=True)
class If:
    phrase: EventPhrase


Form = Union[Before, After, Between, WithinOf, If]


@dataclass(frozen=True)
class CnlRefinement:
    slot: str
    form: Form
    surface: str

    @property
    def is_conditional(self) -> bool:
        return isinstance(self.form, If)


_DATE = r"(?:[A-Z][a-z]+ \d{1,2}, \d{4}|\[[A-Za-z_][A-Za-z0-9_]*\])"
_WORD = r"[A-Za-z_][A-Za-z0-9_]*"
_PHRASE = rf"({_WORD}) ({_WORD})(?: ({_WORD}))?"

_FORMS = [
    ("before", re.compile(rf"before ({_DATE})$")),
    ("after", re.compile(rf"after ({_DATE})$")),
    ("between", re.compile(rf"between ({_DATE}) and ({_DATE})$")),
    ("within", re.compile(rf"within (\d+) (days?|weeks?|months?) of {_PHRASE}$")),
    ("if", re.compile(rf"if {_PHRASE}$")),
]

_SKELETONS = (
    "before <date>",
    "after <date>",
    "between <date> and <date>",
    "within <number> <unit> of <party> <verb>ing <party or asset>",
    "if <party> <verb>ing <party or asset>",
)


def parse_cnl(text: str, pair: TemplatePair,
              slot_id: str) -> tuple[CnlRefinement | None, list[Diagnostic]]:
    if pair.template.slot(slot_id) is None:
        return None, [Diagnostic(E_UNKNOWN_SLOT, f"unknown slot '{slot_id}'")]
    surface = " ".join(text.split())
    for name, pattern in _FORMS:
        m = pattern.fullmatch(surface)
        if m is None:
            continue
        try:
            form = _build_form(name, m, pair)
        except _Reject as r:
            return None, [Diagnostic(r.code, r.message)]
        return CnlRefinement(slot_id, form, surface), []
    suggestion = _nearest(surface)
    return None, [Diagnostic(
        E_NOT_IN_CNL,
        f"'{surface}' is not in the CNL; closest form: {suggestion}")]


class _Reject(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


def _build_form(name: str, m: re.Match, pair: TemplatePair) -> Form:
    if name == "before":
        return Before(_date(m.group(1)))
    if name == "after":
        return After(_date(m.group(1)))
    if name == "between":
        start, end = _date(m.group(1)), _date(m.group(2))
        if isinstance(start, dt.date) and isinstance(end, dt.date) and start > end:
            raise _Reject(E_NOT_IN_CNL,
                          f"'between' dates are out of order: {format_date(start)} is after {format_date(end)}")
        return Between(start, end)
    if name == "within":
        magnitude = int(m.group(1))
        if magnitude < 1:
            raise _Reject(E_NOT_IN_CNL, "window magnitude must be at least 1")
        unit = m.group(2) if m.group(2).endswith("s") else m.group(2) + "s"
        phrase = _phrase(m.group(3), m.group(4), m.group(5), pair)
        return WithinOf(magnitude, unit, phrase)
    phrase = _phrase(m.group(1), m.group(2), m.group(3), pair)
    return If(phrase)


def _date(text: str) -> CnlDate:
    if text.startswith("["):
        return DatePlaceholder(text[1:-1])
    month_name, rest = text.split(" ", 1)
    day, year = rest.split(", ")
    if month_name not in MONTHS:
        raise _Reject(E_NOT_IN_CNL, f"unknown month name '{month_name}'")
    try:
        return dt.date(int(year), MONTHS.index(month_name) + 1, int(day))
    except ValueError:
        raise _Reject(E_NOT_IN_CNL, f"'{text}' is not a valid calendar date") from None


def _phrase(subject: str, verb: str, obj: str | None, pair: TemplatePair) -> EventPhrase:
    if resolve_entity(subject, pair.spec, roles_only=True) is None:
        raise _Reject(E_PHRASE_UNRESOLVED, f"'{subject}' does not name a contract party")
    if stem_gerund(verb, pair.template.lexicon) is None:
        raise _Reject(E_PHRASE_UNRESOLVED,
                      f"'{verb}' is not a known verb (lexicon: {', '.join(sorted(pair.template.lexicon))})")
    if obj is not None and resolve_entity(obj, pair.spec) is None:
        raise _Reject(E_PHRASE_UNRESOLVED, f"'{obj}' does not name a party or asset")
    return EventPhrase(subject, verb, obj)


def _nearest(surface: str) -> str:
    head = surface.split(" ", 1)[0].lower() if surface else ""
    close = difflib.get_close_matches(head, [s.split(" ", 1)[0] for s in _SKELETONS], n=1, cutoff=0.4)
    if close:
        for s in _SKELETONS:
            if s.startswith(close[0]):
                return f"'{s}'"
    return "one of " + ", ".join(f"'{s}'" for s in _SKELETONS)


# --- phrase-element resolution ----------------------------------------------

def resolve_entity(name: str, spec: Spec, roles_only: bool = False) -> str | None:
    """Resolve a surface name to a binding: case-insensitive match on the
    binding name, or on its domain type name when that type has exactly one
    binding. Returns the binding name, or None when unknown/ambiguous."""
    lowered = name.lower()
    categories = (Category.ROLE,) if roles_only else (Category.ROLE, Category.ASSET)
    candidates = [b for c in categories for b in spec.bindings_of(c)]
    for b in candidates:
        if b.name.lower() == lowered:
            return b.name
    by_type = [b for b in candidates if b.type.lower() == lowered]
    if len(by_type) == 1:
        return by_type[0].name
    return None


def display_name(binding_name: str, spec: Spec) -> str:
    """NL-facing name: the domain type name when unambiguous, else the binding name."""
    b = spec.binding(binding_name)
    if b is None:
        return binding_name
    same_type = [x for x in spec.bindings if x.type == b.type]
    return b.type if len(same_type) == 1 else b.name


def stem_gerund(verb: str, lexicon: tuple[str, ...]) -> str | None:
    """Map a gerund back to a lexicon stem: strip -ing, then try the bare
    base, collapsing a doubled final consonant, and restoring a final e."""
    lowered = verb.lower()
    if not lowered.endswith("ing") or len(lowered) <= 3:
        return None
    base = lowered[:-3]
    candidates = [base]
    if len(base) >= 2 and base[-1] == base[-2] and base[-1] not in "aeiou":
        candidates.append(base[:-1])
    candidates.append(base + "e")
    for c in candidates:
        if c in lexicon:
            return c
    return None


def gerund(stem: str) -> str:
    """Display gerund for a lexicon stem (pay -> paying, ship -> shipping).

    Consonant doubling only for short stems, a stand-in for final-syllable
    stress (ship -> shipping, but deliver -> delivering)."""
    if stem.endswith("e") and not stem.endswith("ee"):
        return stem[:-1] + "ing"
    if (3 <= len(stem) <= 4 and stem[-1] not in "aeiouwxy"
            and stem[-2] in "aeiou" and stem[-3] not in "aeiou"):
        return stem + stem[-1] + "ing"
    return stem + "ing"


# --- option tree --------------------------------------------------------------

def available_options(pair: TemplatePair, slot_id: str) -> dict:
    """The CNL choice tree for a slot: top-level forms plus the fields each
    form needs, with party/verb choices enumerated from the paired spec."""
    slot = pair.template.slot(slot_id)
    if slot is None:
        from .diagnostics import SymkitError
        raise SymkitError(E_UNKNOWN_SLOT, f"unknown slot '{slot_id}'")
    spec = pair.spec
    subjects = sorted(display_name(b.name, spec) for b in spec.bindings_of(Category.ROLE))
    objects = sorted(
        [display_name(b.name, spec) for b in spec.bindings_of(Category.ROLE)]
        + [display_name(b.name, spec) for b in spec.bindings_of(Category.ASSET)])
    verbs = sorted(gerund(v) for v in pair.template.lexicon)
    date_field = {"name": "date", "type": "date", "placeholder_allowed": True}
    phrase_field = {
        "name": "phrase", "type": "event_phrase",
        "subjects": subjects, "verbs": verbs, "objects": objects,
        "object_optional": True,
    }
    return {
        "slot": slot_id,
        "options": [
            {"form": "before", "pattern": "before <date>", "fields": [date_field]},
            {"form": "after", "pattern": "after <date>", "fields": [date_field]},
            {"form": "between", "pattern": "between <date> and <date>",
             "fields": [dict(date_field, name="start"), dict(date_field, name="end")]},
            {"form": "within_of", "pattern": "within <number> <unit> of <event phrase>",
             "fields": [
                 {"name": "magnitude", "type": "integer", "min": 1},
                 {"name": "unit", "type": "choice", "choices": ["days", "weeks", "months"]},
                 phrase_field,
             ]},
            {"form": "if", "pattern": "if <event phrase>", "fields": [phrase_field]},
        ],
    }
