"""NL contract templates: parameterized clauses with refinement slots.

Templates are stored as JSON (`.cttpl.json`, documented in docs/formats.md):
{name, clauses: [text...], parameters: [{name, kind}...],
 slots: [{id, clause, anchor, obligation}...], lexicon: [verb stems...]}.

Clause 0 is the unnumbered preamble; the remaining clauses render as a
numbered list. Parameter placeholders use `<name>`; slot markers use the
visible `[P1]` notation and are positional anchors, never rendered text.
"""

from __future__ import annotations

import datetime as dt
import json
import re
from dataclasses import dataclass, field

from .diagnostics import (
    Diagnostic,
    E_BAD_ANCHOR,
    E_DUPLICATE_ID,
    E_MAP_KIND_MISMATCH,
    E_MISSING_VALUE,
    E_PLACEHOLDER_MISMATCH,
    E_SLOT_MARKER,
    E_SLOT_NO_OBLIGATION,
    E_UNMAPPED_PARAM,
    E_VALUE_KIND,
    SymkitError,
    has_errors,
)
from .model import NUMERIC_KINDS, PARAM_KINDS, Spec

PLACEHOLDER_RE = re.compile(r"<([A-Za-z_][A-Za-z0-9_]*)>")
MARKER_RE = re.compile(r"\[(P\d+)\]")

DEFAULT_LEXICON = ("pay", "dispatch", "deliver", "inspect")

MONTHS = ("January", "February", "March", "April", "May", "June", "July",
          "August", "September", "October", "November", "December")


@dataclass(frozen=True)
class TemplateParameter:
    name: str
    kind: str


@dataclass(frozen=True)
class RefinementSlot:
    id: str
    clause: int
    anchor: int
    obligation: str


@dataclass(frozen=True)
class ContractTemplate:
    name: str
    clauses: tuple[str, ...]
    parameters: tuple[TemplateParameter, ...]
    slots: tuple[RefinementSlot, ...]
    lexicon: tuple[str, ...] = DEFAULT_LEXICON

    def slot(self, slot_id: str) -> RefinementSlot | None:
        for s in self.slots:
            if s.id == slot_id:
                return s
        return None

    def parameter(self, name: str) -> TemplateParameter | None:
        for p in self.parameters:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True)
class TemplatePair:
    template: ContractTemplate
    spec: Spec
    param_map: dict[str, str] = field(default_factory=dict)


def load_template(text: str) -> ContractTemplate:
    """Parse and structurally validate template JSON; raises SymkitError."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise SymkitError(E_PLACEHOLDER_MISMATCH, f"template is not valid JSON: {e}") from e
    try:
        template = ContractTemplate(
            name=str(raw["name"]),
            clauses=tuple(str(c) for c in raw["clauses"]),
            parameters=tuple(TemplateParameter(str(p["name"]), str(p["kind"]))
                             for p in raw["parameters"]),
            slots=tuple(RefinementSlot(str(s["id"]), int(s["clause"]),
                                       int(s["anchor"]), str(s["obligation"]))
                        for s in raw["slots"]),
            lexicon=tuple(str(v) for v in raw.get("lexicon", DEFAULT_LEXICON)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise SymkitError(E_PLACEHOLDER_MISMATCH, f"malformed template JSON: {e}") from e
    diags = validate_template(template)
    if has_errors(diags):
        raise SymkitError(diags[0].code, diags[0].message, diags)
    return template


def validate_template(t: ContractTemplate) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    declared = {p.name for p in t.parameters}
    used: set[str] = set()
    for clause in t.clauses:
        used.update(PLACEHOLDER_RE.findall(clause))
    for name in sorted(used - declared):
        diags.append(Diagnostic(E_PLACEHOLDER_MISMATCH,
                                f"placeholder '<{name}>' has no declared parameter"))
    for name in sorted(declared - used):
        diags.append(Diagnostic(E_PLACEHOLDER_MISMATCH,
                                f"parameter '{name}' never appears in any clause"))
    for p in t.parameters:
        if p.kind not in PARAM_KINDS:
            diags.append(Diagnostic(E_PLACEHOLDER_MISMATCH,
                                    f"parameter '{p.name}' has unknown kind '{p.kind}'"))
    seen: set[str] = set()
    for s in t.slots:
        if s.id in seen:
            diags.append(Diagnostic(E_DUPLICATE_ID, f"duplicate slot id '{s.id}'"))
        seen.add(s.id)
        if not 0 <= s.clause < len(t.clauses):
            diags.append(Diagnostic(E_SLOT_MARKER,
                                    f"slot '{s.id}' points at clause {s.clause}, out of range"))
            continue
        marker = f"[{s.id}]"
        count = sum(c.count(marker) for c in t.clauses)
        if count != 1:
            diags.append(Diagnostic(E_SLOT_MARKER,
                                    f"marker '{marker}' appears {count} times, expected exactly once"))
            continue
        pos = t.clauses[s.clause].find(marker)
        if pos < 0:
            diags.append(Diagnostic(E_SLOT_MARKER,
                                    f"marker '{marker}' is not in clause {s.clause}"))
        elif pos != s.anchor:
            diags.append(Diagnostic(E_BAD_ANCHOR,
                                    f"slot '{s.id}' anchor {s.anchor} does not match marker position {pos}"))
    return diags


def bind_pair(template: ContractTemplate, spec: Spec,
              param_map: dict[str, str]) -> tuple[TemplatePair | None, list[Diagnostic]]:
    """Pair a template with its base spec. The map sends template parameter
    names to spec parameter names and must be total and kind-preserving."""
    diags: list[Diagnostic] = []
    for p in template.parameters:
        target = param_map.get(p.name)
        if target is None:
            diags.append(Diagnostic(E_UNMAPPED_PARAM,
                                    f"template parameter '{p.name}' is not mapped"))
            continue
        sp = spec.parameter(target)
        if sp is None:
            diags.append(Diagnostic(E_UNMAPPED_PARAM,
                                    f"template parameter '{p.name}' maps to unknown spec parameter '{target}'"))
        elif sp.kind != p.kind:
            diags.append(Diagnostic(E_MAP_KIND_MISMATCH,
                                    f"'{p.name}' is {p.kind} but spec parameter '{target}' is {sp.kind}"))
    for s in template.slots:
        if spec.obligation(s.obligation) is None:
            diags.append(Diagnostic(E_SLOT_NO_OBLIGATION,
                                    f"slot '{s.id}' binds to missing obligation '{s.obligation}'"))
    if diags:
        return None, diags
    return TemplatePair(template, spec, dict(param_map)), []


def identity_map(template: ContractTemplate) -> dict[str, str]:
    return {p.name: p.name for p in template.parameters}


def render_text(template: ContractTemplate, adjuncts: dict[str, str] | None = None) -> str:
    """Template text with slot markers replaced by adjunct text (refined slots)
    or dropped together with one preceding space (unrefined slots)."""
    adjuncts = adjuncts or {}
    out = []
    for clause in template.clauses:
        def sub(m: re.Match) -> str:
            return adjuncts.get(m.group(1), "\0")
        text = MARKER_RE.sub(sub, clause)
        text = text.replace(" \0", "").replace("\0", "")
        out.append(text)
    return _join_clauses(out)


def _join_clauses(clauses: list[str]) -> str:
    rendered = [clauses[0]] if clauses else []
    rendered += [f"{i}. {c}" for i, c in enumerate(clauses[1:], start=1)]
    return "\n".join(rendered) + "\n"


def instantiate(pair: TemplatePair, values: dict) -> str:
    """Concrete NL contract text: placeholders substituted, markers removed."""
    rendered: dict[str, str] = {}
    for p in pair.template.parameters:
        if p.name not in values:
            raise SymkitError(E_MISSING_VALUE, f"no value for parameter '{p.name}'")
        rendered[p.name] = _render_value(p, values[p.name])
    text = render_text(pair.template)
    return PLACEHOLDER_RE.sub(lambda m: rendered[m.group(1)], text)


def _render_value(p: TemplateParameter, value) -> str:
    if p.kind in NUMERIC_KINDS:
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise SymkitError(E_VALUE_KIND, f"'{p.name}' expects a number, got {value!r}")
        try:
            num = float(value)
        except ValueError:
            raise SymkitError(E_VALUE_KIND, f"'{p.name}' expects a number, got {value!r}") from None
        return str(int(num)) if num == int(num) else repr(num)
    if p.kind == "Date":
        date = coerce_date(value)
        if date is None:
            raise SymkitError(E_VALUE_KIND, f"'{p.name}' expects a date, got {value!r}")
        return format_date(date)
    if not isinstance(value, str) or not value:
        raise SymkitError(E_VALUE_KIND, f"'{p.name}' expects text, got {value!r}")
    return value


def coerce_date(value) -> dt.date | None:
    """Accept date objects, ISO strings, or the NL surface form 'March 31, 2024'."""
    if isinstance(value, dt.date):
        return value
    if not isinstance(value, str):
        return None
    try:
        return dt.date.fromisoformat(value)
    except ValueError:
        pass
    m = re.fullmatch(r"([A-Za-z]+) (\d{1,2}), (\d{4})", value.strip())
    if m and m.group(1) in MONTHS:
        try:
            return dt.date(int(m.group(3)), MONTHS.index(m.group(1)) + 1, int(m.group(2)))
        except ValueError:
            return None
    return None


def format_date(d: dt.date) -> str:
    return f"{MONTHS[d.month - 1]} {d.day}, {d.year}"
