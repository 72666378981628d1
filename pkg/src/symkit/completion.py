"""Context-aware completion for the Symboleo dialect.

Suggestions are computed from the tokens left of the cursor plus a lenient
parse of the whole buffer (so identifiers declared after the cursor are
still in scope, as an editor user expects). Results are filtered by the
identifier prefix under the cursor and sorted lexicographically.

At type-annotation positions the engine offers user-defined domain types
alongside the built-in kinds, even where the validator will later restrict
the choice (e.g. parameter kinds); see docs/diagnostics.md for the
documented contexts.
"""

from __future__ import annotations

import re

from .model import ATTR_KINDS, Category, PARAM_KINDS, Spec
from .parser import Token, parse_lenient, tokenize

_WORD = re.compile(r"[A-Za-z0-9_]")

_SECTIONS = ("Domain", "Declarations", "Obligations", "Powers")
_PROP_HEADS = ("Happens", "HappensBefore", "HappensAfter", "HappensWithin",
               "Violated", "Fulfilled", "true", "false", "not")
_ACTIONS = ("Impose", "Resume", "Suspend", "Terminate")


def complete(source: str, line: int, col: int) -> list[str]:
    """Completion suggestions at a 1-based (line, col) cursor position."""
    try:
        return _complete(source, line, col)
    except Exception:
        return []


def _complete(source: str, line: int, col: int) -> list[str]:
    offset = _offset(source, line, col)
    if offset is None:
        return []
    prefix_start = offset
    while prefix_start > 0 and _WORD.match(source[prefix_start - 1]):
        prefix_start -= 1
    prefix = source[prefix_start:offset]

    spec, _ = parse_lenient(source)
    before = _tokens_before(source, prefix_start)
    candidates = _candidates(before, spec)
    return sorted(c for c in set(candidates) if c.startswith(prefix))


def _offset(source: str, line: int, col: int) -> int | None:
    lines = source.split("\n")
    if not 1 <= line <= len(lines):
        return None
    col = max(1, min(col, len(lines[line - 1]) + 1))
    return sum(len(l) + 1 for l in lines[: line - 1]) + (col - 1)


def _tokens_before(source: str, offset: int) -> list[Token]:
    line = source.count("\n", 0, offset) + 1
    col = offset - (source.rfind("\n", 0, offset) + 1) + 1
    out = []
    for t in tokenize(source):
        if t.kind == "eof":
            break
        if (t.span.end.line, t.span.end.col) < (line, col):
            out.append(t)
    return out


def _candidates(before: list[Token], spec: Spec) -> list[str]:
    if not before:
        return ["Contract"]

    section = None
    section_idx = -1
    for i, t in enumerate(before):
        if t.kind == "kw" and t.value in _SECTIONS:
            section, section_idx = t.value, i

    # Statement tokens: everything since the last ';' (or the section header).
    st_start = section_idx + 1
    for i in range(len(before) - 1, section_idx, -1):
        if before[i].kind == "punct" and before[i].value == ";":
            st_start = i + 1
            break
    st = before[st_start:]

    if section is None:
        return _contract_header(before, spec)
    if not st:
        return [_next_section(section)] if _next_section(section) else []
    if section == "Domain":
        return _domain(st)
    if section == "Declarations":
        return _declarations(st, spec)
    return _norm_statement(st, spec, section)


def _next_section(section: str) -> str | None:
    i = _SECTIONS.index(section)
    return _SECTIONS[i + 1] if i + 1 < len(_SECTIONS) else None


def _contract_header(before: list[Token], spec: Spec) -> list[str]:
    if len(before) == 1:
        return []  # contract name is free-form
    if _ends_with_punct(before, ":"):
        # Parameter kind position; user-defined domain types are offered too.
        return list(PARAM_KINDS) + [d.name for d in spec.domain]
    if _ends_with_punct(before, ")"):
        return ["Domain"]
    return []


def _domain(st: list[Token]) -> list[str]:
    if _ends_with_punct(st, ":"):
        if any(t.kind == "kw" and t.value == "with" for t in st):
            return list(ATTR_KINDS)
        return [c.value for c in Category]
    return []


def _declarations(st: list[Token], spec: Spec) -> list[str]:
    if _ends_with_punct(st, ":"):
        return [d.name for d in spec.domain] + ["Window"]
    if _ends_with_punct(st, ":="):
        return [p.name for p in spec.parameters]
    last_kw = next((t.value for t in reversed(st) if t.kind == "kw"), None)
    if last_kw == "with" or (_ends_with_punct(st, ",") and any(
            t.kind == "kw" and t.value == "with" for t in st)):
        if len(st) >= 3 and st[2].kind == "ident":
            decl = spec.decl(st[2].value)
            if decl:
                return [a.name for a in decl.attributes]
    return []


def _norm_statement(st: list[Token], spec: Spec, section: str) -> list[str]:
    if _ends_with_punct(st, ":") and len(st) == 2:
        return ["Obligation"] if section == "Obligations" else ["Power"]

    frames = _frames(st)
    if not frames:
        return []
    callee, args_seen, current = frames[-1]

    if callee in ("Happens", "HappensBefore", "HappensAfter", "HappensWithin"):
        if args_seen == 0:
            return _event_names(spec)
        if callee == "HappensWithin":
            return ["Interval", "Window"]
        return _date_params(spec)
    if callee in ("Violated", "Fulfilled", "Suspend", "Resume"):
        return _obligation_ids(spec)
    if callee == "Interval":
        return _date_params(spec)
    if callee == "Window":
        if args_seen == 1:
            return ["days", "months", "weeks"]
        if args_seen == 2:
            return _event_names(spec)
        return []
    if callee in ("Obligation", "Power"):
        if args_seen in (0, 1):
            return _role_names(spec)
        if callee == "Power" and args_seen == 3:
            return list(_ACTIONS) if not current else _prop_position(current, spec)
        return _prop_position(current, spec)
    if callee == "Impose":
        if _ends_with_punct(current, ":"):
            return ["Obligation"]
        return []
    # Grouping parenthesis inside a proposition.
    return _prop_position(current, spec)


def _prop_position(current: list[Token], spec: Spec) -> list[str]:
    if not current:
        return list(_PROP_HEADS) + _event_names(spec)
    last = current[-1]
    if last.kind == "punct" and last.value == ".":
        if len(current) >= 2 and current[-2].kind == "ident":
            binding = spec.binding(current[-2].value)
            if binding:
                decl = spec.decl(binding.type)
                if decl:
                    return [a.name for a in decl.attributes]
        return []
    if last.kind == "punct" and last.value in ("<", "<=", "=", ">=", ">"):
        return [p.name for p in spec.parameters]
    if last.kind == "kw" and last.value in ("and", "or", "not"):
        return list(_PROP_HEADS) + _event_names(spec)
    return []


def _frames(st: list[Token]) -> list[tuple[str | None, int, list[Token]]]:
    """Open call frames at the cursor: (callee, commas-seen, tokens of current arg)."""
    stack: list[list] = []
    prev: Token | None = None
    for t in st:
        if t.kind == "punct" and t.value == "(":
            callee = prev.value if prev and prev.kind in ("kw", "ident") else None
            stack.append([callee, 0, []])
        elif t.kind == "punct" and t.value == ")":
            if stack:
                stack.pop()
            if stack:
                stack[-1][2].append(t)
        elif stack:
            if t.kind == "punct" and t.value == ",":
                stack[-1][1] += 1
                stack[-1][2] = []
            else:
                stack[-1][2].append(t)
        prev = t
    return [(c, n, list(cur)) for c, n, cur in stack]


def _ends_with_punct(tokens: list[Token], value: str) -> bool:
    return bool(tokens) and tokens[-1].kind == "punct" and tokens[-1].value == value


def _event_names(spec: Spec) -> list[str]:
    return [b.name for b in spec.bindings_of(Category.EVENT)]


def _role_names(spec: Spec) -> list[str]:
    return [b.name for b in spec.bindings_of(Category.ROLE)]


def _date_params(spec: Spec) -> list[str]:
    return [p.name for p in spec.parameters if p.kind == "Date"]


def _obligation_ids(spec: Spec) -> list[str]:
    ids = [o.id for o in spec.obligations]
    ids += [o.id for o in spec.imposed_obligations()]
    return ids
