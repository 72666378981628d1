"""Tokenizer and recursive-descent parser for the Symboleo dialect.

The parser is total: any byte sequence yields a (spec | None, diagnostics)
pair, never an exception. Panic-mode recovery resynchronizes on ';' and
section headers so multiple syntax errors are reported in one pass.

Named window declarations (`w: Window(2, weeks, evt_x);`) are print-level
sugar: the parser inlines them into the HappensWithin atoms that reference
them, so they never appear in the AST. See docs/grammar.md.
"""

from __future__ import annotations

import datetime as dt
import re
from dataclasses import dataclass

from .diagnostics import (
    Diagnostic,
    E_DUPLICATE_ID,
    E_SYNTAX,
    E_UNRESOLVED,
    sort_diagnostics,
)
from .model import (
    AbsoluteInterval,
    And,
    AttrCmp,
    Attribute,
    Binding,
    Category,
    CMP_OPS,
    DateLit,
    DomainDecl,
    FalseLit,
    FulfilledAtom,
    Happens,
    HappensAfter,
    HappensBefore,
    HappensWithin,
    Impose,
    NumberLit,
    Not,
    Obligation,
    Or,
    Parameter,
    ParamRef,
    Pos,
    Power,
    RelativeInterval,
    Resume,
    Span,
    Spec,
    StringLit,
    Suspend,
    Terminate,
    TrueLit,
    ViolatedAtom,
    PARAM_KINDS,
    ATTR_KINDS,
    UNITS,
)

KEYWORDS = frozenset({
    "Contract", "Domain", "Declarations", "Obligations", "Powers",
    "Obligation", "Power",
    "Role", "Asset", "Event",
    "Date", "Party", "Number", "Money", "Percentage", "String",
    "with", "true", "false", "and", "or", "not",
    "Happens", "HappensBefore", "HappensAfter", "HappensWithin",
    "Violated", "Fulfilled", "Interval", "Window",
    "Suspend", "Resume", "Terminate", "Impose",
    "days", "weeks", "months",
})

SECTION_KEYWORDS = ("Domain", "Declarations", "Obligations", "Powers")

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[ \t\r\n]+)
    | (?P<comment>//[^\n]*)
    | (?P<date>\d{4}-\d{2}-\d{2})
    | (?P<number>\d+(?:\.\d+)?)
    | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<string>"[^"\n]*")
    | (?P<badstring>"[^"\n]*)
    | (?P<punct>:=|<=|>=|[(),;:.<>=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # kw | ident | number | date | string | punct | error | eof
    value: str
    span: Span


def tokenize(source: str) -> list[Token]:
    """Scan `source` into tokens; malformed input yields `error` tokens, never raises."""
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        m = _TOKEN_RE.match(source, i)
        if m is None:
            tokens.append(Token("error", source[i], Span.point(line, col)))
            i += 1
            col += 1
            continue
        text = m.group(0)
        start = Pos(line, col)
        newlines = text.count("\n")
        if newlines:
            line += newlines
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        end = Pos(line, col - 1 if col > 1 else 1)
        span = Span(start, end)
        i = m.end()
        kind = m.lastgroup
        if kind in ("ws", "comment"):
            continue
        if kind == "word":
            tokens.append(Token("kw" if text in KEYWORDS else "ident", text, span))
        elif kind == "badstring":
            tokens.append(Token("error", text, span))
        else:
            tokens.append(Token(kind, text, span))
    tokens.append(Token("eof", "", Span.point(line, col)))
    return tokens


class _Halt(Exception):
    """Internal signal to abandon the current statement and resynchronize."""


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0
        self.diags: list[Diagnostic] = []
        self.windows: dict[str, RelativeInterval] = {}

    # -- token plumbing ----------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.toks[self.pos]

    def advance(self) -> Token:
        t = self.cur
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, kind: str, value: str | None = None) -> bool:
        t = self.cur
        return t.kind == kind and (value is None or t.value == value)

    def at_kw(self, *values: str) -> bool:
        return self.cur.kind == "kw" and self.cur.value in values

    def error(self, message: str, token: Token | None = None) -> None:
        t = token or self.cur
        shown = t.value if t.kind != "eof" else "end of input"
        self.diags.append(Diagnostic(E_SYNTAX, f"{message} (found '{shown}')", t.span))

    def fail(self, message: str) -> "_Halt":
        self.error(message)
        return _Halt()

    def expect_punct(self, value: str, what: str | None = None):
        if self.at("punct", value):
            return self.advance()
        raise self.fail(f"expected '{value}'" + (f" {what}" if what else ""))

    def expect_kw(self, value: str):
        if self.at_kw(value):
            return self.advance()
        raise self.fail(f"expected '{value}'")

    def expect_ident(self, what: str = "identifier"):
        if self.at("ident"):
            return self.advance()
        raise self.fail(f"expected {what}")

    def sync_statement(self) -> None:
        """Skip to just past the next ';', or stop at a section header / EOF."""
        while True:
            t = self.cur
            if t.kind == "eof":
                return
            if t.kind == "kw" and t.value in SECTION_KEYWORDS:
                return
            self.advance()
            if t.kind == "punct" and t.value == ";":
                return

    # -- grammar -----------------------------------------------------------

    def parse(self) -> Spec | None:
        name = "?"
        parameters: tuple[Parameter, ...] = ()
        try:
            name, parameters = self.contract_header()
        except _Halt:
            self.sync_to_section("Domain")
        domain = self.section("Domain", self.domain_decl)
        bindings = self.declarations_section()
        obligations = self.section("Obligations", self.obligation_stmt)
        powers = self.section("Powers", self.power_stmt)
        if self.cur.kind != "eof":
            self.error("unexpected trailing input")
        spec = Spec(
            name=name,
            parameters=parameters,
            domain=tuple(domain),
            bindings=tuple(bindings),
            obligations=tuple(obligations),
            powers=tuple(powers),
        )
        return spec

    def sync_to_section(self, *names: str) -> None:
        while self.cur.kind != "eof" and not (self.cur.kind == "kw" and self.cur.value in names):
            self.advance()

    def contract_header(self) -> tuple[str, tuple[Parameter, ...]]:
        self.expect_kw("Contract")
        name = self.expect_ident("contract name").value
        self.expect_punct("(")
        params: list[Parameter] = []
        if not self.at("punct", ")"):
            while True:
                ptok = self.expect_ident("parameter name")
                self.expect_punct(":")
                ktok = self.cur
                if ktok.kind == "kw" and ktok.value in PARAM_KINDS:
                    self.advance()
                else:
                    raise self.fail("expected parameter kind (Date, Party, Number, Money, Percentage or String)")
                params.append(Parameter(ptok.value, ktok.value, Span(ptok.span.start, ktok.span.end)))
                if self.at("punct", ","):
                    self.advance()
                    continue
                break
        self.expect_punct(")")
        return name, tuple(params)

    def section(self, header: str, stmt_parser) -> list:
        items = []
        if self.at_kw(header):
            self.advance()
        else:
            self.error(f"expected section header '{header}'")
            self.sync_to_section(header, *SECTION_KEYWORDS[SECTION_KEYWORDS.index(header):])
            if self.at_kw(header):
                self.advance()
            else:
                return items
        while self.cur.kind != "eof" and not self.at_kw(*SECTION_KEYWORDS):
            try:
                item = stmt_parser()
                if item is not None:
                    items.append(item)
            except _Halt:
                self.sync_statement()
        return items

    def domain_decl(self) -> DomainDecl:
        ntok = self.expect_ident("domain type name")
        self.expect_punct(":")
        if not self.at_kw("Role", "Asset", "Event"):
            raise self.fail("expected category (Role, Asset or Event)")
        cat = Category(self.advance().value)
        attrs: list[Attribute] = []
        if self.at_kw("with"):
            self.advance()
            while True:
                atok = self.expect_ident("attribute name")
                self.expect_punct(":")
                if not (self.cur.kind == "kw" and self.cur.value in ATTR_KINDS):
                    raise self.fail("expected attribute kind (Number, Date or String)")
                kind = self.advance().value
                attrs.append(Attribute(atok.value, kind))
                if self.at("punct", ","):
                    self.advance()
                    continue
                break
        end = self.expect_punct(";")
        return DomainDecl(ntok.value, cat, tuple(attrs), Span(ntok.span.start, end.span.end))

    def declarations_section(self) -> list[Binding]:
        """Bindings plus window declarations; windows are recorded and inlined later."""
        bindings: list[Binding] = []
        if self.at_kw("Declarations"):
            self.advance()
        else:
            self.error("expected section header 'Declarations'")
            self.sync_to_section("Declarations", "Obligations", "Powers")
            if self.at_kw("Declarations"):
                self.advance()
            else:
                return bindings
        while self.cur.kind != "eof" and not self.at_kw(*SECTION_KEYWORDS):
            try:
                ntok = self.expect_ident("declaration name")
                self.expect_punct(":")
                if self.at_kw("Window"):
                    self.window_decl(ntok)
                    continue
                ttok = self.expect_ident("domain type name")
                assigns: list[tuple[str, object]] = []
                if self.at_kw("with"):
                    self.advance()
                    while True:
                        atok = self.expect_ident("attribute name")
                        self.expect_punct(":=")
                        assigns.append((atok.value, self.expr()))
                        if self.at("punct", ","):
                            self.advance()
                            continue
                        break
                end = self.expect_punct(";")
                bindings.append(Binding(ntok.value, ttok.value, tuple(assigns),
                                        Span(ntok.span.start, end.span.end)))
            except _Halt:
                self.sync_statement()
        return bindings

    def window_decl(self, ntok: Token) -> None:
        iv = self.window_interval()
        self.expect_punct(";")
        if ntok.value in self.windows:
            self.diags.append(Diagnostic(
                E_DUPLICATE_ID, f"duplicate window name '{ntok.value}'", ntok.span))
            return
        self.windows[ntok.value] = iv

    def window_interval(self) -> RelativeInterval:
        self.expect_kw("Window")
        self.expect_punct("(")
        mtok = self.cur
        if mtok.kind != "number" or "." in mtok.value:
            raise self.fail("expected a whole-number window magnitude")
        magnitude = int(self.advance().value)
        if magnitude < 1:
            self.error("window magnitude must be at least 1", mtok)
        self.expect_punct(",")
        if not self.at_kw(*UNITS):
            raise self.fail("expected unit (days, weeks or months)")
        unit = self.advance().value
        self.expect_punct(",")
        anchor = self.expect_ident("anchor event name").value
        self.expect_punct(")")
        return RelativeInterval(anchor, magnitude, unit)

    def obligation_stmt(self) -> Obligation:
        ob = self.obligation_literal()
        end = self.expect_punct(";")
        return Obligation(ob.id, ob.debtor, ob.creditor, ob.trigger, ob.consequent,
                          Span(ob.span.start, end.span.end))

    def obligation_literal(self) -> Obligation:
        ntok = self.expect_ident("obligation id")
        self.expect_punct(":")
        self.expect_kw("Obligation")
        self.expect_punct("(")
        debtor = self.expect_ident("debtor binding").value
        self.expect_punct(",")
        creditor = self.expect_ident("creditor binding").value
        self.expect_punct(",")
        trigger = self.prop()
        self.expect_punct(",")
        consequent = self.prop()
        close = self.expect_punct(")")
        return Obligation(ntok.value, debtor, creditor, trigger, consequent,
                          Span(ntok.span.start, close.span.end))

    def power_stmt(self) -> Power:
        ntok = self.expect_ident("power id")
        self.expect_punct(":")
        self.expect_kw("Power")
        self.expect_punct("(")
        holder = self.expect_ident("holder binding").value
        self.expect_punct(",")
        counterparty = self.expect_ident("counterparty binding").value
        self.expect_punct(",")
        trigger = self.prop()
        self.expect_punct(",")
        action = self.power_action()
        self.expect_punct(")")
        end = self.expect_punct(";")
        return Power(ntok.value, holder, counterparty, trigger, action,
                     Span(ntok.span.start, end.span.end))

    def power_action(self):
        if self.at_kw("Suspend") or self.at_kw("Resume"):
            kw = self.advance().value
            self.expect_punct("(")
            targets = [self.expect_ident("obligation id").value]
            while self.at("punct", ","):
                self.advance()
                targets.append(self.expect_ident("obligation id").value)
            self.expect_punct(")")
            return Suspend(tuple(targets)) if kw == "Suspend" else Resume(tuple(targets))
        if self.at_kw("Terminate"):
            self.advance()
            return Terminate()
        if self.at_kw("Impose"):
            self.advance()
            self.expect_punct("(")
            ob = self.obligation_literal()
            self.expect_punct(")")
            return Impose(ob)
        raise self.fail("expected power action (Suspend, Resume, Terminate or Impose)")

    # -- propositions ------------------------------------------------------

    def prop(self):
        left = self.and_prop()
        while self.at_kw("or"):
            self.advance()
            left = Or(left, self.and_prop())
        return left

    def and_prop(self):
        left = self.not_prop()
        while self.at_kw("and"):
            self.advance()
            left = And(left, self.not_prop())
        return left

    def not_prop(self):
        if self.at_kw("not"):
            self.advance()
            return Not(self.not_prop())
        return self.primary_prop()

    def primary_prop(self):
        t = self.cur
        if self.at_kw("true"):
            self.advance()
            return TrueLit()
        if self.at_kw("false"):
            self.advance()
            return FalseLit()
        if self.at("punct", "("):
            self.advance()
            inner = self.prop()
            self.expect_punct(")")
            return inner
        if t.kind == "kw":
            if t.value == "Happens":
                self.advance()
                self.expect_punct("(")
                ev = self.expect_ident("event binding").value
                self.expect_punct(")")
                return Happens(ev)
            if t.value in ("HappensBefore", "HappensAfter"):
                self.advance()
                self.expect_punct("(")
                ev = self.expect_ident("event binding").value
                self.expect_punct(",")
                point = self.time_point()
                self.expect_punct(")")
                cls = HappensBefore if t.value == "HappensBefore" else HappensAfter
                return cls(ev, point)
            if t.value == "HappensWithin":
                self.advance()
                self.expect_punct("(")
                ev = self.expect_ident("event binding").value
                self.expect_punct(",")
                interval = self.interval()
                self.expect_punct(")")
                return HappensWithin(ev, interval)
            if t.value in ("Violated", "Fulfilled"):
                self.advance()
                self.expect_punct("(")
                ob = self.expect_ident("obligation id").value
                self.expect_punct(")")
                return ViolatedAtom(ob) if t.value == "Violated" else FulfilledAtom(ob)
        if t.kind == "ident":
            ev = self.advance().value
            self.expect_punct(".", "to access an event attribute")
            attr = self.expect_ident("attribute name").value
            op = self.cmp_op()
            operand = self.expr()
            return AttrCmp(ev, attr, op, operand)
        raise self.fail("expected a proposition")

    def cmp_op(self) -> str:
        if self.cur.kind == "punct" and self.cur.value in CMP_OPS:
            return self.advance().value
        raise self.fail("expected comparison operator (<, <=, =, >= or >)")

    def interval(self):
        if self.at_kw("Interval"):
            self.advance()
            self.expect_punct("(")
            start = self.time_point()
            self.expect_punct(",")
            end = self.time_point()
            self.expect_punct(")")
            return AbsoluteInterval(start, end)
        if self.at_kw("Window"):
            return self.window_interval()
        if self.at("ident"):
            t = self.advance()
            iv = self.windows.get(t.value)
            if iv is None:
                self.diags.append(Diagnostic(
                    E_UNRESOLVED, f"unresolved window reference '{t.value}'", t.span))
                return AbsoluteInterval(DateLit(dt.date(1970, 1, 1)), DateLit(dt.date(1970, 1, 1)))
            return iv
        raise self.fail("expected an interval (Interval(...), Window(...) or a window name)")

    def time_point(self):
        t = self.cur
        if t.kind == "date":
            self.advance()
            return DateLit(self._date_value(t))
        if t.kind == "ident":
            self.advance()
            return ParamRef(t.value)
        raise self.fail("expected a date (YYYY-MM-DD) or a Date parameter name")

    def expr(self):
        t = self.cur
        if t.kind == "number":
            self.advance()
            return NumberLit(float(t.value) if "." in t.value else int(t.value))
        if t.kind == "date":
            self.advance()
            return DateLit(self._date_value(t))
        if t.kind == "string":
            self.advance()
            return StringLit(t.value[1:-1])
        if t.kind == "ident":
            self.advance()
            return ParamRef(t.value)
        raise self.fail("expected a literal or parameter name")

    def _date_value(self, t: Token) -> dt.date:
        try:
            return dt.date.fromisoformat(t.value)
        except ValueError:
            self.error("invalid calendar date", t)
            return dt.date(1970, 1, 1)


def parse(source: str) -> tuple[Spec | None, list[Diagnostic]]:
    """Parse dialect source text. Returns (spec, diagnostics); spec is None
    when any Error-severity diagnostic was produced."""
    spec, diags = parse_lenient(source)
    if any(d.severity == "Error" for d in diags):
        return None, diags
    return spec, diags


def parse_lenient(source: str) -> tuple[Spec, list[Diagnostic]]:
    """Best-effort parse that always yields a (possibly partial) spec.

    Used by the completion engine, which needs a symbol table even while
    the buffer is mid-edit."""
    p = _Parser(tokenize(source))
    spec = p.parse()
    return spec, sort_diagnostics(p.diags)
