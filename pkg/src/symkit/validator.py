"""Semantic validation: reference resolution, uniqueness, kind checks.

Returns diagnostics only; an empty list means every structural invariant
holds. Ordering is deterministic (span, then code, then message).
"""

from __future__ import annotations

from .diagnostics import (
    Diagnostic,
    E_DUPLICATE_ID,
    E_KIND_MISMATCH,
    E_SELF_OBLIGATION,
    E_UNRESOLVED,
    W_EMPTY_INTERVAL,
    sort_diagnostics,
    warning,
)
from .model import (
    AbsoluteInterval,
    And,
    AttrCmp,
    Category,
    DateLit,
    Expr,
    FulfilledAtom,
    Happens,
    HappensAfter,
    HappensBefore,
    HappensWithin,
    Impose,
    Not,
    NumberLit,
    NUMERIC_KINDS,
    Obligation,
    Or,
    ParamRef,
    Power,
    Prop,
    RelativeInterval,
    Resume,
    Span,
    Spec,
    StringLit,
    Suspend,
    ViolatedAtom,
)


def validate(spec: Spec) -> list[Diagnostic]:
    v = _Validator(spec)
    v.run()
    return sort_diagnostics(v.diags)


class _Validator:
    def __init__(self, spec: Spec):
        self.spec = spec
        self.diags: list[Diagnostic] = []

    def err(self, code: str, message: str, span: Span) -> None:
        self.diags.append(Diagnostic(code, message, span))

    def run(self) -> None:
        self.check_unique()
        self.check_bindings()
        for o in self.spec.obligations:
            self.check_obligation(o)
        for p in self.spec.powers:
            self.check_power(p)

    # -- uniqueness ---------------------------------------------------------

    def check_unique(self) -> None:
        self._unique([(p.name, p.span) for p in self.spec.parameters], "parameter")
        self._unique([(d.name, d.span) for d in self.spec.domain], "domain type")
        self._unique([(b.name, b.span) for b in self.spec.bindings], "binding")
        obligation_ids = [(o.id, o.span) for o in self.spec.obligations]
        obligation_ids += [(o.id, o.span) for o in self.spec.imposed_obligations()]
        self._unique(obligation_ids, "obligation")
        self._unique([(p.id, p.span) for p in self.spec.powers], "power")
        for d in self.spec.domain:
            self._unique([(a.name, d.span) for a in d.attributes],
                         f"attribute of '{d.name}'")

    def _unique(self, named: list[tuple[str, Span]], what: str) -> None:
        seen: set[str] = set()
        for name, span in named:
            if name in seen:
                self.err(E_DUPLICATE_ID, f"duplicate {what} '{name}'", span)
            seen.add(name)

    # -- bindings -----------------------------------------------------------

    def check_bindings(self) -> None:
        for b in self.spec.bindings:
            decl = self.spec.decl(b.type)
            if decl is None:
                self.err(E_UNRESOLVED, f"binding '{b.name}' has undeclared type '{b.type}'", b.span)
                continue
            attrs = {a.name: a.kind for a in decl.attributes}
            for name, expr in b.assignments:
                kind = attrs.get(name)
                if kind is None:
                    self.err(E_UNRESOLVED,
                             f"'{b.type}' has no attribute '{name}' (assigned in '{b.name}')",
                             b.span)
                    continue
                self.check_expr_kind(expr, kind, f"attribute '{name}' of '{b.name}'", b.span)

    def check_expr_kind(self, expr: Expr, kind: str, where: str, span: Span) -> None:
        """Attr kinds: Number accepts numeric literals and Number/Money/Percentage
        parameters; Date accepts date literals and Date parameters; String accepts
        string literals and String/Party parameters."""
        if isinstance(expr, ParamRef):
            p = self.spec.parameter(expr.name)
            if p is None:
                self.err(E_UNRESOLVED, f"unknown parameter '{expr.name}' in {where}", span)
                return
            ok = (
                (kind == "Number" and p.kind in NUMERIC_KINDS)
                or (kind == "Date" and p.kind == "Date")
                or (kind == "String" and p.kind in ("String", "Party"))
            )
            if not ok:
                self.err(E_KIND_MISMATCH,
                         f"{where} expects {kind}, parameter '{p.name}' is {p.kind}", span)
            return
        ok = (
            (kind == "Number" and isinstance(expr, NumberLit))
            or (kind == "Date" and isinstance(expr, DateLit))
            or (kind == "String" and isinstance(expr, StringLit))
        )
        if not ok:
            self.err(E_KIND_MISMATCH, f"{where} expects a {kind} value", span)

    # -- obligations and powers ----------------------------------------------

    def check_obligation(self, o: Obligation, span: Span | None = None) -> None:
        span = span or o.span
        self.check_party(o.debtor, "debtor", o.id, span)
        self.check_party(o.creditor, "creditor", o.id, span)
        if o.debtor == o.creditor:
            self.err(E_SELF_OBLIGATION,
                     f"obligation '{o.id}' names '{o.debtor}' as both debtor and creditor", span)
        self.check_prop(o.trigger, span)
        self.check_prop(o.consequent, span)

    def check_power(self, p: Power) -> None:
        self.check_party(p.holder, "holder", p.id, p.span)
        self.check_party(p.counterparty, "counterparty", p.id, p.span)
        if p.holder == p.counterparty:
            self.err(E_SELF_OBLIGATION,
                     f"power '{p.id}' names '{p.holder}' as both holder and counterparty", p.span)
        self.check_prop(p.trigger, p.span)
        action = p.action
        if isinstance(action, (Suspend, Resume)):
            for target in action.targets:
                if self.spec.obligation(target) is None:
                    self.err(E_UNRESOLVED,
                             f"power '{p.id}' targets unknown obligation '{target}'", p.span)
        elif isinstance(action, Impose):
            self.check_obligation(action.obligation, p.span)

    def check_party(self, name: str, role: str, owner: str, span: Span) -> None:
        cat = self.spec.binding_category(name)
        if cat is None:
            self.err(E_UNRESOLVED, f"{role} '{name}' of '{owner}' is not declared", span)
        elif cat != Category.ROLE:
            self.err(E_KIND_MISMATCH,
                     f"{role} '{name}' of '{owner}' must be a Role binding, got {cat.value}", span)

    # -- propositions ---------------------------------------------------------

    def check_prop(self, prop: Prop, span: Span) -> None:
        if isinstance(prop, (And, Or)):
            self.check_prop(prop.lhs, span)
            self.check_prop(prop.rhs, span)
        elif isinstance(prop, Not):
            self.check_prop(prop.arg, span)
        elif isinstance(prop, Happens):
            self.check_event(prop.event, span)
        elif isinstance(prop, (HappensBefore, HappensAfter)):
            self.check_event(prop.event, span)
            self.check_time_point(prop.point, span)
        elif isinstance(prop, HappensWithin):
            self.check_event(prop.event, span)
            self.check_interval(prop.interval, span)
        elif isinstance(prop, (FulfilledAtom, ViolatedAtom)):
            self.check_obligation_ref(prop.obligation, span)
        elif isinstance(prop, AttrCmp):
            self.check_attr_cmp(prop, span)

    def check_event(self, name: str, span: Span) -> None:
        cat = self.spec.binding_category(name)
        if cat is None:
            self.err(E_UNRESOLVED, f"unresolved event reference '{name}'", span)
        elif cat != Category.EVENT:
            self.err(E_KIND_MISMATCH, f"'{name}' is a {cat.value} binding, expected an Event", span)

    def check_obligation_ref(self, oid: str, span: Span) -> None:
        known = {o.id for o in self.spec.obligations}
        known.update(o.id for o in self.spec.imposed_obligations())
        if oid not in known:
            self.err(E_UNRESOLVED, f"unresolved obligation reference '{oid}'", span)

    def check_time_point(self, tp, span: Span) -> None:
        if isinstance(tp, ParamRef):
            p = self.spec.parameter(tp.name)
            if p is None:
                self.err(E_UNRESOLVED, f"unknown parameter '{tp.name}' used as a time point", span)
            elif p.kind != "Date":
                self.err(E_KIND_MISMATCH,
                         f"time point parameter '{tp.name}' must be Date, got {p.kind}", span)

    def check_interval(self, iv, span: Span) -> None:
        if isinstance(iv, AbsoluteInterval):
            self.check_time_point(iv.start, span)
            self.check_time_point(iv.end, span)
            if isinstance(iv.start, DateLit) and isinstance(iv.end, DateLit):
                if iv.start.value > iv.end.value:
                    self.err(E_KIND_MISMATCH,
                             f"interval start {iv.start.value} is after end {iv.end.value}", span)
                elif iv.start.value == iv.end.value:
                    self.diags.append(warning(
                        W_EMPTY_INTERVAL,
                        f"interval start and end are both {iv.start.value}", span))
        elif isinstance(iv, RelativeInterval):
            self.check_event(iv.anchor, span)

    def check_attr_cmp(self, cmp: AttrCmp, span: Span) -> None:
        cat = self.spec.binding_category(cmp.event)
        if cat is None:
            self.err(E_UNRESOLVED, f"unresolved event reference '{cmp.event}'", span)
            return
        if cat != Category.EVENT:
            self.err(E_KIND_MISMATCH,
                     f"'{cmp.event}' is a {cat.value} binding, expected an Event", span)
            return
        binding = self.spec.binding(cmp.event)
        decl = self.spec.decl(binding.type)
        attrs = {a.name: a.kind for a in decl.attributes} if decl else {}
        kind = attrs.get(cmp.attribute)
        if kind is None:
            self.err(E_UNRESOLVED,
                     f"event '{cmp.event}' has no attribute '{cmp.attribute}'", span)
            return
        if kind == "String" and cmp.op != "=":
            self.err(E_KIND_MISMATCH,
                     f"String attribute '{cmp.attribute}' only supports '='", span)
        self.check_expr_kind(cmp.operand, kind,
                             f"comparison against '{cmp.event}.{cmp.attribute}'", span)
