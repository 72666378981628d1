"""Core data model for the Symboleo dialect.

All values are immutable after construction (frozen dataclasses) and safe
to share between threads. Source spans are carried for diagnostics but do
not participate in structural equality, so round-tripping through the
printer preserves equality.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

PARAM_KINDS = ("Date", "Party", "Number", "Money", "Percentage", "String")
ATTR_KINDS = ("Number", "Date", "String")
UNITS = ("days", "weeks", "months")

# Numeric parameter kinds are mutually assignable to Number attributes;
# Party values behave as strings in NL-facing contexts.
NUMERIC_KINDS = frozenset({"Number", "Money", "Percentage"})


@dataclass(frozen=True)
class Pos:
    line: int  # 1-based
    col: int   # 1-based


@dataclass(frozen=True)
class Span:
    start: Pos
    end: Pos

    @staticmethod
    def point(line: int, col: int) -> "Span":
        return Span(Pos(line, col), Pos(line, col))


ZERO_SPAN = Span.point(1, 1)


class Category(str, Enum):
    ROLE = "Role"
    ASSET = "Asset"
    EVENT = "Event"


@dataclass(frozen=True)
class Parameter:
    name: str
    kind: str  # one of PARAM_KINDS
    span: Span = field(default=ZERO_SPAN, compare=False)


@dataclass(frozen=True)
class Attribute:
    name: str
    kind: str  # one of ATTR_KINDS


@dataclass(frozen=True)
class DomainDecl:
    name: str
    category: Category
    attributes: tuple[Attribute, ...] = ()
    span: Span = field(default=ZERO_SPAN, compare=False)


# ---------------------------------------------------------------------------
# Expressions usable in binding assignments and comparison operands: either a
# literal constant or a reference to a contract parameter.

@dataclass(frozen=True)
class NumberLit:
    value: int | float


@dataclass(frozen=True)
class StringLit:
    value: str


@dataclass(frozen=True)
class DateLit:
    value: dt.date


@dataclass(frozen=True)
class ParamRef:
    name: str


Expr = Union[NumberLit, StringLit, DateLit, ParamRef]


@dataclass(frozen=True)
class Binding:
    name: str
    type: str  # DomainDecl name
    assignments: tuple[tuple[str, Expr], ...] = ()
    span: Span = field(default=ZERO_SPAN, compare=False)


# ---------------------------------------------------------------------------
# Time points and intervals.

TimePoint = Union[DateLit, ParamRef]


@dataclass(frozen=True)
class AbsoluteInterval:
    start: TimePoint
    end: TimePoint


@dataclass(frozen=True)
class RelativeInterval:
    anchor: str  # event binding name
    magnitude: int
    unit: str  # one of UNITS


Interval = Union[AbsoluteInterval, RelativeInterval]


# ---------------------------------------------------------------------------
# Propositions: boolean algebra over temporal/state atoms.

@dataclass(frozen=True)
class TrueLit:
    pass


@dataclass(frozen=True)
class FalseLit:
    pass


@dataclass(frozen=True)
class And:
    lhs: "Prop"
    rhs: "Prop"


@dataclass(frozen=True)
class Or:
    lhs: "Prop"
    rhs: "Prop"


@dataclass(frozen=True)
class Not:
    arg: "Prop"


@dataclass(frozen=True)
class Happens:
    event: str


@dataclass(frozen=True)
class HappensBefore:
    event: str
    point: TimePoint


@dataclass(frozen=True)
class HappensAfter:
    event: str
    point: TimePoint


@dataclass(frozen=True)
class HappensWithin:
    event: str
    interval: Interval


@dataclass(frozen=True)
class ViolatedAtom:
    obligation: str


@dataclass(frozen=True)
class FulfilledAtom:
    obligation: str


@dataclass(frozen=True)
class AttrCmp:
    event: str
    attribute: str
    op: str  # one of < <= = >= >
    operand: Expr


Prop = Union[
    TrueLit, FalseLit, And, Or, Not,
    Happens, HappensBefore, HappensAfter, HappensWithin,
    ViolatedAtom, FulfilledAtom, AttrCmp,
]

CMP_OPS = ("<", "<=", "=", ">=", ">")


@dataclass(frozen=True)
class Obligation:
    id: str
    debtor: str
    creditor: str
    trigger: Prop
    consequent: Prop
    span: Span = field(default=ZERO_SPAN, compare=False)


@dataclass(frozen=True)
class Suspend:
    targets: tuple[str, ...]


@dataclass(frozen=True)
class Resume:
    targets: tuple[str, ...]


@dataclass(frozen=True)
class Terminate:
    pass


@dataclass(frozen=True)
class Impose:
    obligation: Obligation


PowerAction = Union[Suspend, Resume, Terminate, Impose]


@dataclass(frozen=True)
class Power:
    id: str
    holder: str
    counterparty: str
    trigger: Prop
    action: PowerAction
    span: Span = field(default=ZERO_SPAN, compare=False)


@dataclass(frozen=True)
class Spec:
    """A parsed Symboleo-dialect contract specification."""

    name: str
    parameters: tuple[Parameter, ...]
    domain: tuple[DomainDecl, ...]
    bindings: tuple[Binding, ...]
    obligations: tuple[Obligation, ...]
    powers: tuple[Power, ...]

    def parameter(self, name: str) -> Parameter | None:
        for p in self.parameters:
            if p.name == name:
                return p
        return None

    def decl(self, name: str) -> DomainDecl | None:
        for d in self.domain:
            if d.name == name:
                return d
        return None

    def binding(self, name: str) -> Binding | None:
        for b in self.bindings:
            if b.name == name:
                return b
        return None

    def binding_category(self, name: str) -> Category | None:
        b = self.binding(name)
        if b is None:
            return None
        d = self.decl(b.type)
        return d.category if d else None

    def obligation(self, oid: str) -> Obligation | None:
        for o in self.obligations:
            if o.id == oid:
                return o
        return None

    def power(self, pid: str) -> Power | None:
        for p in self.powers:
            if p.id == pid:
                return p
        return None

    def bindings_of(self, category: Category) -> list[Binding]:
        out = []
        for b in self.bindings:
            d = self.decl(b.type)
            if d is not None and d.category == category:
                out.append(b)
        return out

    def imposed_obligations(self) -> list[Obligation]:
        return [p.action.obligation for p in self.powers if isinstance(p.action, Impose)]


def iter_atoms(prop: Prop):
    """Yield the atomic sub-propositions of `prop` in left-to-right order."""
    if isinstance(prop, (And, Or)):
        yield from iter_atoms(prop.lhs)
        yield from iter_atoms(prop.rhs)
    elif isinstance(prop, Not):
        yield from iter_atoms(prop.arg)
    elif isinstance(prop, (TrueLit, FalseLit)):
        return
    else:
        yield prop


def expr_to_obj(e: Expr) -> dict:
    if isinstance(e, NumberLit):
        return {"kind": "number", "value": e.value}
    if isinstance(e, StringLit):
        return {"kind": "string", "value": e.value}
    if isinstance(e, DateLit):
        return {"kind": "date", "value": e.value.isoformat()}
    return {"kind": "param", "name": e.name}


def interval_to_obj(iv: Interval) -> dict:
    if isinstance(iv, AbsoluteInterval):
        return {"kind": "absolute", "start": expr_to_obj(iv.start), "end": expr_to_obj(iv.end)}
    return {"kind": "relative", "anchor": iv.anchor, "magnitude": iv.magnitude, "unit": iv.unit}


def prop_to_obj(p: Prop) -> dict:
    """Normalize a proposition to its documented JSON shape.

    This shape is the shared contract between the generated bundle manifest
    and the runtime compiler; see docs/manifest.md.
    """
    if isinstance(p, TrueLit):
        return {"op": "true"}
    if isinstance(p, FalseLit):
        return {"op": "false"}
    if isinstance(p, And):
        return {"op": "and", "lhs": prop_to_obj(p.lhs), "rhs": prop_to_obj(p.rhs)}
    if isinstance(p, Or):
        return {"op": "or", "lhs": prop_to_obj(p.lhs), "rhs": prop_to_obj(p.rhs)}
    if isinstance(p, Not):
        return {"op": "not", "arg": prop_to_obj(p.arg)}
    if isinstance(p, Happens):
        return {"op": "happens", "event": p.event}
    if isinstance(p, HappensBefore):
        return {"op": "happens_before", "event": p.event, "point": expr_to_obj(p.point)}
    if isinstance(p, HappensAfter):
        return {"op": "happens_after", "event": p.event, "point": expr_to_obj(p.point)}
    if isinstance(p, HappensWithin):
        return {"op": "happens_within", "event": p.event, "interval": interval_to_obj(p.interval)}
    if isinstance(p, ViolatedAtom):
        return {"op": "violated", "obligation": p.obligation}
    if isinstance(p, FulfilledAtom):
        return {"op": "fulfilled", "obligation": p.obligation}
    if isinstance(p, AttrCmp):
        return {"op": "attr_cmp", "event": p.event, "attribute": p.attribute,
                "cmp": p.op, "operand": expr_to_obj(p.operand)}
    raise TypeError(f"not a proposition: {p!r}")


def action_to_obj(a: PowerAction) -> dict:
    if isinstance(a, Suspend):
        return {"type": "suspend", "targets": list(a.targets)}
    if isinstance(a, Resume):
        return {"type": "resume", "targets": list(a.targets)}
    if isinstance(a, Terminate):
        return {"type": "terminate"}
    return {
        "type": "impose",
        "obligation": {
            "id": a.obligation.id,
            "debtor": a.obligation.debtor,
            "creditor": a.obligation.creditor,
            "trigger": prop_to_obj(a.obligation.trigger),
            "consequent": prop_to_obj(a.obligation.consequent),
        },
    }


def add_months(d: dt.date, months: int) -> dt.date:
    """Calendar-month addition with end-of-month clamping (Jan 31 + 1mo = Feb 28/29)."""
    month_index = d.month - 1 + months
    year = d.year + month_index // 12
    month = month_index % 12 + 1
    last = _days_in_month(year, month)
    return dt.date(year, month, min(d.day, last))


def _days_in_month(year: int, month: int) -> int:
    if month == 12:
        return 31
    return (dt.date(year, month + 1, 1) - dt.timedelta(days=1)).day


def duration_end(start: dt.datetime, magnitude: int, unit: str) -> dt.datetime:
    """End of a window opening at `start` and lasting `magnitude` `unit`s."""
    if unit == "days":
        return start + dt.timedelta(days=magnitude)
    if unit == "weeks":
        return start + dt.timedelta(weeks=magnitude)
    if unit == "months":
        return dt.datetime.combine(add_months(start.date(), magnitude), start.time())
    raise ValueError(f"unknown unit: {unit}")
