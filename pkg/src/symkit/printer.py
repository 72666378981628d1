"""Canonical pretty-printer for the Symboleo dialect.

One declaration/statement per line, two-space indent, fixed section order,
LF line endings. The output is a fixpoint: print(parse(print(s))) == print(s).

Event-relative windows (`HappensWithin(e, Window(n, unit, anchor))`) are
hoisted into named declarations at the end of the Declarations section and
referenced by name from the obligation/power line. Hoisting keeps each
obligation/power on a single line and gives every deadline window a stable
identifier; the parser inlines the declarations back, so hoisting is
invisible at the AST level.
"""

from __future__ import annotations

from .model import (
    AbsoluteInterval,
    And,
    AttrCmp,
    Binding,
    DateLit,
    DomainDecl,
    Expr,
    FalseLit,
    FulfilledAtom,
    Happens,
    HappensAfter,
    HappensBefore,
    HappensWithin,
    Impose,
    Interval,
    Not,
    NumberLit,
    Obligation,
    Or,
    ParamRef,
    Power,
    Prop,
    RelativeInterval,
    Resume,
    Spec,
    StringLit,
    Suspend,
    Terminate,
    TimePoint,
    TrueLit,
    ViolatedAtom,
)

INDENT = "  "


def print_spec(spec: Spec) -> str:
    windows = hoist_windows(spec)
    lines: list[str] = []
    params = ", ".join(f"{p.name}: {p.kind}" for p in spec.parameters)
    lines.append(f"Contract {spec.name}({params})")
    lines.append("")
    lines.append("Domain")
    for d in spec.domain:
        lines.append(INDENT + _domain_decl(d))
    lines.append("")
    lines.append("Declarations")
    for b in spec.bindings:
        lines.append(INDENT + _binding(b))
    for name, iv in windows.items():
        lines.append(INDENT + f"{name}: Window({iv.magnitude}, {iv.unit}, {iv.anchor});")
    lines.append("")
    lines.append("Obligations")
    inverse = {iv: name for name, iv in windows.items()}
    for o in spec.obligations:
        lines.append(INDENT + _obligation(o, inverse) + ";")
    lines.append("")
    lines.append("Powers")
    for p in spec.powers:
        lines.append(INDENT + _power(p, inverse))
    return "\n".join(lines) + "\n"


def hoist_windows(spec: Spec) -> dict[str, RelativeInterval]:
    """Assign deterministic names to every distinct event-relative window.

    Traversal order: obligations then powers, trigger before consequent/action,
    propositions left to right. Names derive from the owning statement's id;
    repeats within one owner get a numeric suffix, as do collisions with
    identifiers already used elsewhere in the spec.
    """
    used = {p.name for p in spec.parameters}
    used.update(d.name for d in spec.domain)
    used.update(b.name for b in spec.bindings)
    used.update(o.id for o in spec.obligations)
    used.update(p.id for p in spec.powers)
    used.update(o.id for o in spec.imposed_obligations())

    windows: dict[str, RelativeInterval] = {}
    seen: set[RelativeInterval] = set()

    def visit(owner: str, prop: Prop) -> None:
        for iv in _relative_intervals(prop):
            if iv in seen:
                continue
            seen.add(iv)
            name = f"win_{owner}"
            k = 1
            while name in used:
                k += 1
                name = f"win_{owner}_{k}"
            used.add(name)
            windows[name] = iv

    for o in spec.obligations:
        visit(o.id, o.trigger)
        visit(o.id, o.consequent)
    for p in spec.powers:
        visit(p.id, p.trigger)
        if isinstance(p.action, Impose):
            visit(p.action.obligation.id, p.action.obligation.trigger)
            visit(p.action.obligation.id, p.action.obligation.consequent)
    return windows


def _relative_intervals(prop: Prop):
    if isinstance(prop, (And, Or)):
        yield from _relative_intervals(prop.lhs)
        yield from _relative_intervals(prop.rhs)
    elif isinstance(prop, Not):
        yield from _relative_intervals(prop.arg)
    elif isinstance(prop, HappensWithin) and isinstance(prop.interval, RelativeInterval):
        yield prop.interval


def _domain_decl(d: DomainDecl) -> str:
    head = f"{d.name}: {d.category.value}"
    if d.attributes:
        attrs = ", ".join(f"{a.name}: {a.kind}" for a in d.attributes)
        return f"{head} with {attrs};"
    return head + ";"


def _binding(b: Binding) -> str:
    head = f"{b.name}: {b.type}"
    if b.assignments:
        assigns = ", ".join(f"{name} := {_expr(e)}" for name, e in b.assignments)
        return f"{head} with {assigns};"
    return head + ";"


def _obligation(o: Obligation, windows: dict) -> str:
    return (f"{o.id}: Obligation({o.debtor}, {o.creditor}, "
            f"{print_prop(o.trigger, windows)}, {print_prop(o.consequent, windows)})")


def _power(p: Power, windows: dict) -> str:
    return (f"{p.id}: Power({p.holder}, {p.counterparty}, "
            f"{print_prop(p.trigger, windows)}, {_action(p.action, windows)});")


def _action(a, windows: dict) -> str:
    if isinstance(a, Suspend):
        return f"Suspend({', '.join(a.targets)})"
    if isinstance(a, Resume):
        return f"Resume({', '.join(a.targets)})"
    if isinstance(a, Terminate):
        return "Terminate"
    return f"Impose({_obligation(a.obligation, windows)})"


_PREC = {"or": 1, "and": 2, "not": 3}


def print_prop(p: Prop, windows: dict | None = None) -> str:
    return _prop(p, windows or {})


def _prop(p: Prop, windows: dict) -> str:
    if isinstance(p, Or):
        return f"{_child(p.lhs, 1, False, windows)} or {_child(p.rhs, 1, True, windows)}"
    if isinstance(p, And):
        return f"{_child(p.lhs, 2, False, windows)} and {_child(p.rhs, 2, True, windows)}"
    if isinstance(p, Not):
        return f"not {_child(p.arg, 3, True, windows)}"
    return _atom(p, windows)


def _prec(p: Prop) -> int:
    if isinstance(p, Or):
        return 1
    if isinstance(p, And):
        return 2
    if isinstance(p, Not):
        return 3
    return 4


def _child(p: Prop, parent_prec: int, is_right: bool, windows: dict) -> str:
    prec = _prec(p)
    needs = prec < parent_prec or (is_right and prec == parent_prec and prec < 3)
    text = _prop(p, windows)
    return f"({text})" if needs else text


def _atom(p: Prop, windows: dict) -> str:
    if isinstance(p, TrueLit):
        return "true"
    if isinstance(p, FalseLit):
        return "false"
    if isinstance(p, Happens):
        return f"Happens({p.event})"
    if isinstance(p, HappensBefore):
        return f"HappensBefore({p.event}, {_time_point(p.point)})"
    if isinstance(p, HappensAfter):
        return f"HappensAfter({p.event}, {_time_point(p.point)})"
    if isinstance(p, HappensWithin):
        return f"HappensWithin({p.event}, {_interval(p.interval, windows)})"
    if isinstance(p, ViolatedAtom):
        return f"Violated({p.obligation})"
    if isinstance(p, FulfilledAtom):
        return f"Fulfilled({p.obligation})"
    if isinstance(p, AttrCmp):
        return f"{p.event}.{p.attribute} {p.op} {_expr(p.operand)}"
    raise TypeError(f"not a proposition: {p!r}")


def _interval(iv: Interval, windows: dict) -> str:
    if isinstance(iv, AbsoluteInterval):
        return f"Interval({_time_point(iv.start)}, {_time_point(iv.end)})"
    name = windows.get(iv)
    if name is not None:
        return name
    return f"Window({iv.magnitude}, {iv.unit}, {iv.anchor})"


def _time_point(tp: TimePoint) -> str:
    if isinstance(tp, DateLit):
        return tp.value.isoformat()
    return tp.name


def _expr(e: Expr) -> str:
    if isinstance(e, NumberLit):
        return repr(e.value)
    if isinstance(e, StringLit):
        return f'"{e.value}"'
    if isinstance(e, DateLit):
        return e.value.isoformat()
    return e.name
