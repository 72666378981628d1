"""Contract monitoring runtime: deontic state machines over an event stream.

Lifecycles:
    Obligation: Created -> InEffect -> {Fulfilled | Violated}, InEffect <-> Suspended
    Power:      Created -> InEffect -> {Exerted | Expired}
    Contract:   InEffect -> {Fulfilled | Terminated}

Satisfaction is monitored three-valued: every proposition is either
satisfied, still satisfiable, or impossible. All atoms are monotone in the
event log, so an InEffect obligation moves to Fulfilled the moment its
consequent is satisfied and to Violated the moment it becomes impossible
(deadline passed without the event). Suspended obligations never move to
Fulfilled/Violated; on resume, deadlines re-evaluate at the current clock.

Day-boundary conventions (documented, minute granularity internally):
    before d        ts <  d 00:00
    after d         ts >= (d+1) 00:00
    between d1, d2  d1 00:00 <= ts < (d2+1) 00:00
    within n u of a first(a) <= ts <= first(a) + n u

Powers are exerted explicitly, never auto-fired. The contract becomes
Fulfilled when every obligation is Fulfilled and no power is pending
exertion (InEffect); Terminate freezes everything. Terminal instances
reject further mutation.
"""

from __future__ import annotations

import datetime as dt
import json
import threading
from dataclasses import dataclass, field

from .diagnostics import (
    E_BAD_EVENT,
    E_BAD_PARAM_VALUE,
    E_CONTRACT_CLOSED,
    E_INVALID_SPEC,
    E_POWER_NOT_IN_EFFECT,
    E_TIME_REGRESSION,
    E_UNKNOWN_EVENT,
    SymkitError,
)
from .model import (
    AbsoluteInterval,
    And,
    AttrCmp,
    Category,
    DateLit,
    FalseLit,
    FulfilledAtom,
    Happens,
    HappensAfter,
    HappensBefore,
    HappensWithin,
    Impose,
    NumberLit,
    Not,
    NUMERIC_KINDS,
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
    TrueLit,
    action_to_obj,
    duration_end,
    expr_to_obj,
    prop_to_obj,
)
from .validator import validate

OBLIGATION_STATES = ("Created", "InEffect", "Suspended", "Fulfilled", "Violated")
POWER_STATES = ("Created", "InEffect", "Exerted", "Expired")
CONTRACT_STATES = ("InEffect", "Fulfilled", "Terminated")

TERMINAL_OBLIGATION = ("Fulfilled", "Violated")


@dataclass(frozen=True)
class EventOccurrence:
    event: str
    timestamp: dt.datetime
    attributes: dict

    def to_json(self) -> dict:
        return {"event": self.event, "timestamp": self.timestamp.isoformat(),
                "attributes": dict(self.attributes)}


@dataclass(frozen=True)
class Transition:
    entity: str
    kind: str  # obligation | power | contract
    frm: str
    to: str
    reason: str

    def to_json(self) -> dict:
        return {"entity": self.entity, "kind": self.kind,
                "from": self.frm, "to": self.to, "reason": self.reason}


@dataclass(frozen=True)
class CompiledContract:
    spec: Spec
    params: dict
    obligations: tuple[Obligation, ...]   # declared only; imposition happens at runtime
    powers: tuple[Power, ...]

    def machine_shape(self) -> dict:
        """Structural description of the compiled state machines, for
        comparison against a generated bundle's manifest."""
        spec = self.spec
        groups = {Category.EVENT: [], Category.ROLE: [], Category.ASSET: []}
        for b in spec.bindings:
            decl = spec.decl(b.type)
            entry = {"id": b.name, "type": b.type}
            if decl.category == Category.EVENT:
                entry["attributes"] = [{"name": a.name, "kind": a.kind}
                                       for a in decl.attributes]
            if b.assignments:
                entry["assignments"] = {name: expr_to_obj(e) for name, e in b.assignments}
            groups[decl.category].append(entry)
        return {
            "schema": "symkit-manifest/1",
            "contract": spec.name,
            "parameters": [{"name": p.name, "kind": p.kind} for p in spec.parameters],
            "events": groups[Category.EVENT],
            "roles": groups[Category.ROLE],
            "assets": groups[Category.ASSET],
            "obligations": [
                {"id": o.id, "debtor": o.debtor, "creditor": o.creditor,
                 "trigger": prop_to_obj(o.trigger),
                 "consequent": prop_to_obj(o.consequent)}
                for o in self.obligations
            ],
            "powers": [
                {"id": p.id, "holder": p.holder, "counterparty": p.counterparty,
                 "trigger": prop_to_obj(p.trigger),
                 "action": action_to_obj(p.action)}
                for p in self.powers
            ],
        }


def compile_contract(spec: Spec, param_values: dict) -> CompiledContract:
    problems = [d for d in validate(spec) if d.severity == "Error"]
    if problems:
        raise SymkitError(E_INVALID_SPEC,
                          f"cannot compile an invalid spec: {problems[0].message}", problems)
    params: dict = {}
    for p in spec.parameters:
        if p.name not in param_values:
            raise SymkitError(E_BAD_PARAM_VALUE, f"missing value for parameter '{p.name}'")
        params[p.name] = _coerce_param(p.name, p.kind, param_values[p.name])
    resolved_obligations = tuple(_resolve_obligation(o, params) for o in spec.obligations)
    resolved_powers = tuple(
        Power(p.id, p.holder, p.counterparty, _substitute(p.trigger, params),
              _resolve_action(p.action, params))
        for p in spec.powers
    )
    return CompiledContract(spec, params, resolved_obligations, resolved_powers)


def _resolve_obligation(o: Obligation, params: dict) -> Obligation:
    return Obligation(o.id, o.debtor, o.creditor,
                      _substitute(o.trigger, params), _substitute(o.consequent, params))


def _resolve_action(action, params: dict):
    if isinstance(action, Impose):
        return Impose(_resolve_obligation(action.obligation, params))
    return action


def _coerce_param(name: str, kind: str, value):
    if kind == "Date":
        d = _as_date(value)
        if d is None:
            raise SymkitError(E_BAD_PARAM_VALUE, f"parameter '{name}' expects a date, got {value!r}")
        return d
    if kind in NUMERIC_KINDS:
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise SymkitError(E_BAD_PARAM_VALUE, f"parameter '{name}' expects a number, got {value!r}")
        try:
            return float(value) if not isinstance(value, (int, float)) else value
        except ValueError:
            raise SymkitError(E_BAD_PARAM_VALUE,
                              f"parameter '{name}' expects a number, got {value!r}") from None
    if not isinstance(value, str) or not value:
        raise SymkitError(E_BAD_PARAM_VALUE, f"parameter '{name}' expects text, got {value!r}")
    return value


def _as_date(value) -> dt.date | None:
    if isinstance(value, dt.datetime):
        return value.date()
    if isinstance(value, dt.date):
        return value
    if isinstance(value, str):
        try:
            return dt.date.fromisoformat(value)
        except ValueError:
            return None
    return None


def _substitute(prop: Prop, params: dict) -> Prop:
    """Replace parameter references by their bound literals."""
    if isinstance(prop, And):
        return And(_substitute(prop.lhs, params), _substitute(prop.rhs, params))
    if isinstance(prop, Or):
        return Or(_substitute(prop.lhs, params), _substitute(prop.rhs, params))
    if isinstance(prop, Not):
        return Not(_substitute(prop.arg, params))
    if isinstance(prop, HappensBefore):
        return HappensBefore(prop.event, _subst_point(prop.point, params))
    if isinstance(prop, HappensAfter):
        return HappensAfter(prop.event, _subst_point(prop.point, params))
    if isinstance(prop, HappensWithin) and isinstance(prop.interval, AbsoluteInterval):
        return HappensWithin(prop.event, AbsoluteInterval(
            _subst_point(prop.interval.start, params),
            _subst_point(prop.interval.end, params)))
    if isinstance(prop, AttrCmp) and isinstance(prop.operand, ParamRef):
        value = params[prop.operand.name]
        operand = DateLit(value) if isinstance(value, dt.date) else (
            NumberLit(value) if isinstance(value, (int, float)) else StringLit(value))
        return AttrCmp(prop.event, prop.attribute, prop.op, operand)
    return prop


def _subst_point(point, params: dict):
    if isinstance(point, ParamRef):
        return DateLit(params[point.name])
    return point


def parse_timestamp(value) -> dt.datetime:
    """Minute granularity; bare dates mean midnight."""
    if isinstance(value, dt.datetime):
        ts = value
    elif isinstance(value, dt.date):
        ts = dt.datetime.combine(value, dt.time())
    elif isinstance(value, str):
        try:
            ts = dt.datetime.fromisoformat(value)
        except ValueError:
            raise SymkitError(E_TIME_REGRESSION, f"unreadable timestamp {value!r}") from None
    else:
        raise SymkitError(E_TIME_REGRESSION, f"unreadable timestamp {value!r}")
    return ts.replace(second=0, microsecond=0, tzinfo=None)


class ContractInstance:
    """Single-writer: mutating calls are serialized on an internal lock;
    status() takes the same lock to return a point-in-time snapshot."""

    def __init__(self, compiled: CompiledContract, start_time):
        self.compiled = compiled
        self.clock = parse_timestamp(start_time)
        self.event_log: list[EventOccurrence] = []
        self.contract_state = "InEffect"
        self._lock = threading.RLock()
        self._obligations: dict[str, Obligation] = {o.id: o for o in compiled.obligations}
        self.obligation_states: dict[str, str] = {}
        self.power_states: dict[str, str] = {p.id: "Created" for p in compiled.powers}
        initial: list[Transition] = []
        for o in compiled.obligations:
            if _sat(o.trigger, self):
                self.obligation_states[o.id] = "InEffect"
                initial.append(Transition(o.id, "obligation", "Created", "InEffect",
                                          "trigger holds at instantiation"))
            else:
                self.obligation_states[o.id] = "Created"
        self.initial_report = initial

    # -- queries -----------------------------------------------------------

    def occurrences(self, event: str) -> list[EventOccurrence]:
        return [e for e in self.event_log if e.event == event]

    def first_occurrence(self, event: str) -> EventOccurrence | None:
        for e in self.event_log:
            if e.event == event:
                return e
        return None

    def obligation_state(self, oid: str) -> str:
        return self.obligation_states.get(oid, "Created")

    def status(self) -> dict:
        with self._lock:
            deadlines = []
            for oid, state in self.obligation_states.items():
                if state != "InEffect":
                    continue
                deadline = _earliest_deadline(self._obligations[oid].consequent, self)
                if deadline is not None:
                    deadlines.append({"obligation": oid, "deadline": deadline.isoformat()})
            deadlines.sort(key=lambda d: (d["deadline"], d["obligation"]))
            return {
                "contract": self.contract_state,
                "clock": self.clock.isoformat(),
                "obligations": dict(self.obligation_states),
                "powers": dict(self.power_states),
                "pendingDeadlines": deadlines,
                "eventCount": len(self.event_log),
            }

    # -- mutations -----------------------------------------------------------

    def submit_event(self, occurrence_or_event, timestamp=None, attributes=None) -> list[Transition]:
        if not isinstance(occurrence_or_event, EventOccurrence):
            occurrence = EventOccurrence(occurrence_or_event, parse_timestamp(timestamp),
                                         dict(attributes or {}))
        else:
            occurrence = occurrence_or_event
        with self._lock:
            self._require_open()
            if occurrence.timestamp < self.clock:
                raise SymkitError(
                    E_TIME_REGRESSION,
                    f"event at {occurrence.timestamp.isoformat()} is before the clock "
                    f"{self.clock.isoformat()}")
            self._check_event(occurrence)
            self.event_log.append(occurrence)
            self.clock = occurrence.timestamp
            return self._settle(f"event {occurrence.event}")

    def tick(self, new_time) -> list[Transition]:
        ts = parse_timestamp(new_time)
        with self._lock:
            self._require_open()
            if ts < self.clock:
                raise SymkitError(E_TIME_REGRESSION,
                                  f"tick to {ts.isoformat()} is before the clock "
                                  f"{self.clock.isoformat()}")
            self.clock = ts
            return self._settle(f"tick to {ts.isoformat()}")

    def exert_power(self, pid: str) -> list[Transition]:
        with self._lock:
            self._require_open()
            state = self.power_states.get(pid)
            power = next((p for p in self.compiled.powers if p.id == pid), None)
            if power is None or state is None:
                raise SymkitError(E_POWER_NOT_IN_EFFECT, f"unknown power '{pid}'")
            if state != "InEffect":
                raise SymkitError(E_POWER_NOT_IN_EFFECT,
                                  f"power '{pid}' is {state}, not InEffect")
            report = [self._move_power(pid, "Exerted", "exerted")]
            report += self._apply_action(power)
            report += self._settle(f"after exerting {pid}")
            return report

    # -- internals -------------------------------------------------------------

    def _require_open(self) -> None:
        if self.contract_state != "InEffect":
            raise SymkitError(E_CONTRACT_CLOSED,
                              f"contract is {self.contract_state}; no further operations")

    def _check_event(self, occurrence: EventOccurrence) -> None:
        spec = self.compiled.spec
        if spec.binding_category(occurrence.event) != Category.EVENT:
            raise SymkitError(E_UNKNOWN_EVENT, f"unknown event id '{occurrence.event}'")
        decl = spec.decl(spec.binding(occurrence.event).type)
        declared = {a.name: a.kind for a in decl.attributes}
        for name, kind in declared.items():
            if name not in occurrence.attributes:
                raise SymkitError(E_BAD_EVENT,
                                  f"event '{occurrence.event}' is missing attribute '{name}'")
            value = occurrence.attributes[name]
            ok = ((kind == "Number" and isinstance(value, (int, float)) and not isinstance(value, bool))
                  or (kind == "Date" and _as_date(value) is not None)
                  or (kind == "String" and isinstance(value, str)))
            if not ok:
                raise SymkitError(E_BAD_EVENT,
                                  f"attribute '{name}' of '{occurrence.event}' must be {kind}")
        for name in occurrence.attributes:
            if name not in declared:
                raise SymkitError(E_BAD_EVENT,
                                  f"event '{occurrence.event}' has no attribute '{name}'")

    def _apply_action(self, power: Power) -> list[Transition]:
        action = power.action
        report: list[Transition] = []
        if isinstance(action, Suspend):
            for target in action.targets:
                if self.obligation_states.get(target) == "InEffect":
                    report.append(self._move_obligation(target, "Suspended",
                                                        f"suspended by {power.id}"))
        elif isinstance(action, Resume):
            for target in action.targets:
                if self.obligation_states.get(target) == "Suspended":
                    report.append(self._move_obligation(target, "InEffect",
                                                        f"resumed by {power.id}"))
        elif isinstance(action, Terminate):
            report.append(self._close("Terminated", f"terminated by {power.id}"))
        else:  # Impose
            imposed = action.obligation
            self._obligations[imposed.id] = imposed
            self.obligation_states[imposed.id] = "InEffect"
            report.append(Transition(imposed.id, "obligation", "Created", "InEffect",
                                     f"imposed by {power.id}"))
        return report

    def _settle(self, reason: str) -> list[Transition]:
        """Re-evaluate all machines to a fixpoint; deterministic order:
        obligations in declaration (then imposition) order, then powers."""
        report: list[Transition] = []
        while True:
            changed = False
            for oid in list(self.obligation_states):
                state = self.obligation_states[oid]
                ob = self._obligations[oid]
                if state == "Created" and _sat(ob.trigger, self):
                    report.append(self._move_obligation(oid, "InEffect", f"trigger holds ({reason})"))
                    state = "InEffect"
                    changed = True
                if state == "InEffect":
                    if _sat(ob.consequent, self):
                        report.append(self._move_obligation(oid, "Fulfilled",
                                                            f"consequent satisfied ({reason})"))
                        changed = True
                    elif not _possible(ob.consequent, self):
                        report.append(self._move_obligation(oid, "Violated",
                                                            f"consequent impossible ({reason})"))
                        changed = True
            for power in self.compiled.powers:
                if self.power_states[power.id] == "Created" and _sat(power.trigger, self):
                    report.append(self._move_power(power.id, "InEffect",
                                                   f"trigger holds ({reason})"))
                    changed = True
            if not changed:
                break
        if self.contract_state == "InEffect" and self.obligation_states and all(
                s == "Fulfilled" for s in self.obligation_states.values()) and not any(
                s == "InEffect" for s in self.power_states.values()):
            report.append(self._close("Fulfilled", "all obligations fulfilled"))
        return report

    def _close(self, state: str, reason: str) -> Transition:
        transition = Transition("contract", "contract", self.contract_state, state, reason)
        self.contract_state = state
        for pid, pstate in self.power_states.items():
            if pstate == "InEffect":
                self.power_states[pid] = "Expired"
        return transition

    def _move_obligation(self, oid: str, to: str, reason: str) -> Transition:
        frm = self.obligation_states[oid]
        self.obligation_states[oid] = to
        return Transition(oid, "obligation", frm, to, reason)

    def _move_power(self, pid: str, to: str, reason: str) -> Transition:
        frm = self.power_states[pid]
        self.power_states[pid] = to
        return Transition(pid, "power", frm, to, reason)


def instantiate(compiled: CompiledContract, start_time) -> ContractInstance:
    return ContractInstance(compiled, start_time)


# --- three-valued proposition evaluation -----------------------------------------


def _day_start(d: dt.date) -> dt.datetime:
    return dt.datetime.combine(d, dt.time())


def _sat(prop: Prop, inst: ContractInstance) -> bool:
    if isinstance(prop, TrueLit):
        return True
    if isinstance(prop, FalseLit):
        return False
    if isinstance(prop, And):
        return _sat(prop.lhs, inst) and _sat(prop.rhs, inst)
    if isinstance(prop, Or):
        return _sat(prop.lhs, inst) or _sat(prop.rhs, inst)
    if isinstance(prop, Not):
        return not _sat(prop.arg, inst)
    if isinstance(prop, Happens):
        return bool(inst.occurrences(prop.event))
    if isinstance(prop, HappensBefore):
        boundary = _day_start(prop.point.value)
        return any(e.timestamp < boundary for e in inst.occurrences(prop.event))
    if isinstance(prop, HappensAfter):
        boundary = _day_start(prop.point.value) + dt.timedelta(days=1)
        return any(e.timestamp >= boundary for e in inst.occurrences(prop.event))
    if isinstance(prop, HappensWithin):
        window = _window_bounds(prop.interval, inst)
        if window is None:
            return False
        start, end_exclusive = window
        return any(start <= e.timestamp < end_exclusive for e in inst.occurrences(prop.event))
    if isinstance(prop, ViolatedAtom):
        return inst.obligation_state(prop.obligation) == "Violated"
    if isinstance(prop, FulfilledAtom):
        return inst.obligation_state(prop.obligation) == "Fulfilled"
    if isinstance(prop, AttrCmp):
        return any(_cmp(e.attributes.get(prop.attribute), prop.op, prop.operand)
                   for e in inst.occurrences(prop.event))
    raise TypeError(f"not a proposition: {prop!r}")


def _possible(prop: Prop, inst: ContractInstance) -> bool:
    """Whether the proposition is satisfied now or could still become
    satisfied later. Sound for the monotone atoms of this dialect."""
    if _sat(prop, inst):
        return True
    if isinstance(prop, FalseLit):
        return False
    if isinstance(prop, And):
        return _possible(prop.lhs, inst) and _possible(prop.rhs, inst)
    if isinstance(prop, Or):
        return _possible(prop.lhs, inst) or _possible(prop.rhs, inst)
    if isinstance(prop, Not):
        # Atoms only ever gain satisfaction, so a satisfied argument pins
        # the negation false forever.
        return not _sat(prop.arg, inst)
    if isinstance(prop, HappensBefore):
        return inst.clock < _day_start(prop.point.value)
    if isinstance(prop, HappensWithin):
        window = _window_bounds(prop.interval, inst)
        if window is None:
            return True  # anchor has not happened; the window may still open
        return inst.clock < window[1]
    # Happens, HappensAfter, AttrCmp: a future occurrence can always satisfy.
    if isinstance(prop, (Happens, HappensAfter, AttrCmp)):
        return True
    if isinstance(prop, ViolatedAtom):
        return inst.obligation_state(prop.obligation) not in ("Fulfilled",)
    if isinstance(prop, FulfilledAtom):
        return inst.obligation_state(prop.obligation) not in ("Violated",)
    return True


def _window_bounds(interval, inst: ContractInstance) -> tuple[dt.datetime, dt.datetime] | None:
    """Half-open [start, end) datetime bounds, or None when a relative
    window's anchor has not occurred yet."""
    if isinstance(interval, AbsoluteInterval):
        start = _day_start(interval.start.value)
        end_exclusive = _day_start(interval.end.value) + dt.timedelta(days=1)
        return start, end_exclusive
    anchor = inst.first_occurrence(interval.anchor)
    if anchor is None:
        return None
    start = anchor.timestamp
    end_inclusive = duration_end(start, interval.magnitude, interval.unit)
    return start, end_inclusive + dt.timedelta(minutes=1)


def _earliest_deadline(prop: Prop, inst: ContractInstance) -> dt.datetime | None:
    deadlines = []
    for atom in _atoms(prop):
        if isinstance(atom, HappensBefore):
            deadlines.append(_day_start(atom.point.value))
        elif isinstance(atom, HappensWithin):
            window = _window_bounds(atom.interval, inst)
            if window is not None:
                deadlines.append(window[1])
    return min(deadlines) if deadlines else None


def _atoms(prop: Prop):
    if isinstance(prop, (And, Or)):
        yield from _atoms(prop.lhs)
        yield from _atoms(prop.rhs)
    elif isinstance(prop, Not):
        yield from _atoms(prop.arg)
    else:
        yield prop


def _cmp(value, op: str, operand) -> bool:
    if isinstance(operand, NumberLit):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            return False
        other = operand.value
    elif isinstance(operand, DateLit):
        value = _as_date(value)
        if value is None:
            return False
        other = operand.value
    else:
        if not isinstance(value, str):
            return False
        other = operand.value
    if op == "<":
        return value < other
    if op == "<=":
        return value <= other
    if op == "=":
        return value == other
    if op == ">=":
        return value >= other
    return value > other


# --- scenario scripts -------------------------------------------------------------


def parse_scenario(text: str) -> list[dict]:
    """JSON lines: {"op": "event"|"tick"|"exert", ...}."""
    steps = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            step = json.loads(line)
        except json.JSONDecodeError as e:
            raise SymkitError(E_BAD_EVENT, f"scenario line {lineno} is not JSON: {e}") from e
        if not isinstance(step, dict) or step.get("op") not in ("event", "tick", "exert"):
            raise SymkitError(E_BAD_EVENT,
                              f"scenario line {lineno}: op must be event, tick or exert")
        steps.append(step)
    return steps


def replay(instance: ContractInstance, steps: list[dict]) -> list[dict]:
    """Run a scenario; returns one entry per step with its transition report."""
    out = []
    for step in steps:
        if step["op"] == "event":
            report = instance.submit_event(step["id"], step["ts"], step.get("attrs", {}))
        elif step["op"] == "tick":
            report = instance.tick(step["ts"])
        else:
            report = instance.exert_power(step["power"])
        out.append({"op": step["op"],
                    "detail": {k: v for k, v in step.items() if k != "op"},
                    "transitions": [t.to_json() for t in report]})
    return out
