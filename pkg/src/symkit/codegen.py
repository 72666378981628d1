"""Deterministic chaincode-bundle generation from a valid spec.

Layout (rule GEN-L1): one file per declared event/role/asset type, an
event router, the main contract file, and a machine-readable manifest:

    events/<Type>.js   roles/<Type>.js   assets/<Type>.js
    router.js          contract.js       manifest.json

The emitted JavaScript is an output data format of this tool: correctness
is certified through manifest equivalence with the contract runtime, never
by executing the emitted text. A shared runtime-support library
(lib/symboleo-rt.js) is written alongside the bundle as a static asset and
is excluded from all LOC statistics.

Output is byte-identical across runs and platforms: no timestamps, fixed
generator version string, LF endings, insertion-ordered collections only.
"""

from __future__ import annotations

import io
import json
import zipfile
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import __version__ as GENERATOR_VERSION
from .diagnostics import E_INVALID_SPEC, SymkitError
from .locdiff import count_loc
from .model import (
    AbsoluteInterval,
    And,
    AttrCmp,
    Category,
    DateLit,
    DomainDecl,
    Expr,
    FalseLit,
    FulfilledAtom,
    Happens,
    HappensAfter,
    HappensBefore,
    HappensWithin,
    NumberLit,
    Not,
    Or,
    ParamRef,
    Prop,
    RelativeInterval,
    Spec,
    StringLit,
    TimePoint,
    TrueLit,
    ViolatedAtom,
    action_to_obj,
    expr_to_obj,
    prop_to_obj,
)
from .printer import hoist_windows
from .validator import validate

MANIFEST_SCHEMA = "symkit-manifest/1"
RUNTIME_LIB_PATH = "lib/symboleo-rt.js"


@dataclass(frozen=True)
class GeneratedBundle:
    files: dict[str, str]
    manifest: dict
    assets: dict[str, str] = field(default_factory=dict)

    @property
    def stats(self) -> dict:
        per_file = {path: count_loc(text) for path, text in self.files.items()}
        return {
            "fileCount": len(self.files),
            "totalLoc": sum(per_file.values()),
            "locPerFile": per_file,
        }


def count_bundle_loc(bundle: GeneratedBundle) -> dict:
    """LOC = non-blank lines; blank = whitespace only."""
    per_file = {path: count_loc(text) for path, text in bundle.files.items()}
    return {"perFile": per_file, "total": sum(per_file.values())}


def generate(spec: Spec) -> GeneratedBundle:
    problems = [d for d in validate(spec) if d.severity == "Error"]
    if problems:
        raise SymkitError(E_INVALID_SPEC,
                          f"refusing to generate from an invalid spec: {problems[0].message}",
                          problems)
    files: dict[str, str] = {}
    for decl in spec.domain:
        if decl.category == Category.EVENT:
            files[f"events/{decl.name}.js"] = _event_file(spec, decl)
    for decl in spec.domain:
        if decl.category == Category.ROLE:
            files[f"roles/{decl.name}.js"] = _role_file(spec, decl)
    for decl in spec.domain:
        if decl.category == Category.ASSET:
            files[f"assets/{decl.name}.js"] = _asset_file(spec, decl)
    files["router.js"] = _router_file(spec)
    files["contract.js"] = _contract_file(spec)
    manifest = build_manifest(spec)
    files["manifest.json"] = _render_manifest(manifest)
    assets = {RUNTIME_LIB_PATH: _runtime_lib()}
    return GeneratedBundle(files=files, manifest=manifest, assets=assets)


def build_manifest(spec: Spec) -> dict:
    """The state-machine manifest; structurally identical to the contract
    runtime's compiled form (see docs/manifest.md)."""
    by_category = {c: [] for c in Category}
    for b in spec.bindings:
        decl = spec.decl(b.type)
        entry = {"id": b.name, "type": b.type}
        if decl.category == Category.EVENT:
            entry["attributes"] = [{"name": a.name, "kind": a.kind} for a in decl.attributes]
        if b.assignments:
            entry["assignments"] = {name: expr_to_obj(e) for name, e in b.assignments}
        by_category[decl.category].append(entry)
    return {
        "schema": MANIFEST_SCHEMA,
        "contract": spec.name,
        "parameters": [{"name": p.name, "kind": p.kind} for p in spec.parameters],
        "events": by_category[Category.EVENT],
        "roles": by_category[Category.ROLE],
        "assets": by_category[Category.ASSET],
        "obligations": [
            {
                "id": o.id,
                "debtor": o.debtor,
                "creditor": o.creditor,
                "trigger": prop_to_obj(o.trigger),
                "consequent": prop_to_obj(o.consequent),
            }
            for o in spec.obligations
        ],
        "powers": [
            {
                "id": p.id,
                "holder": p.holder,
                "counterparty": p.counterparty,
                "trigger": prop_to_obj(p.trigger),
                "action": action_to_obj(p.action),
            }
            for p in spec.powers
        ],
    }


def write_bundle(bundle: GeneratedBundle, target: Path) -> None:
    target = Path(target)
    for path, text in list(bundle.files.items()) + list(bundle.assets.items()):
        out = target / path
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8", newline="\n")


def zip_bundle(bundle: GeneratedBundle) -> bytes:
    """Archive with a fixed timestamp so identical bundles zip identically."""
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w", zipfile.ZIP_DEFLATED) as zf:
        for path, text in list(bundle.files.items()) + list(bundle.assets.items()):
            info = zipfile.ZipInfo(path, date_time=(1980, 1, 1, 0, 0, 0))
            info.external_attr = 0o644 << 16
            zf.writestr(info, text.encode("utf-8"))
    return buffer.getvalue()


# --- file emitters -------------------------------------------------------------


def _header(spec: Spec) -> str:
    return (f"// Generated by symkit {GENERATOR_VERSION} from contract '{spec.name}'."
            " Do not edit.\n'use strict';\n")


_REQUIRE_BY_KIND = {"Number": "requireNumber", "Date": "requireDate", "String": "requireString"}


def _event_file(spec: Spec, decl: DomainDecl) -> str:
    w = _Writer()
    w.raw(_header(spec))
    w.blank()
    w.line("const { ChaincodeEvent } = require('../lib/symboleo-rt');")
    w.blank()
    w.line(f"class {decl.name} extends ChaincodeEvent {{")
    w.line("  constructor(id, timestamp, attributes) {")
    w.line(f"    super('{decl.name}', id, timestamp);")
    for a in decl.attributes:
        w.line(f"    this.{a.name} = ChaincodeEvent.{_REQUIRE_BY_KIND[a.kind]}(attributes, '{a.name}');")
    w.line("  }")
    w.blank()
    w.line("  static schema() {")
    w.line("    return {")
    w.line(f"      name: '{decl.name}',")
    w.line("      attributes: [")
    for a in decl.attributes:
        w.line(f"        {{ name: '{a.name}', kind: '{a.kind}' }},")
    w.line("      ],")
    w.line("    };")
    w.line("  }")
    w.blank()
    w.line("  toJSON() {")
    w.line("    return {")
    w.line(f"      type: '{decl.name}',")
    w.line("      id: this.id,")
    w.line("      timestamp: this.timestamp.toISOString(),")
    for a in decl.attributes:
        w.line(f"      {a.name}: this.{a.name},")
    w.line("    };")
    w.line("  }")
    w.line("}")
    w.blank()
    w.line(f"module.exports = {{ {decl.name} }};")
    return w.text()


def _role_file(spec: Spec, decl: DomainDecl) -> str:
    instances = [b.name for b in spec.bindings if b.type == decl.name]
    w = _Writer()
    w.raw(_header(spec))
    w.blank()
    w.line("const { ContractParty } = require('../lib/symboleo-rt');")
    w.blank()
    w.line(f"class {decl.name} extends ContractParty {{")
    w.line("  constructor(id) {")
    w.line(f"    super('{decl.name}', id);")
    w.line("  }")
    w.blank()
    w.line("  static bindings() {")
    w.line(f"    return [{', '.join(repr(i) for i in instances)}];")
    w.line("  }")
    w.line("}")
    w.blank()
    w.line(f"module.exports = {{ {decl.name} }};")
    return w.text()


def _asset_file(spec: Spec, decl: DomainDecl) -> str:
    w = _Writer()
    w.raw(_header(spec))
    w.blank()
    w.line("const { ContractAsset } = require('../lib/symboleo-rt');")
    w.blank()
    w.line(f"class {decl.name} extends ContractAsset {{")
    w.line("  constructor(id, attributes) {")
    w.line(f"    super('{decl.name}', id, attributes);")
    w.line("  }")
    w.blank()
    w.line("  static schema() {")
    w.line("    return {")
    w.line(f"      name: '{decl.name}',")
    w.line("      attributes: [")
    for a in decl.attributes:
        w.line(f"        {{ name: '{a.name}', kind: '{a.kind}' }},")
    w.line("      ],")
    w.line("    };")
    w.line("  }")
    w.line("}")
    w.blank()
    w.line(f"module.exports = {{ {decl.name} }};")
    return w.text()


def _router_file(spec: Spec) -> str:
    event_bindings = [(b.name, b.type) for b in spec.bindings_of(Category.EVENT)]
    event_types = sorted({t for _, t in event_bindings})
    w = _Writer()
    w.raw(_header(spec))
    w.blank()
    for t in event_types:
        w.line(f"const {{ {t} }} = require('./events/{t}');")
    w.blank()
    w.line("const EVENT_BINDINGS = {")
    for name, t in event_bindings:
        w.line(f"  {name}: {t},")
    w.line("};")
    w.blank()
    w.line("function registerEventTypes(contract) {")
    w.line("  for (const [id, ctor] of Object.entries(EVENT_BINDINGS)) {")
    w.line("    contract.declareEventType(id, ctor);")
    w.line("  }")
    w.line("}")
    w.blank()
    w.line("function routeEvent(contract, payload) {")
    w.line("  const EventType = EVENT_BINDINGS[payload.id];")
    w.line("  if (!EventType) {")
    w.line("    throw new Error(`unknown event binding: ${payload.id}`);")
    w.line("  }")
    w.line("  const occurrence = new EventType(payload.id, new Date(payload.timestamp), payload.attributes || {});")
    w.line("  return contract.submitEvent(occurrence);")
    w.line("}")
    w.blank()
    w.line("function advanceClock(contract, timestamp) {")
    w.line("  return contract.advanceClock(new Date(timestamp));")
    w.line("}")
    w.blank()
    w.line("module.exports = { EVENT_BINDINGS, advanceClock, registerEventTypes, routeEvent };")
    return w.text()


def _contract_file(spec: Spec) -> str:
    windows = hoist_windows(spec)
    window_names = {iv: name for name, iv in windows.items()}
    w = _Writer()
    w.raw(_header(spec))
    w.blank()
    w.line("const { MonitoredContract, SymProp, SymTime } = require('./lib/symboleo-rt');")
    w.line("const { registerEventTypes } = require('./router');")
    w.blank()
    w.line(f"const contract = new MonitoredContract('{spec.name}');")
    w.line("registerEventTypes(contract);")
    w.blank()
    w.line("const Params = contract.bindParameters({")
    for p in spec.parameters:
        w.line(f"  {p.name}: '{p.kind}',")
    w.line("});")
    w.blank()
    for b in spec.bindings:
        decl = spec.decl(b.type)
        if decl.category == Category.ROLE:
            w.line(f"contract.declareRole('{b.name}', '{b.type}');")
        elif decl.category == Category.ASSET:
            if b.assignments:
                w.line(f"contract.declareAsset('{b.name}', '{b.type}', {{")
                for name, e in b.assignments:
                    w.line(f"  {name}: {_js_expr(e)},")
                w.line("});")
            else:
                w.line(f"contract.declareAsset('{b.name}', '{b.type}', {{}});")
        else:
            w.line(f"contract.declareEvent('{b.name}', '{b.type}');")
    for name, iv in windows.items():
        w.blank()
        w.line(f"contract.declareWindow('{name}', {{")
        w.line(f"  anchor: '{iv.anchor}',")
        w.line(f"  magnitude: {iv.magnitude},")
        w.line(f"  unit: '{iv.unit}',")
        w.line("});")
    for o in spec.obligations:
        w.blank()
        w.line(f"contract.registerObligation('{o.id}', {{")
        w.line(f"  debtor: '{o.debtor}',")
        w.line(f"  creditor: '{o.creditor}',")
        w.line(f"  trigger: {_js_prop(o.trigger, 1, window_names)},")
        w.line(f"  consequent: {_js_prop(o.consequent, 1, window_names)},")
        w.line("});")
    for p in spec.powers:
        w.blank()
        w.line(f"contract.registerPower('{p.id}', {{")
        w.line(f"  holder: '{p.holder}',")
        w.line(f"  counterparty: '{p.counterparty}',")
        w.line(f"  trigger: {_js_prop(p.trigger, 1, window_names)},")
        w.line(f"  action: {_js_action(p.action, 1, window_names)},")
        w.line("});")
    w.blank()
    w.line("module.exports = { contract };")
    return w.text()


def _js_prop(p: Prop, depth: int, windows: dict) -> str:
    pad = "  " * depth
    inner = "  " * (depth + 1)
    if isinstance(p, TrueLit):
        return "SymProp.always()"
    if isinstance(p, FalseLit):
        return "SymProp.never()"
    if isinstance(p, (And, Or)):
        op = "and" if isinstance(p, And) else "or"
        return (f"SymProp.{op}(\n"
                f"{inner}{_js_prop(p.lhs, depth + 1, windows)},\n"
                f"{inner}{_js_prop(p.rhs, depth + 1, windows)}\n"
                f"{pad})")
    if isinstance(p, Not):
        return (f"SymProp.not(\n"
                f"{inner}{_js_prop(p.arg, depth + 1, windows)}\n"
                f"{pad})")
    if isinstance(p, Happens):
        return f"SymProp.happens('{p.event}')"
    if isinstance(p, (HappensBefore, HappensAfter)):
        fn = "happensBefore" if isinstance(p, HappensBefore) else "happensAfter"
        return (f"SymProp.{fn}('{p.event}',\n"
                f"{inner}{_js_time_point(p.point)}\n"
                f"{pad})")
    if isinstance(p, HappensWithin):
        if isinstance(p.interval, AbsoluteInterval):
            return (f"SymProp.happensWithin('{p.event}', SymTime.between(\n"
                    f"{inner}{_js_time_point(p.interval.start)},\n"
                    f"{inner}{_js_time_point(p.interval.end)}\n"
                    f"{pad}))")
        name = windows.get(p.interval)
        return (f"SymProp.happensWithin('{p.event}',\n"
                f"{inner}SymTime.window('{name}')\n"
                f"{pad})")
    if isinstance(p, ViolatedAtom):
        return f"SymProp.violated('{p.obligation}')"
    if isinstance(p, FulfilledAtom):
        return f"SymProp.fulfilled('{p.obligation}')"
    if isinstance(p, AttrCmp):
        return (f"SymProp.attrCmp('{p.event}', '{p.attribute}', "
                f"'{p.op}', {_js_expr(p.operand)})")
    raise TypeError(f"not a proposition: {p!r}")


def _js_action(action, depth: int, windows: dict) -> str:
    pad = "  " * depth
    inner = "  " * (depth + 1)
    obj = action_to_obj(action)
    if obj["type"] in ("suspend", "resume"):
        targets = ", ".join(f"'{t}'" for t in obj["targets"])
        return f"{{ type: '{obj['type']}', targets: [{targets}] }}"
    if obj["type"] == "terminate":
        return "{ type: 'terminate' }"
    ob = action.obligation
    return (f"{{\n"
            f"{inner}type: 'impose',\n"
            f"{inner}obligation: {{\n"
            f"{inner}  id: '{ob.id}',\n"
            f"{inner}  debtor: '{ob.debtor}',\n"
            f"{inner}  creditor: '{ob.creditor}',\n"
            f"{inner}  trigger: {_js_prop(ob.trigger, depth + 2, windows)},\n"
            f"{inner}  consequent: {_js_prop(ob.consequent, depth + 2, windows)},\n"
            f"{inner}}},\n"
            f"{pad}}}")


def _js_time_point(tp: TimePoint) -> str:
    if isinstance(tp, DateLit):
        return f"SymTime.date('{tp.value.isoformat()}')"
    return f"Params.{tp.name}"


def _js_expr(e: Expr) -> str:
    if isinstance(e, NumberLit):
        return repr(e.value)
    if isinstance(e, StringLit):
        return f"'{e.value}'"
    if isinstance(e, DateLit):
        return f"SymTime.date('{e.value.isoformat()}')"
    return f"Params.{e.name}"


class _Writer:
    def __init__(self):
        self.lines: list[str] = []

    def raw(self, text: str) -> None:
        self.lines.extend(text.splitlines())

    def line(self, text: str) -> None:
        self.lines.append(text)

    def blank(self) -> None:
        self.lines.append("")

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _render_manifest(manifest: dict) -> str:
    """Pretty JSON, except proposition/operand trees render on one line each
    so the manifest's line count tracks the number of declarations rather
    than proposition depth."""
    return _render_json(manifest, 0) + "\n"


_INLINE_KEYS = ("op", "kind", "type")


def _render_json(value, depth: int) -> str:
    pad = "  " * depth
    inner = "  " * (depth + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        if any(k in value for k in _INLINE_KEYS):
            return json.dumps(value, separators=(", ", ": "), ensure_ascii=False)
        parts = [f'{inner}{json.dumps(k)}: {_render_json(v, depth + 1)}' for k, v in value.items()]
        return "{\n" + ",\n".join(parts) + f"\n{pad}}}"
    if isinstance(value, list):
        if not value:
            return "[]"
        parts = [f"{inner}{_render_json(v, depth + 1)}" for v in value]
        return "[\n" + ",\n".join(parts) + f"\n{pad}]"
    return json.dumps(value, ensure_ascii=False)


def _runtime_lib() -> str:
    return (resources.files("symkit") / "assets" / "symboleo-rt.js").read_text(encoding="utf-8")
