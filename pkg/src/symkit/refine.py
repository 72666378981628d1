"""Apply CNL refinements to a template/spec pair.

Rewrite rules over the bound obligation (consequent must be a plain
Happens(e) for the temporal forms):

  T1  before d            Happens(e) -> HappensBefore(e, d)
  T2  after d             Happens(e) -> HappensAfter(e, d)
  T3  between d1 and d2   Happens(e) -> HappensWithin(e, Interval(d1, d2))
  T4  within n u of ph    Happens(e) -> HappensWithin(e, Window(n, u, resolve(ph)))
  C1  if ph               trigger true -> Happens(resolve(ph))

Bracketed dates introduce new Date parameters; phrase resolution may
synthesize a fresh event declaration+binding, appended to the Domain and
Declarations sections. Nothing is ever removed, so the canonical diff of
any refinement has zero deleted lines.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .cnl import (
    After,
    Before,
    Between,
    CnlRefinement,
    DatePlaceholder,
    EventPhrase,
    If,
    WithinOf,
    resolve_entity,
    stem_gerund,
)
from .diagnostics import (
    E_DUPLICATE_REFINEMENT,
    E_PARAM_CONFLICT,
    E_PHRASE_UNRESOLVED,
    E_RULE_INAPPLICABLE,
    E_TRIGGER_NOT_TRUE,
    E_UNKNOWN_SLOT,
    E_NOT_IN_CNL,
    SymkitError,
    has_errors,
)
from .locdiff import DiffStat, diff_lines
from .model import (
    AbsoluteInterval,
    Binding,
    Category,
    DateLit,
    DomainDecl,
    Happens,
    HappensAfter,
    HappensBefore,
    HappensWithin,
    Parameter,
    ParamRef,
    RelativeInterval,
    Spec,
    TrueLit,
)
from .printer import print_spec
from .template import DEFAULT_LEXICON, TemplatePair, render_text
from .validator import validate
from . import cnl


@dataclass(frozen=True)
class ResolvedEvent:
    phrase: str
    event: str
    created: bool

    def to_json(self) -> dict:
        return {"phrase": self.phrase, "event": self.event, "created": self.created}


@dataclass(frozen=True)
class AppliedRefinement:
    slot: str
    form_class: str  # "temporal" | "conditional"
    adjunct: str     # template-surface text, placeholders as <NAME>


@dataclass(frozen=True)
class RefinementResult:
    pair: TemplatePair                      # refined spec, same template
    applied: tuple[AppliedRefinement, ...]
    spec_delta: DiffStat                    # canonical diff vs the input spec
    refined_template_text: str
    resolved_events: tuple[ResolvedEvent, ...]

    @property
    def spec(self) -> Spec:
        return self.pair.spec


def resolve_event_phrase(phrase: EventPhrase, spec: Spec,
                         lexicon: tuple[str, ...] = DEFAULT_LEXICON,
                         ) -> tuple[str, bool, tuple[DomainDecl, ...], tuple[Binding, ...]]:
    """Match a phrase against existing event bindings by naming convention,
    or synthesize a fresh declaration+binding.

    Candidate names, most specific first: evt_<stem>_<subject>_<object>,
    evt_<stem>_<subject>, evt_<stem>_<object>, evt_<stem>. The first
    candidate naming an Event binding wins (created=False); otherwise the
    most specific candidate is created."""
    subject = resolve_entity(phrase.subject, spec, roles_only=True)
    if subject is None:
        raise SymkitError(E_PHRASE_UNRESOLVED,
                          f"'{phrase.subject}' does not name a contract party")
    stem = stem_gerund(phrase.verb, lexicon)
    if stem is None:
        raise SymkitError(E_PHRASE_UNRESOLVED, f"'{phrase.verb}' is not a known verb")
    obj = None
    if phrase.object is not None:
        obj = resolve_entity(phrase.object, spec)
        if obj is None:
            raise SymkitError(E_PHRASE_UNRESOLVED,
                              f"'{phrase.object}' does not name a party or asset")

    candidates = []
    if obj is not None:
        candidates.append(f"evt_{stem}_{subject}_{obj}")
    candidates.append(f"evt_{stem}_{subject}")
    if obj is not None:
        candidates.append(f"evt_{stem}_{obj}")
    candidates.append(f"evt_{stem}")
    for c in candidates:
        if spec.binding_category(c) == Category.EVENT:
            return c, False, (), ()

    name = candidates[0]
    suffix = 1
    while spec.binding(name) is not None:
        suffix += 1
        name = f"{candidates[0]}_{suffix}"
    parts = [stem, subject] + ([obj] if obj is not None else [])
    type_name = "".join(p.capitalize() for part in parts for p in part.split("_"))
    while spec.decl(type_name) is not None:
        type_name += "Evt"
    decl = DomainDecl(type_name, Category.EVENT)
    binding = Binding(name, type_name)
    return name, True, (decl,), (binding,)


def apply_refinement(pair: TemplatePair, refinement: CnlRefinement,
                     applied: tuple[AppliedRefinement, ...] = ()) -> RefinementResult:
    template, spec = pair.template, pair.spec
    slot = template.slot(refinement.slot)
    if slot is None:
        raise SymkitError(E_UNKNOWN_SLOT, f"unknown slot '{refinement.slot}'")
    obligation = spec.obligation(slot.obligation)
    form = refinement.form
    form_class = "conditional" if refinement.is_conditional else "temporal"
    for prior in applied:
        if prior.slot == refinement.slot and prior.form_class == form_class:
            raise SymkitError(E_DUPLICATE_REFINEMENT,
                              f"slot '{refinement.slot}' already carries a {form_class} refinement")

    new_params: list[Parameter] = []
    new_domain: tuple[DomainDecl, ...] = ()
    new_bindings: tuple[Binding, ...] = ()
    resolved: list[ResolvedEvent] = []

    def time_point(d):
        if isinstance(d, DatePlaceholder):
            existing = spec.parameter(d.name)
            if existing is None:
                if all(p.name != d.name for p in new_params):
                    new_params.append(Parameter(d.name, "Date"))
            elif existing.kind != "Date":
                raise SymkitError(
                    E_PARAM_CONFLICT,
                    f"placeholder '[{d.name}]' clashes with {existing.kind} parameter '{d.name}'")
            return ParamRef(d.name)
        return DateLit(d)

    def resolve(phrase: EventPhrase) -> str:
        nonlocal new_domain, new_bindings
        event, created, decls, bindings = resolve_event_phrase(phrase, spec, template.lexicon)
        new_domain += decls
        new_bindings += bindings
        resolved.append(ResolvedEvent(phrase.surface(), event, created))
        return event

    if isinstance(form, If):
        if obligation.trigger != TrueLit():
            raise SymkitError(
                E_TRIGGER_NOT_TRUE,
                f"obligation '{obligation.id}' already has a non-trivial trigger")
        new_obligation = replace(obligation, trigger=Happens(resolve(form.phrase)))
    else:
        consequent = obligation.consequent
        if not isinstance(consequent, Happens):
            if isinstance(consequent, (HappensBefore, HappensAfter, HappensWithin)):
                raise SymkitError(
                    E_DUPLICATE_REFINEMENT,
                    f"obligation '{obligation.id}' is already temporally refined")
            raise SymkitError(
                E_RULE_INAPPLICABLE,
                f"consequent of '{obligation.id}' is not of the form Happens(e)")
        e = consequent.event
        if isinstance(form, Before):
            rewritten = HappensBefore(e, time_point(form.date))
        elif isinstance(form, After):
            rewritten = HappensAfter(e, time_point(form.date))
        elif isinstance(form, Between):
            rewritten = HappensWithin(e, AbsoluteInterval(time_point(form.start),
                                                          time_point(form.end)))
        elif isinstance(form, WithinOf):
            rewritten = HappensWithin(e, RelativeInterval(resolve(form.phrase),
                                                          form.magnitude, form.unit))
        else:
            raise SymkitError(E_NOT_IN_CNL, f"unsupported refinement form {form!r}")
        new_obligation = replace(obligation, consequent=rewritten)

    refined = Spec(
        name=spec.name,
        parameters=spec.parameters + tuple(new_params),
        domain=spec.domain + new_domain,
        bindings=spec.bindings + new_bindings,
        obligations=tuple(new_obligation if o.id == obligation.id else o
                          for o in spec.obligations),
        powers=spec.powers,
    )
    problems = validate(refined)
    if has_errors(problems):
        raise SymkitError(problems[0].code,
                          f"refinement produced an invalid spec: {problems[0].message}",
                          problems)

    delta = diff_lines(print_spec(spec), print_spec(refined))
    assert delta.deleted == 0, "refinements must never delete canonical lines"

    entry = AppliedRefinement(refinement.slot, form_class,
                              _template_surface(refinement.surface))
    all_applied = applied + (entry,)
    text = render_text(template, _adjuncts_by_slot(all_applied))
    return RefinementResult(
        pair=TemplatePair(template, refined, dict(pair.param_map)),
        applied=all_applied,
        spec_delta=delta,
        refined_template_text=text,
        resolved_events=tuple(resolved),
    )


def _template_surface(surface: str) -> str:
    """CNL surface text in template notation: [NAME] placeholders become <NAME>."""
    return surface.replace("[", "<").replace("]", ">")


def _adjuncts_by_slot(applied: tuple[AppliedRefinement, ...]) -> dict[str, str]:
    by_slot: dict[str, dict[str, str]] = {}
    for a in applied:
        by_slot.setdefault(a.slot, {})[a.form_class] = a.adjunct
    return {
        slot: " ".join(texts[c] for c in ("temporal", "conditional") if c in texts)
        for slot, texts in by_slot.items()
    }


# --- refinement scripts --------------------------------------------------------

def parse_script(text: str) -> list[tuple[str, str]]:
    """One directive per line: `P<k>: <CNL text>`. Blank lines and lines
    starting with '#' are skipped."""
    directives = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        slot, sep, cnl_text = line.partition(":")
        if not sep or not slot.strip() or not cnl_text.strip():
            raise SymkitError(E_NOT_IN_CNL,
                              f"line {lineno}: expected 'P<k>: <CNL text>', got '{line}'")
        directives.append((slot.strip(), cnl_text.strip()))
    return directives


def apply_script(pair: TemplatePair, script: str) -> RefinementResult:
    """Apply the directives top to bottom; the reported delta is the canonical
    diff between the incoming spec and the final refined spec."""
    base_spec = pair.spec
    current = pair
    applied: tuple[AppliedRefinement, ...] = ()
    resolved: tuple[ResolvedEvent, ...] = ()
    result: RefinementResult | None = None
    for slot_id, cnl_text in parse_script(script):
        refinement, diags = cnl.parse_cnl(cnl_text, current, slot_id)
        if refinement is None:
            raise SymkitError(diags[0].code, diags[0].message, diags)
        result = apply_refinement(current, refinement, applied)
        current = result.pair
        applied = result.applied
        resolved += result.resolved_events
    if result is None:
        raise SymkitError(E_NOT_IN_CNL, "script contains no directives")
    return RefinementResult(
        pair=current,
        applied=applied,
        spec_delta=diff_lines(print_spec(base_spec), print_spec(current.spec)),
        refined_template_text=result.refined_template_text,
        resolved_events=resolved,
    )
