"""Diagnostics and the stable error-code registry.

Codes are stable API: tests and UI match on codes, never on message text.
The full registry with remediation notes lives in docs/diagnostics.md.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import Span, ZERO_SPAN

# Parsing / validation (core dialect)
E_SYNTAX = "E001"
E_DUPLICATE_ID = "E101"
E_SELF_OBLIGATION = "E110"
E_UNRESOLVED = "E201"
E_KIND_MISMATCH = "E301"
W_EMPTY_INTERVAL = "W401"

# Template binding / instantiation
E_UNMAPPED_PARAM = "E501"
E_SLOT_NO_OBLIGATION = "E502"
E_MAP_KIND_MISMATCH = "E503"
E_MISSING_VALUE = "E504"
E_VALUE_KIND = "E505"
E_SLOT_OVERLOADED = "E506"
E_PLACEHOLDER_MISMATCH = "E510"
E_SLOT_MARKER = "E511"
E_BAD_ANCHOR = "E512"

# CNL refinement
E_UNKNOWN_SLOT = "E601"
E_NOT_IN_CNL = "E602"
E_PHRASE_UNRESOLVED = "E603"
E_RULE_INAPPLICABLE = "E604"
E_DUPLICATE_REFINEMENT = "E605"
E_TRIGGER_NOT_TRUE = "E606"
E_PARAM_CONFLICT = "E607"

# Code generation
E_INVALID_SPEC = "E701"

# Runtime
E_BAD_PARAM_VALUE = "E801"
E_TIME_REGRESSION = "E802"
E_UNKNOWN_EVENT = "E803"
E_POWER_NOT_IN_EFFECT = "E804"
E_BAD_EVENT = "E805"
E_CONTRACT_CLOSED = "E806"

# Service
E_NOT_FOUND = "E404"

SEVERITIES = ("Error", "Warning")


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    span: Span = field(default=ZERO_SPAN)
    severity: str = "Error"

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity,
            "range": {
                "start": {"line": self.span.start.line, "col": self.span.start.col},
                "end": {"line": self.span.end.line, "col": self.span.end.col},
            },
            "message": self.message,
        }


def warning(code: str, message: str, span: Span = ZERO_SPAN) -> Diagnostic:
    return Diagnostic(code, message, span, severity="Warning")


def has_errors(diags: list[Diagnostic]) -> bool:
    return any(d.severity == "Error" for d in diags)


def sort_diagnostics(diags: list[Diagnostic]) -> list[Diagnostic]:
    """Deterministic order: by span, then code, then message."""
    return sorted(diags, key=lambda d: (
        d.span.start.line, d.span.start.col,
        d.span.end.line, d.span.end.col,
        d.code, d.message,
    ))


class SymkitError(Exception):
    """Operation failure carrying a machine code; maps to CLI exit codes and HTTP statuses."""

    def __init__(self, code: str, message: str, diagnostics: list[Diagnostic] | None = None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.diagnostics = diagnostics or [Diagnostic(code, message)]

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "message": self.message,
            "diagnostics": [d.to_json() for d in self.diagnostics],
        }
