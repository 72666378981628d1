"""symkit: contract templates -> CNL refinements -> Symboleo-dialect specs
-> monitoring chaincode bundles, plus an executable contract runtime."""

from importlib import resources

from .parser import parse
from .printer import print_spec
from .validator import validate

__version__ = "0.1.0"

__all__ = ["parse", "print_spec", "validate", "fixture_path", "fixture_text", "__version__"]


def fixture_path(name: str):
    """Path to a bundled fixture file (context manager not needed: regular install)."""
    return resources.files("symkit") / "fixtures" / name


def fixture_text(name: str) -> str:
    return fixture_path(name).read_text(encoding="utf-8")
