"""OpenQASM 2.0 frontend: lexing, parsing, include resolution, elaboration."""
from __future__ import annotations

from pathlib import Path

from .ast import Program, canonical, pretty_print, to_json
from .elaborate import elaborate
from .includes import QELIB1, resolve_includes
from .ir import CircuitIR, Directive, Instruction
from .parser import parse
from .tokens import Span, Token, tokenize

__all__ = [
    "CircuitIR",
    "Directive",
    "Instruction",
    "Program",
    "QELIB1",
    "Span",
    "Token",
    "canonical",
    "elaborate",
    "load_file",
    "load_source",
    "parse",
    "pretty_print",
    "resolve_includes",
    "to_json",
    "tokenize",
]


def load_source(source: str, include_path: str | Path | None = None) -> CircuitIR:
    """Full pipeline: tokenize, parse, resolve includes, elaborate."""
    return elaborate(resolve_includes(parse(source), include_path))


def load_file(path: str | Path, include_path: str | Path | None = None) -> tuple[str, CircuitIR]:
    source = Path(path).read_text(encoding="utf-8")
    return source, load_source(source, include_path)
