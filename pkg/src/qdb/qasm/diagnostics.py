"""Caret diagnostics for source-anchored errors."""
from __future__ import annotations

from ..errors import SourceError


def render(source: str, error: SourceError, filename: str = "<input>") -> str:
    """Compiler-style message with a source excerpt and caret."""
    message = str(error)
    span = error.span
    if span is None:
        return f"{filename}: error: {message}"
    lines = source.splitlines()
    header = f"{filename}:{span.line}:{span.column}: error: {message}"
    if not (1 <= span.line <= len(lines)):
        return header
    excerpt = lines[span.line - 1]
    width = max(1, min(span.end, span.start + len(excerpt)) - span.start)
    caret = " " * (span.column - 1) + "^" * width
    return f"{header}\n  {excerpt}\n  {caret}"
