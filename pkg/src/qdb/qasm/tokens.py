"""OpenQASM 2.0 lexer.

Produces a dense token stream: every non-whitespace byte of the input
belongs to exactly one token, comments included (debug directives ride in
`//` comments, so they must survive lexing). Quoted include filenames are
emitted as a single `symbol` token whose lexeme keeps the quotes.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import LexError

KEYWORDS = frozenset(
    {
        "OPENQASM",
        "include",
        "qreg",
        "creg",
        "gate",
        "opaque",
        "measure",
        "reset",
        "barrier",
        "if",
        "pi",
        "U",
        "CX",
    }
)

# Multi-byte symbols first so "->" never lexes as "-", ">".
_SYMBOLS = ("->", "==", ";", ",", "(", ")", "[", "]", "{", "}", "+", "-", "*", "/", "^", ">")


@dataclass(frozen=True)
class Span:
    """Source location: 1-based line/column plus [start, end) byte offsets."""

    line: int
    column: int
    start: int
    end: int

    def cover(self, other: "Span") -> "Span":
        return Span(self.line, self.column, self.start, other.end)

    def to_json(self) -> dict:
        return {"line": self.line, "column": self.column, "start": self.start, "end": self.end}


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | identifier | integer | real | symbol | comment
    lexeme: str
    span: Span


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_"


def _is_ident_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


def tokenize(source: str) -> list[Token]:
    """Lex UTF-8 QASM text into tokens; raises LexError on illegal input."""
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(source)

    def span_from(start: int, start_line: int, start_col: int, end: int) -> Span:
        return Span(start_line, start_col, start, end)

    while pos < n:
        ch = source[pos]
        if ch == "\n":
            line += 1
            pos += 1
            line_start = pos
            continue
        if ch in " \t\r":
            pos += 1
            continue
        col = pos - line_start + 1
        start = pos

        if ch == "/" and source.startswith("//", pos):
            end = source.find("\n", pos)
            end = n if end == -1 else end
            tokens.append(Token("comment", source[start:end], span_from(start, line, col, end)))
            pos = end
            continue

        if ch == '"':
            end = source.find('"', pos + 1)
            if end == -1 or "\n" in source[pos:end]:
                raise LexError("unterminated string", span_from(start, line, col, pos + 1))
            tokens.append(Token("symbol", source[start : end + 1], span_from(start, line, col, end + 1)))
            pos = end + 1
            continue

        if ch.isdigit() or (ch == "." and pos + 1 < n and source[pos + 1].isdigit()):
            end = pos
            seen_dot = False
            seen_exp = False
            while end < n:
                c = source[end]
                if c.isdigit():
                    end += 1
                elif c == "." and not seen_dot and not seen_exp:
                    seen_dot = True
                    end += 1
                elif c in "eE" and not seen_exp and end > pos:
                    # exponent must be followed by digits (optionally signed)
                    look = end + 1
                    if look < n and source[look] in "+-":
                        look += 1
                    if look < n and source[look].isdigit():
                        seen_exp = True
                        end = look
                    else:
                        break
                else:
                    break
            lexeme = source[start:end]
            kind = "real" if (seen_dot or seen_exp) else "integer"
            tokens.append(Token(kind, lexeme, span_from(start, line, col, end)))
            pos = end
            continue

        if _is_ident_start(ch):
            end = pos
            while end < n and _is_ident_char(source[end]):
                end += 1
            lexeme = source[start:end]
            kind = "keyword" if lexeme in KEYWORDS else "identifier"
            tokens.append(Token(kind, lexeme, span_from(start, line, col, end)))
            pos = end
            continue

        for sym in _SYMBOLS:
            if source.startswith(sym, pos):
                end = pos + len(sym)
                tokens.append(Token("symbol", sym, span_from(start, line, col, end)))
                pos = end
                break
        else:
            raise LexError(f"illegal character {ch!r}", span_from(start, line, col, pos + 1))

    return tokens
