"""Recursive-descent parser for OpenQASM 2.0.

Accepts the statement forms exhibited by version-2.0 assembly: the version
header, includes, register declarations, gate definitions, gate calls with
parameter expressions (constants, pi, + - * / ^, unary minus), measure,
reset, barrier, and single-statement `if (creg == int)` conditionals.

Parse errors carry the offending token's span and the expected-token set.
"""
from __future__ import annotations

from ..errors import ParseError, UnsupportedVersion
from .tokens import Span, Token, tokenize
from . import ast


class _Cursor:
    """Token stream view that skips comments (kept separately)."""

    def __init__(self, tokens: list[Token]):
        self.items = [t for t in tokens if t.kind != "comment"]
        self.comments = tuple(t for t in tokens if t.kind == "comment")
        self.pos = 0

    def peek(self) -> Token | None:
        return self.items[self.pos] if self.pos < len(self.items) else None

    def at_symbol(self, lexeme: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "symbol" and tok.lexeme == lexeme

    def at_keyword(self, lexeme: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "keyword" and tok.lexeme == lexeme

    def advance(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self._eof_span())
        self.pos += 1
        return tok

    def expect(self, kind: str, lexeme: str | None = None, expected: str | None = None) -> Token:
        tok = self.peek()
        want = expected or (lexeme if lexeme is not None else f"<{kind}>")
        if tok is None:
            raise ParseError(f"unexpected end of input, expected {want}", self._eof_span())
        if tok.kind != kind or (lexeme is not None and tok.lexeme != lexeme):
            raise ParseError(f"expected {want}, found {tok.lexeme!r}", tok.span)
        self.pos += 1
        return tok

    def _eof_span(self) -> Span:
        if self.items:
            last = self.items[-1].span
            return Span(last.line, last.column, last.end, last.end)
        return Span(1, 1, 0, 0)


def parse(source: str) -> ast.Program:
    """Parse full program source (header required)."""
    cur = _Cursor(tokenize(source))
    version = _parse_header(cur)
    statements, includes = _parse_statements(cur, top_level=True)
    return ast.Program(version, tuple(includes), tuple(statements), cur.comments)


def parse_include(source: str) -> tuple[list[ast.Statement], list[str]]:
    """Parse an include file: gate definitions (and nested includes) only."""
    cur = _Cursor(tokenize(source))
    return _parse_statements(cur, top_level=False)


def _parse_header(cur: _Cursor) -> tuple[int, int]:
    kw = cur.expect("keyword", "OPENQASM", expected='"OPENQASM" header')
    tok = cur.peek()
    if tok is None or tok.kind not in ("real", "integer"):
        raise ParseError("expected version number after OPENQASM", tok.span if tok else kw.span)
    cur.advance()
    cur.expect("symbol", ";")
    parts = tok.lexeme.split(".")
    try:
        major = int(parts[0])
        minor = int(parts[1]) if len(parts) > 1 else 0
    except ValueError:
        raise UnsupportedVersion(f"malformed version {tok.lexeme!r}", tok.span) from None
    if (major, minor) != (2, 0):
        raise UnsupportedVersion(f"unsupported OpenQASM version {tok.lexeme}; only 2.0 is supported", tok.span)
    return (2, 0)


def _parse_statements(cur: _Cursor, top_level: bool) -> tuple[list[ast.Statement], list[str]]:
    statements: list[ast.Statement] = []
    includes: list[str] = []
    while cur.peek() is not None:
        stmt = _parse_statement(cur, top_level)
        if isinstance(stmt, ast.IncludeStmt):
            includes.append(stmt.filename)
        statements.append(stmt)
    return statements, includes


def _parse_statement(cur: _Cursor, top_level: bool) -> ast.Statement:
    tok = cur.peek()
    assert tok is not None
    if tok.kind == "keyword":
        if tok.lexeme == "include":
            return _parse_include_stmt(cur)
        if tok.lexeme == "gate":
            return _parse_gatedef(cur)
        if not top_level:
            raise ParseError(f"{tok.lexeme!r} not allowed in an include file", tok.span)
        if tok.lexeme in ("qreg", "creg"):
            return _parse_reg_decl(cur)
        if tok.lexeme == "measure":
            return _parse_measure(cur)
        if tok.lexeme == "reset":
            return _parse_reset(cur)
        if tok.lexeme == "barrier":
            return _parse_barrier(cur)
        if tok.lexeme == "if":
            return _parse_if(cur)
        if tok.lexeme in ("U", "CX"):
            return _parse_gate_call(cur)
        if tok.lexeme == "opaque":
            raise ParseError("opaque gates are not supported", tok.span)
        if tok.lexeme == "OPENQASM":
            raise ParseError("duplicate OPENQASM header", tok.span)
        raise ParseError(f"unexpected keyword {tok.lexeme!r}", tok.span)
    if tok.kind == "identifier":
        if not top_level:
            raise ParseError("only gate definitions may appear in an include file", tok.span)
        return _parse_gate_call(cur)
    raise ParseError(
        f"expected a statement, found {tok.lexeme!r}",
        tok.span,
    )


def _parse_include_stmt(cur: _Cursor) -> ast.IncludeStmt:
    kw = cur.expect("keyword", "include")
    tok = cur.peek()
    if tok is None or tok.kind != "symbol" or not tok.lexeme.startswith('"'):
        raise ParseError('expected quoted filename after "include"', tok.span if tok else kw.span)
    cur.advance()
    end = cur.expect("symbol", ";")
    return ast.IncludeStmt(tok.lexeme.strip('"'), kw.span.cover(end.span))


def _parse_reg_decl(cur: _Cursor) -> ast.Statement:
    kw = cur.advance()
    name = cur.expect("identifier")
    cur.expect("symbol", "[")
    size_tok = cur.expect("integer", expected="register size")
    cur.expect("symbol", "]")
    end = cur.expect("symbol", ";")
    size = int(size_tok.lexeme)
    if size < 1:
        raise ParseError("register size must be positive", size_tok.span)
    node = ast.QregDecl if kw.lexeme == "qreg" else ast.CregDecl
    return node(name.lexeme, size, kw.span.cover(end.span))


def _parse_operand(cur: _Cursor) -> ast.Operand:
    name = cur.expect("identifier", expected="register name")
    index = None
    end_span = name.span
    if cur.at_symbol("["):
        cur.advance()
        idx_tok = cur.expect("integer", expected="index")
        end = cur.expect("symbol", "]")
        index = int(idx_tok.lexeme)
        end_span = end.span
    return ast.Operand(name.lexeme, index, name.span.cover(end_span))


def _parse_operand_list(cur: _Cursor) -> list[ast.Operand]:
    args = [_parse_operand(cur)]
    while cur.at_symbol(","):
        cur.advance()
        args.append(_parse_operand(cur))
    return args


def _parse_gate_call(cur: _Cursor) -> ast.GateCall:
    name = cur.advance()
    params: tuple = ()
    if cur.at_symbol("("):
        cur.advance()
        exprs = []
        if not cur.at_symbol(")"):
            exprs.append(_parse_expr(cur))
            while cur.at_symbol(","):
                cur.advance()
                exprs.append(_parse_expr(cur))
        cur.expect("symbol", ")")
        params = tuple(exprs)
    args = _parse_operand_list(cur)
    end = cur.expect("symbol", ";")
    return ast.GateCall(name.lexeme, params, tuple(args), name.span.cover(end.span))


def _parse_measure(cur: _Cursor) -> ast.MeasureStmt:
    kw = cur.expect("keyword", "measure")
    src = _parse_operand(cur)
    cur.expect("symbol", "->")
    dst = _parse_operand(cur)
    end = cur.expect("symbol", ";")
    return ast.MeasureStmt(src, dst, kw.span.cover(end.span))


def _parse_reset(cur: _Cursor) -> ast.ResetStmt:
    kw = cur.expect("keyword", "reset")
    target = _parse_operand(cur)
    end = cur.expect("symbol", ";")
    return ast.ResetStmt(target, kw.span.cover(end.span))


def _parse_barrier(cur: _Cursor) -> ast.BarrierStmt:
    kw = cur.expect("keyword", "barrier")
    args = _parse_operand_list(cur)
    end = cur.expect("symbol", ";")
    return ast.BarrierStmt(tuple(args), kw.span.cover(end.span))


def _parse_if(cur: _Cursor) -> ast.IfStmt:
    kw = cur.expect("keyword", "if")
    cur.expect("symbol", "(")
    creg = cur.expect("identifier", expected="classical register name")
    cur.expect("symbol", "==")
    value_tok = cur.expect("integer", expected="comparison value")
    cur.expect("symbol", ")")
    body = _parse_statement(cur, top_level=True)
    if not isinstance(body, (ast.GateCall, ast.MeasureStmt, ast.ResetStmt)):
        raise ParseError("if() must guard a gate, measure, or reset statement", body.span)
    return ast.IfStmt(creg.lexeme, int(value_tok.lexeme), body, kw.span.cover(body.span))


def _parse_gatedef(cur: _Cursor) -> ast.GateDef:
    kw = cur.expect("keyword", "gate")
    name = cur.expect("identifier", expected="gate name")
    params: tuple[str, ...] = ()
    if cur.at_symbol("("):
        cur.advance()
        names = []
        if not cur.at_symbol(")"):
            names.append(cur.expect("identifier", expected="parameter name").lexeme)
            while cur.at_symbol(","):
                cur.advance()
                names.append(cur.expect("identifier", expected="parameter name").lexeme)
        cur.expect("symbol", ")")
        params = tuple(names)
    qargs = [cur.expect("identifier", expected="qubit argument").lexeme]
    while cur.at_symbol(","):
        cur.advance()
        qargs.append(cur.expect("identifier", expected="qubit argument").lexeme)
    cur.expect("symbol", "{")
    body: list = []
    while not cur.at_symbol("}"):
        tok = cur.peek()
        if tok is None:
            raise ParseError("unterminated gate body", kw.span)
        if tok.kind == "keyword" and tok.lexeme == "barrier":
            body.append(_parse_barrier(cur))
        elif tok.kind == "identifier" or (tok.kind == "keyword" and tok.lexeme in ("U", "CX")):
            body.append(_parse_gate_call(cur))
        else:
            raise ParseError(
                f"only gate calls and barriers may appear in a gate body, found {tok.lexeme!r}",
                tok.span,
            )
    end = cur.expect("symbol", "}")
    for op in body:
        for operand in getattr(op, "args", ()):
            if operand.index is not None:
                raise ParseError("gate bodies may not index registers", operand.span)
    return ast.GateDef(name.lexeme, params, tuple(qargs), tuple(body), kw.span.cover(end.span))


# --- parameter expressions ------------------------------------------------------

def _parse_expr(cur: _Cursor) -> ast.Expr:
    return _parse_additive(cur)


def _parse_additive(cur: _Cursor) -> ast.Expr:
    node = _parse_multiplicative(cur)
    while cur.at_symbol("+") or cur.at_symbol("-"):
        op = cur.advance().lexeme
        rhs = _parse_multiplicative(cur)
        node = ast.BinOp(op, node, rhs, node.span.cover(rhs.span))
    return node


def _parse_multiplicative(cur: _Cursor) -> ast.Expr:
    node = _parse_unary(cur)
    while cur.at_symbol("*") or cur.at_symbol("/"):
        op = cur.advance().lexeme
        rhs = _parse_unary(cur)
        node = ast.BinOp(op, node, rhs, node.span.cover(rhs.span))
    return node


def _parse_unary(cur: _Cursor) -> ast.Expr:
    if cur.at_symbol("-"):
        tok = cur.advance()
        operand = _parse_unary(cur)
        return ast.Unary("-", operand, tok.span.cover(operand.span))
    return _parse_power(cur)


def _parse_power(cur: _Cursor) -> ast.Expr:
    base = _parse_atom(cur)
    if cur.at_symbol("^"):
        cur.advance()
        exponent = _parse_unary(cur)  # right-associative
        return ast.BinOp("^", base, exponent, base.span.cover(exponent.span))
    return base


def _parse_atom(cur: _Cursor) -> ast.Expr:
    tok = cur.peek()
    if tok is None:
        raise ParseError("unexpected end of input in expression", cur._eof_span())
    if tok.kind in ("integer", "real"):
        cur.advance()
        return ast.Num(float(tok.lexeme), tok.span)
    if tok.kind == "keyword" and tok.lexeme == "pi":
        cur.advance()
        return ast.Pi(tok.span)
    if tok.kind == "identifier":
        cur.advance()
        return ast.Name(tok.lexeme, tok.span)
    if tok.kind == "symbol" and tok.lexeme == "(":
        cur.advance()
        inner = _parse_expr(cur)
        cur.expect("symbol", ")")
        return inner
    raise ParseError(f"expected expression, found {tok.lexeme!r}", tok.span)
