"""AST node types for parsed OpenQASM 2.0 programs.

Nodes are frozen dataclasses carrying source spans. `canonical` strips spans
so structural equality (e.g. the pretty-print round-trip property) can be
checked independently of layout.
"""
from __future__ import annotations

from dataclasses import dataclass, fields, is_dataclass
from typing import Union

from .tokens import Span, Token


# --- parameter expressions ----------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float
    span: Span


@dataclass(frozen=True)
class Pi:
    span: Span


@dataclass(frozen=True)
class Name:
    ident: str
    span: Span


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"
    span: Span


@dataclass(frozen=True)
class BinOp:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    span: Span


Expr = Union[Num, Pi, Name, Unary, BinOp]


# --- operands and statements ----------------------------------------------------

@dataclass(frozen=True)
class Operand:
    """Register reference, whole (`q`) or indexed (`q[2]`)."""

    register: str
    index: int | None
    span: Span

    def __str__(self) -> str:
        return self.register if self.index is None else f"{self.register}[{self.index}]"


@dataclass(frozen=True)
class QregDecl:
    name: str
    size: int
    span: Span


@dataclass(frozen=True)
class CregDecl:
    name: str
    size: int
    span: Span


@dataclass(frozen=True)
class IncludeStmt:
    filename: str
    span: Span


@dataclass(frozen=True)
class GateCall:
    name: str
    params: tuple[Expr, ...]
    args: tuple[Operand, ...]
    span: Span


@dataclass(frozen=True)
class MeasureStmt:
    source: Operand
    target: Operand
    span: Span


@dataclass(frozen=True)
class ResetStmt:
    target: Operand
    span: Span


@dataclass(frozen=True)
class BarrierStmt:
    args: tuple[Operand, ...]
    span: Span


@dataclass(frozen=True)
class GateDef:
    name: str
    params: tuple[str, ...]
    qargs: tuple[str, ...]
    body: tuple[Union[GateCall, BarrierStmt], ...]
    span: Span


@dataclass(frozen=True)
class IfStmt:
    creg: str
    value: int
    body: Union[GateCall, MeasureStmt, ResetStmt]
    span: Span


Statement = Union[
    QregDecl, CregDecl, IncludeStmt, GateDef, GateCall, MeasureStmt, ResetStmt, BarrierStmt, IfStmt
]


@dataclass(frozen=True)
class Program:
    version: tuple[int, int]
    includes: tuple[str, ...]
    statements: tuple[Statement, ...]
    comments: tuple[Token, ...]


# --- structural form -------------------------------------------------------------

def canonical(node):
    """Nested-tuple form of a node with spans and comments removed."""
    if is_dataclass(node) and not isinstance(node, type):
        items = [type(node).__name__]
        for f in fields(node):
            if f.name in ("span", "comments"):
                continue
            items.append(canonical(getattr(node, f.name)))
        return tuple(items)
    if isinstance(node, tuple):
        return tuple(canonical(x) for x in node)
    return node


def to_json(node):
    """JSON-ready form of an AST node (documented schema: `type` + fields)."""
    if is_dataclass(node) and not isinstance(node, type):
        out = {"type": type(node).__name__}
        for f in fields(node):
            value = getattr(node, f.name)
            if f.name == "span":
                out["span"] = value.to_json()
            elif f.name == "comments":
                out["comments"] = [
                    {"lexeme": t.lexeme, "span": t.span.to_json()} for t in value
                ]
            else:
                out[f.name] = to_json(value)
        return out
    if isinstance(node, tuple):
        return [to_json(x) for x in node]
    return node


# --- pretty printer ---------------------------------------------------------------

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}


def format_expr(expr: Expr, parent_prec: int = 0) -> str:
    if isinstance(expr, Num):
        return repr(expr.value) if expr.value != int(expr.value) else str(int(expr.value))
    if isinstance(expr, Pi):
        return "pi"
    if isinstance(expr, Name):
        return expr.ident
    if isinstance(expr, Unary):
        return f"-{format_expr(expr.operand, 4)}"
    prec = _PRECEDENCE[expr.op]
    if expr.op == "^":  # right-associative
        text = f"{format_expr(expr.lhs, prec + 1)}^{format_expr(expr.rhs, prec)}"
    else:
        text = f"{format_expr(expr.lhs, prec)}{expr.op}{format_expr(expr.rhs, prec + 1)}"
    return f"({text})" if prec < parent_prec else text


def format_statement(stmt: Statement) -> str:
    if isinstance(stmt, QregDecl):
        return f"qreg {stmt.name}[{stmt.size}];"
    if isinstance(stmt, CregDecl):
        return f"creg {stmt.name}[{stmt.size}];"
    if isinstance(stmt, IncludeStmt):
        return f'include "{stmt.filename}";'
    if isinstance(stmt, GateCall):
        params = f"({','.join(format_expr(p) for p in stmt.params)})" if stmt.params else ""
        args = ",".join(str(a) for a in stmt.args)
        return f"{stmt.name}{params} {args};"
    if isinstance(stmt, MeasureStmt):
        return f"measure {stmt.source} -> {stmt.target};"
    if isinstance(stmt, ResetStmt):
        return f"reset {stmt.target};"
    if isinstance(stmt, BarrierStmt):
        return f"barrier {','.join(str(a) for a in stmt.args)};"
    if isinstance(stmt, IfStmt):
        return f"if({stmt.creg}=={stmt.value}) {format_statement(stmt.body)}"
    if isinstance(stmt, GateDef):
        params = f"({','.join(stmt.params)})" if stmt.params else ""
        body = " ".join(format_statement(op) for op in stmt.body)
        return f"gate {stmt.name}{params} {','.join(stmt.qargs)} {{ {body} }}"
    raise TypeError(f"unknown statement {stmt!r}")


def pretty_print(program: Program) -> str:
    """Render a Program back to QASM source (layout normalized)."""
    lines = [f"OPENQASM {program.version[0]}.{program.version[1]};"]
    lines.extend(format_statement(s) for s in program.statements)
    return "\n".join(lines) + "\n"
