"""Elaboration: resolved AST -> flat CircuitIR.

Register-level gate calls are expanded element-wise (the broadcast rule),
custom gates are inlined recursively until only U and CX remain, parameter
expressions are evaluated to doubles, and `// @qdb ...` comments become
Directive records anchored to the next instruction-producing statement.
"""
from __future__ import annotations

import math
import re

from ..errors import SemanticError, UndeclaredGate
from . import ast
from .ir import CircuitIR, Directive, Instruction, SourceRef
from .tokens import Token

_DIRECTIVE_RE = re.compile(r"^//\s*@qdb\b\s*(.*)$")


def elaborate(program: ast.Program) -> CircuitIR:
    """Lower a resolved Program; raises SemanticError on bad references."""
    return _Elaborator(program).run()


class _GateTable:
    """Declared gates: the U/CX builtins plus user definitions in order."""

    def __init__(self):
        self.defs: dict[str, ast.GateDef] = {}

    def define(self, gd: ast.GateDef) -> None:
        if gd.name in ("U", "CX") or gd.name in self.defs:
            raise SemanticError(f"gate {gd.name!r} already defined", gd.span)
        if len(set(gd.params)) != len(gd.params) or len(set(gd.qargs)) != len(gd.qargs):
            raise SemanticError("duplicate parameter or qubit argument name", gd.span)
        for op in gd.body:
            if isinstance(op, ast.GateCall):
                self.check_call_shape(op)
                for arg in op.args:
                    if arg.register not in gd.qargs:
                        raise SemanticError(f"unknown qubit argument {arg.register!r}", arg.span)
        self.defs[gd.name] = gd

    def check_call_shape(self, call: ast.GateCall) -> None:
        if call.name == "U":
            want_params, want_qargs = 3, 1
        elif call.name == "CX":
            want_params, want_qargs = 0, 2
        else:
            gd = self.defs.get(call.name)
            if gd is None:
                raise UndeclaredGate(f"gate {call.name!r} is not declared", call.span)
            want_params, want_qargs = len(gd.params), len(gd.qargs)
        if len(call.params) != want_params:
            raise SemanticError(
                f"gate {call.name!r} takes {want_params} parameter(s), got {len(call.params)}",
                call.span,
            )
        if len(call.args) != want_qargs:
            raise SemanticError(
                f"gate {call.name!r} takes {want_qargs} qubit argument(s), got {len(call.args)}",
                call.span,
            )


class _Elaborator:
    def __init__(self, program: ast.Program):
        self.program = program
        self.qregs: dict[str, tuple[int, int]] = {}
        self.cregs: dict[str, tuple[int, int]] = {}
        self.gates = _GateTable()
        self.instructions: list[Instruction] = []
        self.source_map: list[SourceRef] = []
        # (statement start offset, first instruction index, emitted count)
        self.stmt_spans: list[tuple[int, int, int]] = []

    def run(self) -> CircuitIR:
        n_q = n_c = 0
        for stmt in self.program.statements:
            if isinstance(stmt, ast.IncludeStmt):
                raise SemanticError("includes must be resolved before elaboration", stmt.span)
            start = len(self.instructions)
            if isinstance(stmt, ast.QregDecl):
                self._declare(stmt, quantum=True)
            elif isinstance(stmt, ast.CregDecl):
                self._declare(stmt, quantum=False)
            elif isinstance(stmt, ast.GateDef):
                self.gates.define(stmt)
            else:
                self._emit_statement(stmt)
            self.stmt_spans.append((stmt.span.start, start, len(self.instructions) - start))
        n_q = sum(size for _, size in self.qregs.values())
        n_c = sum(size for _, size in self.cregs.values())
        ir = CircuitIR(n_q, n_c, self.qregs, self.cregs, self.instructions, {}, self.source_map)
        self._attach_directives(ir)
        return ir

    # --- declarations ---------------------------------------------------------

    def _declare(self, stmt, quantum: bool) -> None:
        if stmt.name in self.qregs or stmt.name in self.cregs:
            raise SemanticError(f"register {stmt.name!r} already declared", stmt.span)
        table = self.qregs if quantum else self.cregs
        offset = sum(size for _, size in table.values())
        table[stmt.name] = (offset, stmt.size)

    # --- operand resolution ------------------------------------------------------

    def _resolve(self, operand: ast.Operand, quantum: bool) -> list[int]:
        """Flat indices for an operand; whole registers expand in order."""
        table = self.qregs if quantum else self.cregs
        other = self.cregs if quantum else self.qregs
        if operand.register not in table:
            if operand.register in other:
                kind = "classical" if quantum else "quantum"
                raise SemanticError(
                    f"{operand.register!r} is a {kind} register, not allowed here", operand.span
                )
            raise SemanticError(f"register {operand.register!r} is not declared", operand.span)
        offset, size = table[operand.register]
        if operand.index is None:
            return list(range(offset, offset + size))
        if not (0 <= operand.index < size):
            raise SemanticError(
                f"index {operand.index} out of range for {operand.register}[{size}]", operand.span
            )
        return [offset + operand.index]

    # --- statement emission ----------------------------------------------------------

    def _emit_statement(self, stmt, condition=None) -> None:
        ref = SourceRef(stmt.span, ast.format_statement(stmt))
        if isinstance(stmt, ast.GateCall):
            for instr in self._expand_call(stmt, condition):
                self._push(instr, ref)
        elif isinstance(stmt, ast.MeasureStmt):
            qs = self._resolve(stmt.source, quantum=True)
            cs = self._resolve(stmt.target, quantum=False)
            if len(qs) != len(cs):
                raise SemanticError(
                    f"measure width mismatch: {len(qs)} qubit(s) -> {len(cs)} bit(s)", stmt.span
                )
            for q, c in zip(qs, cs):
                self._push(Instruction("measure", (q,), clbit=c, condition=condition), ref)
        elif isinstance(stmt, ast.ResetStmt):
            for q in self._resolve(stmt.target, quantum=True):
                self._push(Instruction("reset", (q,), condition=condition), ref)
        elif isinstance(stmt, ast.BarrierStmt):
            qubits: list[int] = []
            for arg in stmt.args:
                qubits.extend(self._resolve(arg, quantum=True))
            self._push(Instruction("barrier", tuple(qubits), condition=condition), ref)
        elif isinstance(stmt, ast.IfStmt):
            if stmt.creg not in self.cregs:
                raise SemanticError(f"classical register {stmt.creg!r} is not declared", stmt.span)
            size = self.cregs[stmt.creg][1]
            if not (0 <= stmt.value < (1 << size)):
                raise SemanticError(
                    f"comparison value {stmt.value} does not fit in {stmt.creg}[{size}]", stmt.span
                )
            if condition is not None:
                raise SemanticError("nested if() is not allowed", stmt.span)
            self._emit_statement(stmt.body, condition=(stmt.creg, stmt.value))
        else:  # pragma: no cover - parser only produces the kinds above
            raise SemanticError(f"unexpected statement {type(stmt).__name__}", stmt.span)

    def _push(self, instr: Instruction, ref: SourceRef) -> None:
        self.instructions.append(instr)
        self.source_map.append(ref)

    # --- gate call expansion ------------------------------------------------------------

    def _expand_call(self, call: ast.GateCall, condition) -> list[Instruction]:
        self.gates.check_call_shape(call)
        params = tuple(_eval_expr(p, {}) for p in call.params)
        operands = [self._resolve(arg, quantum=True) for arg in call.args]
        widths = {len(ops) for ops in operands}
        broadcast = max(widths)
        if widths - {1, broadcast}:
            raise SemanticError(
                f"mismatched register sizes in broadcast: {sorted(widths)}", call.span
            )
        out: list[Instruction] = []
        for i in range(broadcast):
            qubits = [ops[0] if len(ops) == 1 else ops[i] for ops in operands]
            if len(set(qubits)) != len(qubits):
                raise SemanticError("gate applied to the same qubit twice", call.span)
            out.extend(self._inline(call.name, params, qubits, call.span, condition, depth=0))
        return out

    def _inline(self, name, params, qubits, span, condition, depth) -> list[Instruction]:
        if depth > 64:
            raise SemanticError(f"gate {name!r} expansion too deep", span)
        if name == "U":
            return [Instruction("u", (qubits[0],), params=params, condition=condition)]
        if name == "CX":
            if qubits[0] == qubits[1]:
                raise SemanticError("CX control and target must differ", span)
            return [Instruction("cx", tuple(qubits), condition=condition)]
        gd = self.gates.defs[name]
        env = dict(zip(gd.params, params))
        binding = dict(zip(gd.qargs, qubits))
        out: list[Instruction] = []
        for op in gd.body:
            if isinstance(op, ast.BarrierStmt):
                continue  # scheduling hint only; no instruction emitted
            inner_params = tuple(_eval_expr(p, env) for p in op.params)
            inner_qubits = [binding[a.register] for a in op.args]
            if len(set(inner_qubits)) != len(inner_qubits):
                raise SemanticError(
                    f"gate {name!r} maps two arguments to the same qubit", span
                )
            out.extend(self._inline(op.name, inner_params, inner_qubits, span, condition, depth + 1))
        return out

    # --- directives -----------------------------------------------------------------------

    def _attach_directives(self, ir: CircuitIR) -> None:
        for comment in self.program.comments:
            m = _DIRECTIVE_RE.match(comment.lexeme)
            if not m:
                continue
            directive = self._parse_directive(m.group(1).strip(), comment)
            anchor = len(ir.instructions)
            for offset, first, count in self.stmt_spans:
                if offset > comment.span.start and count > 0:
                    anchor = first
                    break
            directive = Directive(
                kind=directive.kind,
                anchor=anchor,
                span=directive.span,
                qubits=directive.qubits,
                register=directive.register,
                expected_bits=directive.expected_bits,
                distribution=directive.distribution,
                tolerance=directive.tolerance,
                text=directive.text,
            )
            ir.directives.setdefault(anchor, []).append(directive)

    def _parse_directive(self, body: str, comment: Token) -> Directive:
        return parse_directive_text(body, self.qregs, self.cregs, comment.span)

    def _directive_qubits(self, text: str, span) -> list[int]:
        return _resolve_directive_operand(text, self.qregs, self.cregs, span)


def parse_directive_text(
    body: str,
    qregs: dict[str, tuple[int, int]],
    cregs: dict[str, tuple[int, int]],
    span=None,
) -> Directive:
    """Parse the text of a `@qdb` directive against declared registers."""
    body = body.strip()
    if not body:
        raise SemanticError("empty @qdb directive", span)
    parts = body.split(None, 1)
    kind, rest = parts[0], parts[1].strip() if len(parts) > 1 else ""

    def qubit_list(text: str) -> tuple[int, ...]:
        qubits: list[int] = []
        for piece in text.split(","):
            qubits.extend(_resolve_directive_operand(piece.strip(), qregs, cregs, span))
        return tuple(qubits)

    if kind == "break":
        if rest:
            raise SemanticError("break directive takes no arguments", span)
        return Directive("break", -1, span, text=body)
    if kind == "assert-classical":
        m = re.match(r"^(\S+)\s*->\s*([01]+)$", rest)
        if not m:
            raise SemanticError("expected: assert-classical <reg> -> <bits>", span)
        qubits = qubit_list(m.group(1))
        bits = m.group(2)
        if len(bits) != len(qubits):
            raise SemanticError(
                f"expected {len(qubits)} bits for {m.group(1)}, got {len(bits)}", span
            )
        return Directive(
            "assert-classical", -1, span, qubits=qubits, register=m.group(1),
            expected_bits=bits, text=body,
        )
    if kind == "assert-superposition":
        if not rest:
            raise SemanticError("expected: assert-superposition <reg>", span)
        return Directive(
            "assert-superposition", -1, span, qubits=qubit_list(rest), register=rest, text=body
        )
    if kind == "assert-separable":
        qubits = qubit_list(rest)
        if len(qubits) != 1:
            raise SemanticError("assert-separable takes a single qubit", span)
        return Directive("assert-separable", -1, span, qubits=qubits, register=rest, text=body)
    if kind == "assert-entangled":
        qubits = qubit_list(rest)
        if len(qubits) < 1:
            raise SemanticError("assert-entangled takes a qubit list", span)
        return Directive("assert-entangled", -1, span, qubits=qubits, register=rest, text=body)
    if kind == "assert-distribution":
        m = re.match(r"^(\S+)\s*\{(.*)\}\s*tol\s+([0-9.eE+-]+)$", rest)
        if not m:
            raise SemanticError(
                "expected: assert-distribution <creg> {<bits>:<p>, ...} tol <t>", span
            )
        creg = m.group(1)
        if creg not in cregs:
            raise SemanticError(f"classical register {creg!r} is not declared", span)
        size = cregs[creg][1]
        dist: dict[str, float] = {}
        for entry in m.group(2).split(","):
            entry = entry.strip()
            if not entry:
                continue
            key, _, value = entry.partition(":")
            key = key.strip()
            if not re.fullmatch(r"[01]+", key) or len(key) != size:
                raise SemanticError(f"bad outcome {key!r} for {creg}[{size}]", span)
            try:
                dist[key] = float(value)
            except ValueError:
                raise SemanticError(f"bad probability {value.strip()!r}", span) from None
        if not dist or abs(sum(dist.values()) - 1.0) > 1e-9:
            raise SemanticError("distribution probabilities must sum to 1", span)
        tolerance = float(m.group(3))
        return Directive(
            "assert-distribution", -1, span, register=creg,
            distribution=dist, tolerance=tolerance, text=body,
        )
    raise SemanticError(f"unknown directive kind {kind!r}", span)


def _resolve_directive_operand(
    text: str,
    qregs: dict[str, tuple[int, int]],
    cregs: dict[str, tuple[int, int]],
    span=None,
) -> list[int]:
    m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)(?:\[(\d+)\])?", text)
    if not m:
        raise SemanticError(f"bad qubit reference {text!r} in directive", span)
    name, idx = m.group(1), m.group(2)
    if name not in qregs:
        if name in cregs:
            raise SemanticError(f"{name!r} is a classical register, not allowed here", span)
        raise SemanticError(f"register {name!r} is not declared", span)
    offset, size = qregs[name]
    if idx is None:
        return list(range(offset, offset + size))
    index = int(idx)
    if not (0 <= index < size):
        raise SemanticError(f"index {index} out of range for {name}[{size}]", span)
    return [offset + index]


def _eval_expr(expr: ast.Expr, env: dict[str, float]) -> float:
    if isinstance(expr, ast.Num):
        return expr.value
    if isinstance(expr, ast.Pi):
        return math.pi
    if isinstance(expr, ast.Name):
        if expr.ident not in env:
            raise SemanticError(f"unknown parameter {expr.ident!r}", expr.span)
        return env[expr.ident]
    if isinstance(expr, ast.Unary):
        return -_eval_expr(expr.operand, env)
    if isinstance(expr, ast.BinOp):
        lhs = _eval_expr(expr.lhs, env)
        rhs = _eval_expr(expr.rhs, env)
        try:
            if expr.op == "+":
                return lhs + rhs
            if expr.op == "-":
                return lhs - rhs
            if expr.op == "*":
                return lhs * rhs
            if expr.op == "/":
                return lhs / rhs
            if expr.op == "^":
                return lhs ** rhs
        except (ZeroDivisionError, OverflowError) as exc:
            raise SemanticError(f"cannot evaluate expression: {exc}", expr.span) from None
    raise SemanticError("unsupported expression", getattr(expr, "span", None))
