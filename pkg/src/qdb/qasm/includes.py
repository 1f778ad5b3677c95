"""Include resolution.

"qelib1.inc" is embedded verbatim so builds are hermetic; other include
names are only searched when an include path is configured. Resolution
splices the included gate definitions into the statement list in place of
the include statement.
"""
from __future__ import annotations

from pathlib import Path

from ..errors import CyclicInclude, IncludeNotFound
from . import ast
from .parser import parse_include

QELIB1 = """\
// Standard OpenQASM 2.0 gate header.
gate u3(theta,phi,lambda) q { U(theta,phi,lambda) q; }
gate u2(phi,lambda) q { U(pi/2,phi,lambda) q; }
gate u1(lambda) q { U(0,0,lambda) q; }
gate cx c,t { CX c,t; }
gate id a { U(0,0,0) a; }
gate x a { u3(pi,0,pi) a; }
gate y a { u3(pi,pi/2,pi/2) a; }
gate z a { u1(pi) a; }
gate h a { u2(0,pi) a; }
gate s a { u1(pi/2) a; }
gate sdg a { u1(-pi/2) a; }
gate t a { u1(pi/4) a; }
gate tdg a { u1(-pi/4) a; }
gate rx(theta) a { u3(theta,-pi/2,pi/2) a; }
gate ry(theta) a { u3(theta,0,0) a; }
gate rz(phi) a { u1(phi) a; }
gate cz a,b { h b; cx a,b; h b; }
gate cy a,b { sdg b; cx a,b; s b; }
gate ch a,b { h b; sdg b; cx a,b; h b; t b; cx a,b; t b; h b; s b; x b; s a; }
gate ccx a,b,c { h c; cx b,c; tdg c; cx a,c; t c; cx b,c; tdg c; cx a,c; t b; t c; h c; cx a,b; t a; tdg b; cx a,b; }
gate crz(lambda) a,b { u1(lambda/2) b; cx a,b; u1(-lambda/2) b; cx a,b; }
gate cu1(lambda) a,b { u1(lambda/2) a; cx a,b; u1(-lambda/2) b; cx a,b; u1(lambda/2) b; }
gate cp(lambda) a,b { cu1(lambda) a,b; }
gate cu3(theta,phi,lambda) c,t { u1((lambda-phi)/2) t; cx c,t; u3(-theta/2,0,-(phi+lambda)/2) t; cx c,t; u3(theta/2,phi,0) t; }
gate swap a,b { cx a,b; cx b,a; cx a,b; }
"""

BUILTIN_INCLUDES = {"qelib1.inc": QELIB1}


def resolve_includes(program: ast.Program, include_path: str | Path | None = None) -> ast.Program:
    """Replace include statements with the gate definitions they provide."""
    statements = _splice(program.statements, include_path, stack=[])
    return ast.Program(program.version, program.includes, tuple(statements), program.comments)


def _splice(statements, include_path, stack: list[str]) -> list[ast.Statement]:
    out: list[ast.Statement] = []
    for stmt in statements:
        if not isinstance(stmt, ast.IncludeStmt):
            out.append(stmt)
            continue
        key, text = _load(stmt, include_path)
        if key in stack:
            raise CyclicInclude(f'include cycle through "{stmt.filename}"', stmt.span)
        stack.append(key)
        inner, _ = parse_include(text)
        out.extend(_splice(inner, include_path, stack))
        stack.pop()
    return out


def _load(stmt: ast.IncludeStmt, include_path) -> tuple[str, str]:
    name = stmt.filename
    if name in BUILTIN_INCLUDES:
        return f"<builtin:{name}>", BUILTIN_INCLUDES[name]
    if include_path is not None:
        candidate = Path(include_path) / name
        if candidate.is_file():
            return str(candidate.resolve()), candidate.read_text(encoding="utf-8")
    raise IncludeNotFound(f'include "{name}" not found', stmt.span)
