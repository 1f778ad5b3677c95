"""Lexer: classification, spans, and coverage invariants."""
from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from qdb.errors import LexError
from qdb.qasm import tokenize


def kinds_and_lexemes(source):
    return [(t.kind, t.lexeme) for t in tokenize(source)]


def test_simple_gate_call():
    assert kinds_and_lexemes("h q[0];") == [
        ("identifier", "h"),
        ("identifier", "q"),
        ("symbol", "["),
        ("integer", "0"),
        ("symbol", "]"),
        ("symbol", ";"),
    ]


def test_cp_call_contains_pi_keyword():
    toks = kinds_and_lexemes("cp(pi/2) q[1],q[0];")
    assert ("keyword", "pi") in toks
    assert toks[0] == ("identifier", "cp")
    assert ("symbol", "/") in toks


def test_measure_has_arrow_symbol():
    toks = kinds_and_lexemes("measure q[2] -> c[0];")
    assert toks[0] == ("keyword", "measure")
    assert ("symbol", "->") in toks


def test_comment_retained():
    toks = tokenize("x q[0]; // @qdb break\nh q[0];")
    comments = [t for t in toks if t.kind == "comment"]
    assert len(comments) == 1
    assert comments[0].lexeme == "// @qdb break"


def test_numbers():
    assert kinds_and_lexemes("2.0")[0] == ("real", "2.0")
    assert kinds_and_lexemes("10")[0] == ("integer", "10")
    assert kinds_and_lexemes("1e3")[0] == ("real", "1e3")
    assert kinds_and_lexemes("1.5e-2")[0] == ("real", "1.5e-2")


def test_string_is_single_symbol_token():
    toks = tokenize('include "qelib1.inc";')
    assert (toks[1].kind, toks[1].lexeme) == ("symbol", '"qelib1.inc"')


def test_illegal_character_has_span():
    with pytest.raises(LexError) as err:
        tokenize("x q[0]; @")
    assert err.value.span.column == 9


def test_spans_monotonic_and_cover_all_nonspace():
    source = 'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[2];\n// note\ncx q[0],q[1];\n'
    toks = tokenize(source)
    last_end = 0
    covered = set()
    for t in toks:
        assert t.span.start >= last_end
        assert t.span.end > t.span.start
        last_end = t.span.end
        covered.update(range(t.span.start, t.span.end))
        assert source[t.span.start : t.span.end] == t.lexeme
    for i, ch in enumerate(source):
        if not ch.isspace():
            assert i in covered, f"byte {i} ({ch!r}) not covered"


def test_line_and_column_are_one_based():
    toks = tokenize("x q[0];\n  h q[1];")
    h = [t for t in toks if t.lexeme == "h"][0]
    assert (h.span.line, h.span.column) == (2, 3)


@given(st.text(alphabet="hqc[]();,->=0123456789. \n\tuxabif", max_size=80))
def test_lexer_never_hangs_or_overlaps(source):
    try:
        toks = tokenize(source)
    except LexError:
        return
    last = 0
    for t in toks:
        assert t.span.start >= last
        last = t.span.end
