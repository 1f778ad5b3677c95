"""Elaboration: inlining, broadcast, directives, includes, semantic checks."""
from __future__ import annotations

import numpy as np
import pytest

import oracles
from conftest import ENTANGLED_SEPARABLE, QFT8
from qdb.errors import (
    CyclicInclude,
    IncludeNotFound,
    SemanticError,
    UndeclaredGate,
)
from qdb.qasm import elaborate, load_file, load_source, parse, resolve_includes
from qdb.qasm.ir import KINDS


HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'


def test_entangled_listing_shape():
    _, ir = load_file(ENTANGLED_SEPARABLE)
    assert (ir.n_qubits, ir.n_clbits) == (3, 2)
    assert [i.kind for i in ir.instructions[-2:]] == ["measure", "measure"]
    assert ir.instructions[-2].clbit == 0 and ir.instructions[-1].clbit == 1


def test_only_primitive_kinds_remain():
    for path in (ENTANGLED_SEPARABLE, QFT8):
        _, ir = load_file(path)
        assert all(i.kind in KINDS for i in ir.instructions)
        assert all(i.kind in ("u", "cx", "measure") for i in ir.instructions)


def test_swap_inlines_to_three_cx_with_correct_unitary():
    ir = load_source(HEADER + "qreg q[3];\nswap q[0],q[2];\n")
    assert [i.kind for i in ir.instructions] == ["cx", "cx", "cx"]
    from qdb.engine import circuit_unitary

    np.testing.assert_allclose(
        circuit_unitary(ir), oracles.swap_permutation(3, 0, 2), atol=1e-12
    )


def test_source_spans_point_into_file():
    source, ir = load_file(ENTANGLED_SEPARABLE)
    assert len(ir.source_map) == len(ir.instructions)
    for ref in ir.source_map:
        assert 0 <= ref.span.start < ref.span.end <= len(source)
        assert source[ref.span.start : ref.span.end].startswith(ref.text.split()[0])


def test_broadcast_whole_register():
    ir = load_source(HEADER + "qreg q[3];\nh q;\n")
    assert [i.qubits for i in ir.instructions] == [(0,), (1,), (2,)]


def test_broadcast_mixed_singleton():
    ir = load_source(HEADER + "qreg q[3];\nqreg a[1];\ncx a,q;\n")
    assert [i.qubits for i in ir.instructions] == [(3, 0), (3, 1), (3, 2)]


def test_broadcast_size_mismatch():
    with pytest.raises(SemanticError):
        load_source(HEADER + "qreg q[3];\nqreg r[2];\ncx q,r;\n")


def test_measure_register_to_register():
    ir = load_source(HEADER + "qreg q[2];\ncreg c[2];\nmeasure q -> c;\n")
    assert [(i.qubits[0], i.clbit) for i in ir.instructions] == [(0, 0), (1, 1)]


def test_measure_width_mismatch():
    with pytest.raises(SemanticError):
        load_source(HEADER + "qreg q[2];\ncreg c[1];\nmeasure q -> c;\n")


def test_undeclared_gate_without_include():
    with pytest.raises(UndeclaredGate):
        load_source("OPENQASM 2.0;\nqreg q[1];\nh q[0];\n")


def test_undeclared_register():
    with pytest.raises(SemanticError) as err:
        load_source(HEADER + "qreg q[1];\nh r[0];\n")
    assert "not declared" in str(err.value)


def test_classical_register_as_quantum_operand():
    with pytest.raises(SemanticError) as err:
        load_source(HEADER + "qreg q[1];\ncreg c[1];\nh c[0];\n")
    assert "classical" in str(err.value)


def test_index_out_of_range():
    with pytest.raises(SemanticError):
        load_source(HEADER + "qreg q[2];\nh q[2];\n")


def test_arity_mismatch():
    with pytest.raises(SemanticError):
        load_source(HEADER + "qreg q[2];\nh q[0],q[1];\n")


def test_conditional_value_range():
    with pytest.raises(SemanticError):
        load_source(HEADER + "qreg q[1];\ncreg c[2];\nif(c==4) x q[0];\n")


def test_conditional_attaches_to_all_expanded_primitives():
    ir = load_source(HEADER + "qreg q[2];\ncreg c[1];\nif(c==1) swap q[0],q[1];\n")
    assert len(ir.instructions) == 3
    assert all(i.condition == ("c", 1) for i in ir.instructions)


def test_duplicate_register_name():
    with pytest.raises(SemanticError):
        load_source(HEADER + "qreg q[1];\ncreg q[1];\n")


def test_gate_redefinition_rejected():
    with pytest.raises(SemanticError):
        load_source(HEADER + "gate h a { U(0,0,0) a; }\nqreg q[1];\n")


def test_same_qubit_twice_in_gate_call():
    with pytest.raises(SemanticError):
        load_source(HEADER + "qreg q[2];\ncx q[0],q[0];\n")


class TestIncludes:
    def test_qft_listing_resolves(self):
        _, ir = load_file(QFT8)
        assert len(ir.instructions) == 21  # 3 h + 3 cp(5 each) + swap(3)

    def test_missing_include(self):
        with pytest.raises(IncludeNotFound):
            load_source('OPENQASM 2.0;\ninclude "missing.inc";\nqreg q[1];\n')

    def test_include_from_path(self, tmp_path):
        (tmp_path / "mygates.inc").write_text("gate flip a { U(pi,0,pi) a; }\n")
        ir = load_source(
            'OPENQASM 2.0;\ninclude "mygates.inc";\nqreg q[1];\nflip q[0];\n',
            include_path=tmp_path,
        )
        assert [i.kind for i in ir.instructions] == ["u"]

    def test_cyclic_include(self, tmp_path):
        (tmp_path / "a.inc").write_text('include "b.inc";\n')
        (tmp_path / "b.inc").write_text('include "a.inc";\n')
        with pytest.raises(CyclicInclude):
            load_source('OPENQASM 2.0;\ninclude "a.inc";\n', include_path=tmp_path)

    def test_unresolved_include_blocks_elaboration(self):
        program = parse(HEADER + "qreg q[1];\n")
        with pytest.raises(SemanticError):
            elaborate(program)


class TestDirectives:
    def test_directive_anchors_to_next_instruction(self):
        ir = load_source(
            HEADER
            + "qreg q[3];\n"
            + "x q[2];\n"
            + "// @qdb assert-separable q[2]\n"
            + "h q[0];\n"
        )
        directives = ir.all_directives()
        assert len(directives) == 1
        assert directives[0].kind == "assert-separable"
        assert directives[0].anchor == 1
        assert directives[0].qubits == (2,)

    def test_trailing_directive_anchors_past_end(self):
        ir = load_source(HEADER + "qreg q[1];\nh q[0];\n// @qdb assert-superposition q\n")
        assert ir.all_directives()[0].anchor == 1 == len(ir.instructions)

    def test_directive_skips_non_emitting_statements(self):
        ir = load_source(HEADER + "// @qdb break\nqreg q[1];\nh q[0];\n")
        assert ir.all_directives()[0].anchor == 0

    def test_distribution_directive_fields(self):
        ir = load_source(
            HEADER
            + "qreg q[1];\ncreg c[1];\nh q[0];\nmeasure q[0] -> c[0];\n"
            + "// @qdb assert-distribution c {0:0.5, 1:0.5} tol 0.05\n"
        )
        d = ir.all_directives()[0]
        assert d.distribution == {"0": 0.5, "1": 0.5}
        assert d.tolerance == 0.05

    def test_classical_directive_bit_width_checked(self):
        with pytest.raises(SemanticError):
            load_source(HEADER + "qreg q[3];\n// @qdb assert-classical q -> 01\nh q[0];\n")

    def test_unknown_directive_kind(self):
        with pytest.raises(SemanticError):
            load_source(HEADER + "qreg q[1];\n// @qdb assert-magic q\nh q[0];\n")

    def test_undeclared_directive_register(self):
        with pytest.raises(SemanticError):
            load_source(HEADER + "qreg q[1];\n// @qdb assert-separable r[0]\nh q[0];\n")

    def test_plain_comments_ignored(self):
        ir = load_source(HEADER + "qreg q[1];\n// just a note\nh q[0];\n")
        assert ir.all_directives() == []


def test_ir_json_schema():
    _, ir = load_file(ENTANGLED_SEPARABLE)
    doc = ir.to_json()
    assert doc["n_qubits"] == 3 and doc["n_clbits"] == 2
    assert doc["qregs"]["q"] == {"offset": 0, "size": 3}
    first = doc["instructions"][0]
    assert first["kind"] == "u" and "span" in first and "source" in first
    measure = doc["instructions"][-1]
    assert measure["kind"] == "measure" and measure["clbit"] == 1


def test_ast_json_serializable():
    import json

    from qdb.qasm import to_json

    program = parse(HEADER + "qreg q[1];\nh q[0];\n")
    doc = to_json(program)
    assert doc["type"] == "Program"
    json.dumps(doc)  # must be JSON-ready
