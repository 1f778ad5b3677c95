"""Execution engines: semantics, determinism, cross-engine equivalence."""
from __future__ import annotations

import json
import math

import numpy as np
import pytest

import oracles
from qdb import gates
from qdb.engine import (
    DENSE,
    NAIVE,
    EngineConfig,
    circuit_unitary,
    cx_full,
    embed_1q,
    execute,
    instruction_unitary,
    step_execute,
)
from qdb.errors import (
    CapacityExceeded,
    CursorExhausted,
    KernelCorruption,
    NonUnitaryProgram,
)
from qdb.qasm import load_source
from qdb.qasm.ir import CircuitIR, Instruction
from qdb.state import QuantumState, equal_up_to_global_phase

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'


def random_circuit(rng: np.random.Generator, n_qubits: int, n_gates: int, measure: bool) -> CircuitIR:
    """Random u/cx circuit; optionally measures every qubit at the end."""
    instructions = []
    for _ in range(n_gates):
        if n_qubits >= 2 and rng.random() < 0.35:
            c, t = rng.choice(n_qubits, size=2, replace=False)
            instructions.append(Instruction("cx", (int(c), int(t))))
        else:
            q = int(rng.integers(n_qubits))
            theta, phi, lam = rng.uniform(-math.pi, math.pi, 3)
            instructions.append(Instruction("u", (q,), params=(theta, phi, lam)))
    n_clbits = n_qubits if measure else 0
    if measure:
        instructions.extend(
            Instruction("measure", (q,), clbit=q) for q in range(n_qubits)
        )
    from qdb.qasm.ir import SourceRef
    from qdb.qasm.tokens import Span

    refs = [SourceRef(Span(1, 1, 0, 1), i.kind) for i in instructions]
    return CircuitIR(
        n_qubits,
        n_clbits,
        {"q": (0, n_qubits)},
        {"c": (0, n_clbits)} if measure else {},
        instructions,
        {},
        refs,
    )


class TestExecute:
    def test_superposition_counts_near_half(self, superposition_ir):
        result = execute(superposition_ir, EngineConfig(seed=42), shots=10_000)
        assert set(result.counts) <= {"0", "1"}
        assert 0.48 <= result.counts.get("0", 0) / 10_000 <= 0.52

    def test_entangled_listing_only_00_and_11(self, entangled_ir):
        for seed in (0, 1, 2):
            result = execute(entangled_ir, EngineConfig(seed=seed), shots=600)
            assert set(result.counts) <= {"00", "11"}

    def test_empty_circuit_counts(self):
        ir = load_source(HEADER + "qreg q[2];\ncreg c[2];\nmeasure q -> c;\n")
        result = execute(ir, EngineConfig(seed=9), shots=77)
        assert result.counts == {"00": 77}

    def test_determinism_byte_identical_json(self, superposition_ir):
        a = execute(superposition_ir, EngineConfig(seed=5), shots=500)
        b = execute(superposition_ir, EngineConfig(seed=5), shots=500)
        assert json.dumps(a.to_json(), sort_keys=True) == json.dumps(b.to_json(), sort_keys=True)

    def test_final_state_only_single_shot(self, entangled_ir):
        single = execute(entangled_ir, EngineConfig(seed=1, record_statevector=True), shots=1)
        multi = execute(entangled_ir, EngineConfig(seed=1, record_statevector=True), shots=4)
        assert single.final_state is not None
        assert multi.final_state is None
        amps = [complex(r, i) for r, i in single.final_state["amplitudes"]]
        nonzero = [a for a in amps if abs(a) > 1e-12]
        assert len(nonzero) == 2  # post-measurement collapse of Eq-style state

    def test_per_shot_records(self, entangled_ir):
        result = execute(entangled_ir, EngineConfig(seed=2), shots=20, record_per_shot=True)
        assert len(result.per_shot) == 20
        assert all(bits in ("00", "11") for bits in result.per_shot)
        assert sum(result.counts.values()) == 20

    def test_midcircuit_measthan_conditional(self):
        # measure then conditionally flip the second qubit: outcomes match
        ir = load_source(
            HEADER
            + "qreg q[2];\ncreg c[2];\nh q[0];\nmeasure q[0] -> c[0];\n"
            + "if(c==1) x q[1];\nmeasure q[1] -> c[1];\n"
        )
        result = execute(ir, EngineConfig(seed=6), shots=400)
        assert set(result.counts) <= {"00", "11"}
        assert 100 < result.counts["11"] < 300

    def test_reset_returns_to_zero(self):
        ir = load_source(HEADER + "qreg q[1];\ncreg c[1];\nh q[0];\nreset q[0];\nmeasure q[0] -> c[0];\n")
        result = execute(ir, EngineConfig(seed=3), shots=200)
        assert result.counts == {"0": 200}

    def test_trace_stream(self, superposition_ir):
        events = []
        execute(superposition_ir, EngineConfig(seed=0), shots=1, trace=events.append)
        assert [e.kind for e in events] == ["u", "u", "u", "u", "cx", "measure"]
        assert [e.index for e in events] == list(range(6))
        assert all(abs(e.norm - 1.0) < 1e-9 for e in events)

    def test_capacity_exceeded(self):
        ir = load_source(HEADER + "qreg q[12];\nh q[0];\n")
        with pytest.raises(CapacityExceeded):
            execute(ir, EngineConfig(method=NAIVE, seed=0), shots=1)

    def test_kernel_corruption_detected(self, superposition_ir, monkeypatch):
        bad = np.array([[1.1, 0.0], [0.0, 1.0]], dtype=np.complex128)
        monkeypatch.setattr("qdb.engine.gates.u_matrix", lambda *a: bad)
        with pytest.raises(KernelCorruption):
            execute(superposition_ir, EngineConfig(seed=0), shots=1)


class TestShotStatistics:
    def test_bernoulli_half_within_4_sigma_for_100_seeds(self):
        ir = load_source(HEADER + "qreg q[1];\ncreg c[1];\nh q[0];\nmeasure q[0] -> c[0];\n")
        sigma = math.sqrt(10_000 * 0.25)
        for seed in range(100):
            counts = execute(ir, EngineConfig(seed=seed), shots=10_000).counts
            assert abs(counts.get("0", 0) - 5000) <= 4 * sigma, f"seed {seed}"

    def test_different_seeds_differ(self, superposition_ir):
        a = execute(superposition_ir, EngineConfig(seed=1), shots=500).counts
        b = execute(superposition_ir, EngineConfig(seed=2), shots=500).counts
        assert a != b


class TestEngineEquivalence:
    @pytest.mark.parametrize("fixture", ["superposition_ir", "qft8_ir", "entangled_ir", "clone_ir"])
    def test_reference_circuits_agree(self, fixture, request):
        ir = request.getfixturevalue(fixture)
        seed = 11
        dense = execute(ir, EngineConfig(method=DENSE, seed=seed), shots=300)
        naive = execute(ir, EngineConfig(method=NAIVE, seed=seed), shots=300)
        assert dense.counts == naive.counts
        if not ir.has_measurement():
            a = step_execute(ir, EngineConfig(method=DENSE, seed=seed))
            b = step_execute(ir, EngineConfig(method=NAIVE, seed=seed))
            a.run_to_end()
            b.run_to_end()
            assert equal_up_to_global_phase(a.state, b.state, 1e-9)

    def test_200_random_circuits_agree(self):
        rng = np.random.default_rng(2024)
        for trial in range(200):
            n = int(rng.integers(1, 7))
            ir = random_circuit(rng, n, int(rng.integers(1, 31)), measure=False)
            a = step_execute(ir, EngineConfig(method=DENSE, seed=trial))
            b = step_execute(ir, EngineConfig(method=NAIVE, seed=trial, max_qubits=10))
            a.run_to_end()
            b.run_to_end()
            assert equal_up_to_global_phase(a.state, b.state, 1e-9), f"trial {trial}"

    def test_random_circuits_with_measurement_identical_counts(self):
        rng = np.random.default_rng(77)
        for trial in range(40):
            n = int(rng.integers(1, 6))
            ir = random_circuit(rng, n, int(rng.integers(1, 20)), measure=True)
            a = execute(ir, EngineConfig(method=DENSE, seed=trial), shots=64)
            b = execute(ir, EngineConfig(method=NAIVE, seed=trial), shots=64)
            assert a.counts == b.counts, f"trial {trial}"


class TestCursor:
    def test_cursor_starts_at_zero_state(self, entangled_ir):
        cursor = step_execute(entangled_ir, EngineConfig(seed=0))
        assert cursor.position == 0
        np.testing.assert_allclose(cursor.state.amplitudes, np.eye(8)[0], atol=1e-15)

    def test_prefix_state_after_three_instructions(self, entangled_ir):
        # after x, h, cx: (|001> + |111>)/sqrt(2), i.e. Bell pair with q2 = |1>
        cursor = step_execute(entangled_ir, EngineConfig(seed=0))
        cursor.run_to(3)
        expected = np.zeros(8, dtype=complex)
        expected[0b001] = expected[0b111] = 1 / math.sqrt(2)
        np.testing.assert_allclose(cursor.state.amplitudes, expected, atol=1e-12)

    def test_run_to_end_qft_matches_dft_oracle(self, qft8_ir):
        cursor = step_execute(qft8_ir, EngineConfig(seed=0))
        cursor.run_to_end()
        want = oracles.dft_matrix(8)[:, 0]
        got = cursor.state.amplitudes
        phase = got[np.argmax(np.abs(want))] / want[np.argmax(np.abs(want))]
        np.testing.assert_allclose(got, phase * want, atol=1e-9)

    def test_trace_events_strictly_increasing(self, superposition_ir):
        cursor = step_execute(superposition_ir, EngineConfig(seed=0))
        cursor.run_to_end()
        indices = [e.index for e in cursor.events]
        assert indices == sorted(indices) == list(range(len(superposition_ir.instructions)))

    def test_advance_past_end_raises(self, qft8_ir):
        cursor = step_execute(qft8_ir, EngineConfig(seed=0))
        cursor.run_to_end()
        with pytest.raises(CursorExhausted):
            cursor.advance()

    def test_classical_bits_update(self, entangled_ir):
        cursor = step_execute(entangled_ir, EngineConfig(seed=1))
        cursor.run_to_end()
        assert cursor.classical_bits() in ("00", "11")
        assert cursor.creg_value("c") in (0, 3)


class TestCircuitUnitary:
    def test_single_x_is_not_matrix(self):
        ir = load_source(HEADER + "qreg q[1];\nx q[0];\n")
        np.testing.assert_allclose(circuit_unitary(ir), [[0, 1], [1, 0]], atol=1e-12)

    def test_qft_listing_is_dft8(self, qft8_ir):
        got = circuit_unitary(qft8_ir)
        want = oracles.dft_matrix(8)
        phase = got[0, 0] / want[0, 0]
        assert abs(abs(phase) - 1.0) < 1e-12
        np.testing.assert_allclose(got, phase * want, atol=1e-9)

    def test_cloning_circuit_copies_family_members(self, clone_ir):
        u = circuit_unitary(clone_ir)
        for j in ("00", "01", "10", "11"):
            psi = oracles.hadamard_family_state(j)
            input_state = np.kron(psi, np.eye(4)[0])
            expected = np.kron(psi, psi)
            np.testing.assert_allclose(u @ input_state, expected, atol=1e-9)

    def test_measurement_rejected(self, entangled_ir):
        with pytest.raises(NonUnitaryProgram):
            circuit_unitary(entangled_ir)

    def test_conditional_rejected(self):
        ir = load_source(HEADER + "qreg q[1];\ncreg c[1];\nif(c==0) x q[0];\n")
        with pytest.raises(NonUnitaryProgram):
            circuit_unitary(ir)

    def test_capacity(self):
        ir = load_source(HEADER + "qreg q[11];\nh q[0];\n")
        with pytest.raises(CapacityExceeded):
            circuit_unitary(ir)

    def test_matrix_builders_against_reference(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            n = int(rng.integers(1, 5))
            q = int(rng.integers(n))
            g = gates.u_matrix(*rng.uniform(-np.pi, np.pi, 3))
            np.testing.assert_allclose(
                embed_1q(g, q, n), oracles.full_unitary_reference(g, [q], n), atol=1e-12
            )
        for _ in range(10):
            n = int(rng.integers(2, 5))
            c, t = rng.choice(n, size=2, replace=False)
            np.testing.assert_allclose(
                cx_full(int(c), int(t), n),
                oracles.full_unitary_reference(gates.CNOT, [int(c), int(t)], n),
                atol=1e-12,
            )

    def test_barrier_is_identity(self):
        np.testing.assert_allclose(
            instruction_unitary(Instruction("barrier", (0, 1)), 2), np.eye(4), atol=0
        )
