"""Debugger tactics: inspection modes, separability, cloning, assertions."""
from __future__ import annotations

import math

import numpy as np
import pytest

import oracles
from conftest import ENTANGLED_SEPARABLE, QFT8, SUPERPOSITION_MEASURE
from qdb import gates
from qdb.debugger import (
    DEVICE,
    OMNISCIENT,
    UNIVERSAL_CLONER,
    DebugSession,
    check_superposition_known_input,
    describe_as_known_preparation,
    separability_report,
)
from qdb.engine import EngineConfig, step_execute
from qdb.errors import (
    BlankNotZero,
    MixedGlobalState,
    MixedSource,
    NonUnitaryPrefix,
    RegisterOverlap,
    UnknownInput,
    UnresolvableLocation,
)
from qdb.qasm import load_file, load_source
from qdb.state import (
    DensityMatrix,
    QuantumState,
    equal_up_to_global_phase,
    fidelity,
    partial_trace,
)

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'
SQ8 = 1 / math.sqrt(8)


def entangled_block_state() -> np.ndarray:
    amps = np.zeros(8, dtype=complex)
    amps[0b000], amps[0b001] = 0.5, -0.5
    amps[0b110], amps[0b111] = 0.5, -0.5
    return amps


def session_at_gate_end(path, **kwargs) -> DebugSession:
    """Session paused after all gates, before the first measurement."""
    _, ir = load_file(path)
    session = DebugSession(ir, **kwargs)
    first_measure = next(
        (i for i, ins in enumerate(ir.instructions) if ins.kind == "measure"),
        len(ir.instructions),
    )
    session.cursor.run_to(first_measure)
    return session


class TestBreakpoints:
    def test_break_at_cx_line(self, superposition_ir):
        session = DebugSession(superposition_ir, seed=0)
        index = session.set_breakpoint(line=11)
        assert superposition_ir.instructions[index].kind == "cx"
        info = session.continue_()
        assert info.reason == "breakpoint" and info.position == index
        # paused *before* the cx: uniform superposition with (-1)^{x1} signs
        amps = session.cursor.state.amplitudes
        for x in range(8):
            sign = -1 if (x >> 1) & 1 else 1
            assert abs(amps[x] - sign * SQ8) < 1e-12

    def test_break_at_comment_line_unresolvable(self):
        source = HEADER + "qreg q[1];\n// only a comment\nh q[0];\n"
        session = DebugSession.from_source(source)
        with pytest.raises(UnresolvableLocation):
            session.set_breakpoint(line=4)

    def test_break_directive_sets_breakpoint(self):
        source = HEADER + "qreg q[1];\nh q[0];\n// @qdb break\nh q[0];\n"
        session = DebugSession.from_source(source)
        assert session.breakpoints == {1}
        info = session.continue_()
        assert (info.reason, info.position) == ("breakpoint", 1)

    def test_continue_resumes_past_breakpoint(self, superposition_ir):
        session = DebugSession(superposition_ir, seed=0)
        session.set_breakpoint(index=2)
        assert session.continue_().reason == "breakpoint"
        assert session.continue_().reason == "end"


class TestInspect:
    def test_omniscient_snapshot_after_entangling_gates(self):
        session = session_at_gate_end(ENTANGLED_SEPARABLE, seed=0)
        payload = session.inspect_state()
        amps = np.array([complex(r, i) for r, i in payload["snapshot"]["amplitudes"]])
        np.testing.assert_allclose(amps, entangled_block_state(), atol=1e-9)

    def test_inspect_at_start_is_zero_state(self, qft8_ir):
        session = DebugSession(qft8_ir, seed=0)
        payload = session.inspect_state()
        amps = payload["snapshot"]["amplitudes"]
        assert amps[0] == [pytest.approx(1.0), pytest.approx(0.0)]

    def test_device_histogram_matches_born_probabilities(self):
        session = session_at_gate_end(ENTANGLED_SEPARABLE, seed=3, mode="device")
        payload = session.inspect_state()
        assert "snapshot" not in payload and "amplitudes" not in payload
        histogram = payload["histogram"]
        assert set(histogram) <= {"000", "001", "110", "111"}
        total = sum(histogram.values())
        assert total == session.shot_budget == payload["shots"]
        for key in ("000", "001", "110", "111"):
            assert abs(histogram.get(key, 0) / total - 0.25) <= 0.06

    def test_device_mode_never_reads_live_amplitudes(self):
        session = session_at_gate_end(ENTANGLED_SEPARABLE, seed=3, mode="device")
        session.inspect_state()
        session.qubit_probability(0)
        session.separability_report([2])
        assert session.cursor.state.amplitude_reads == 0

    def test_device_histogram_is_deterministic_per_seed(self):
        a = session_at_gate_end(ENTANGLED_SEPARABLE, seed=3, mode="device").inspect_state()
        b = session_at_gate_end(ENTANGLED_SEPARABLE, seed=3, mode="device").inspect_state()
        assert a["histogram"] == b["histogram"]

    def test_device_sampling_with_midcircuit_measurement(self):
        source = (
            HEADER
            + "qreg q[2];\ncreg c[1];\nh q[0];\nmeasure q[0] -> c[0];\nif(c==1) x q[1];\n"
        )
        session = DebugSession.from_source(source, seed=1, mode="device", shot_budget=80)
        session.cursor.run_to_end()
        histogram = session.inspect_state()["histogram"]
        assert set(histogram) <= {"00", "11"}
        assert session.cursor.state.amplitude_reads == 0


class TestSuperpositionCheck:
    def test_h3_on_111_has_hamming_sign_structure(self):
        ir = load_source(HEADER + "qreg q[3];\nh q;\n")
        report = check_superposition_known_input(ir, "111")
        assert report.superposed
        assert len(report.support) == 8
        assert all(abs(p - 0.125) < 1e-12 for _, p in report.support)
        regenerated = QuantumState.from_bits("111")
        for q in range(3):
            regenerated.apply_1q(gates.H, q)
        for x, amp in enumerate(regenerated.amplitudes):
            hamming = bin(x).count("1")
            assert abs(amp - (-1) ** hamming * SQ8) < 1e-12

    def test_x_q1_is_classical_010(self):
        ir = load_source(HEADER + "qreg q[3];\nx q[1];\n")
        report = check_superposition_known_input(ir, "000")
        assert not report.superposed
        assert report.support == [("010", pytest.approx(1.0))]

    def test_qft_of_zero_is_uniform(self, qft8_ir):
        report = check_superposition_known_input(qft8_ir, "000")
        assert report.superposed
        assert len(report.support) == 8
        np.testing.assert_allclose([p for _, p in report.support], np.full(8, 0.125), atol=1e-9)

    def test_unknown_input_refused(self, qft8_ir):
        with pytest.raises(UnknownInput):
            check_superposition_known_input(qft8_ir, None)

    def test_measurement_in_prefix_rejected(self, superposition_ir):
        with pytest.raises(NonUnitaryPrefix):
            check_superposition_known_input(superposition_ir, "000")

    def test_support_matches_naive_oracle_on_random_prefixes(self):
        from test_engine import random_circuit

        rng = np.random.default_rng(42)
        for trial in range(100):
            n = int(rng.integers(1, 6))
            ir = random_circuit(rng, n, int(rng.integers(1, 16)), measure=False)
            bits = format(int(rng.integers(1 << n)), f"0{n}b")
            report = check_superposition_known_input(ir, bits)
            total = sum(p for _, p in report.support)
            assert abs(total - 1.0) <= 1e-9
            amps = np.eye(1 << n, dtype=complex)[int(bits, 2)]
            for instr in ir.instructions:
                g = (
                    gates.CNOT
                    if instr.kind == "cx"
                    else gates.u_matrix(*instr.params)
                )
                amps = oracles.apply_gate_reference(amps, g, list(instr.qubits))
            probs = dict(report.support)
            for x in range(1 << n):
                want = abs(amps[x]) ** 2
                got = probs.get(format(x, f"0{n}b"), 0.0)
                assert abs(got - want) <= 1e-10


class TestSeparability:
    def test_entangled_listing_reductions(self):
        session = session_at_gate_end(ENTANGLED_SEPARABLE, seed=0)
        report = session.separability_report()
        assert report.entry(2).purity >= 1 - 1e-9 and not report.entry(2).entangled
        assert abs(report.entry(0).purity - 0.5) <= 1e-9 and report.entry(0).entangled
        assert abs(report.entry(1).purity - 0.5) <= 1e-9 and report.entry(1).entangled

    def test_product_state_all_separable(self):
        report = separability_report(QuantumState.from_bits("000"))
        assert all(not e.entangled for e in report.per_qubit)

    def test_ghz_all_entangled(self):
        amps = np.zeros(8, dtype=complex)
        amps[0] = amps[7] = 1 / math.sqrt(2)
        report = separability_report(QuantumState.from_amplitudes(amps))
        for entry in report.per_qubit:
            assert entry.entangled
            assert abs(entry.purity - 0.5) <= 1e-9
            want = oracles.partial_trace_reference(amps, [entry.qubit])
            assert abs(np.vdot(want, want).real - entry.purity) <= 1e-10

    def test_bipartitions_for_small_registers(self):
        session = session_at_gate_end(ENTANGLED_SEPARABLE, seed=0)
        report = session.separability_report(include_bipartitions=True)
        by_partition = {e.partition: e for e in report.bipartitions}
        assert set(by_partition) == {(0,), (0, 1), (0, 2)}
        assert by_partition[(0,)].entangled
        assert abs(by_partition[(0, 1)].purity - 1.0) <= 1e-9  # q0,q1 pure as a block
        assert not by_partition[(0, 1)].entangled
        assert by_partition[(0, 2)].entangled  # q1 traced out of the Bell pair

    def test_mixed_global_state_rejected(self):
        with pytest.raises(MixedGlobalState):
            separability_report(DensityMatrix(1, np.eye(2) / 2))

    def test_purity_bounds_per_qubit(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            state = QuantumState.from_amplitudes(oracles.random_state(3, rng))
            for entry in separability_report(state).per_qubit:
                assert 0.5 - 1e-9 <= entry.purity <= 1.0 + 1e-9

    def test_100_product_states_flagged_separable(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            qubits = [oracles.random_state(1, rng) for _ in range(3)]
            amps = np.kron(np.kron(qubits[0], qubits[1]), qubits[2])
            report = separability_report(QuantumState.from_amplitudes(amps))
            assert all(not e.entangled for e in report.per_qubit)

    def test_100_bell_pairs_with_local_unitaries_flagged_entangled(self):
        rng = np.random.default_rng(8)
        bell = np.zeros(4, dtype=complex)
        bell[0] = bell[3] = 1 / math.sqrt(2)
        for _ in range(100):
            state = QuantumState.from_amplitudes(np.kron(bell, oracles.random_state(1, rng)))
            for q in range(3):
                state.apply_1q(gates.u_matrix(*rng.uniform(-np.pi, np.pi, 3)), q)
            report = separability_report(state)
            assert report.entry(0).entangled and report.entry(1).entangled
            assert not report.entry(2).entangled

    def test_device_mode_estimates(self):
        session = session_at_gate_end(ENTANGLED_SEPARABLE, seed=12, mode="device")
        report = session.separability_report()
        assert report.mode == DEVICE
        assert not report.entry(2).entangled
        assert report.entry(0).entangled and report.entry(1).entangled
        assert session.cursor.state.amplitude_reads == 0


class TestDescribePreparation:
    def test_recovers_generator_of_entangled_listing(self):
        session = session_at_gate_end(ENTANGLED_SEPARABLE, seed=0)
        candidate = load_source(HEADER + "qreg q[3];\nh q[0];\ncx q[0],q[1];\nh q[2];\n")
        match = describe_as_known_preparation(
            session.cursor.state, [("bell-times-minus", candidate, "001")]
        )
        assert match is not None
        assert match.initial_bits == "001"
        assert match.operator_names == ("h q[0];", "cx q[0],q[1];", "h q[2];")

    def test_no_match_returns_none(self):
        candidate = load_source(HEADER + "qreg q[1];\nh q[0];\n")
        assert describe_as_known_preparation(QuantumState.zero(1), [("plus", candidate, "0")]) is None

    def test_first_listed_candidate_wins(self, qft8_ir):
        cursor = step_execute(qft8_ir, EngineConfig(seed=0))
        cursor.run_to_end()
        h3 = load_source(HEADER + "qreg q[3];\nh q;\n")
        match = describe_as_known_preparation(
            cursor.state, [("dft", qft8_ir, "000"), ("h-cubed", h3, "000")]
        )
        assert match.name == "dft"
        match2 = describe_as_known_preparation(
            cursor.state, [("h-cubed", h3, "000"), ("dft", qft8_ir, "000")]
        )
        assert match2.name == "h-cubed"


class TestExactClone:
    @pytest.mark.parametrize("j", ["00", "01", "10", "11"])
    def test_clones_every_family_member(self, j):
        session = DebugSession.from_source(HEADER + "qreg q[4];\n", seed=0)
        state = session.cursor.state
        for i, bit in enumerate(j):
            if bit == "1":
                state.apply_1q(gates.X, i)
            state.apply_1q(gates.H, i)
        session.exact_clone_orthogonal([0, 1], [2, 3])
        psi = QuantumState.from_amplitudes(oracles.hadamard_family_state(j))
        expected = psi.tensor(psi)
        assert equal_up_to_global_phase(session.cursor.state, expected, 1e-9)
        assert abs(fidelity(expected, DensityMatrix.from_pure(session.cursor.state)) - 1.0) <= 1e-9

    def test_single_qubit_instance(self):
        session = DebugSession.from_source(HEADER + "qreg q[2];\nh q[0];\n", seed=0)
        session.continue_()
        session.exact_clone_orthogonal([0], [1])
        plus = QuantumState.zero(1).apply_1q(gates.H, 0)
        assert equal_up_to_global_phase(session.cursor.state, plus.tensor(plus), 1e-9)

    def test_overlap_rejected(self):
        session = DebugSession.from_source(HEADER + "qreg q[4];\n", seed=0)
        with pytest.raises(RegisterOverlap):
            session.exact_clone_orthogonal([0, 1], [1, 2])

    def test_blank_not_zero_rejected(self):
        session = DebugSession.from_source(HEADER + "qreg q[2];\nx q[1];\n", seed=0)
        session.continue_()
        with pytest.raises(BlankNotZero):
            session.exact_clone_orthogonal([0], [1])

    def test_family_larger_than_two_qubits(self):
        for j in ("000", "101", "111"):
            session = DebugSession.from_source(HEADER + "qreg q[6];\n", seed=0)
            state = session.cursor.state
            for i, bit in enumerate(j):
                if bit == "1":
                    state.apply_1q(gates.X, i)
                state.apply_1q(gates.H, i)
            session.exact_clone_orthogonal([0, 1, 2], [3, 4, 5])
            psi = QuantumState.from_amplitudes(oracles.hadamard_family_state(j))
            assert equal_up_to_global_phase(session.cursor.state, psi.tensor(psi), 1e-9)


class TestUniversalClone:
    def test_cloner_matrix_is_unitary(self):
        d = UNIVERSAL_CLONER
        assert np.max(np.abs(d.conj().T @ d - np.eye(8))) <= 1e-12

    @pytest.mark.parametrize("prep", ["", "x q[0];\n", "h q[0];\n"])
    def test_named_inputs_reach_five_sixths(self, prep):
        session = DebugSession.from_source(HEADER + "qreg q[3];\n" + prep, seed=0)
        session.continue_()
        report = session.universal_clone(0, [1, 2])
        assert report.fidelities == (pytest.approx(5 / 6, abs=1e-9), pytest.approx(5 / 6, abs=1e-9))

    def test_100_random_inputs_input_independent(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            session = DebugSession.from_source(HEADER + "qreg q[3];\n", seed=0)
            session.cursor.state.apply_1q(
                gates.u_matrix(*rng.uniform(-np.pi, np.pi, 3)), 0
            )
            report = session.universal_clone(0, [1, 2])
            f_a, f_b = report.fidelities
            assert abs(f_a - 5 / 6) <= 1e-9
            assert abs(f_b - 5 / 6) <= 1e-9
            assert abs(f_a - f_b) <= 1e-9  # symmetric cloner

    def test_mixed_source_rejected(self):
        session = DebugSession.from_source(HEADER + "qreg q[4];\nh q[0];\ncx q[0],q[1];\n", seed=0)
        session.continue_()
        with pytest.raises(MixedSource):
            session.universal_clone(0, [2, 3])

    def test_reduced_copies_against_reference(self):
        rng = np.random.default_rng(6)
        v = oracles.random_state(1, rng)
        amps = np.kron(v, np.eye(4)[0])
        out = oracles.apply_gate_reference(amps, UNIVERSAL_CLONER, [0, 1, 2])
        rho_a = oracles.partial_trace_reference(out, [0])
        assert abs(np.vdot(v, rho_a @ v).real - 5 / 6) <= 1e-9


class TestAssertions:
    def test_assert_separable_at_end_of_gate_sequence(self):
        source = (
            HEADER
            + "qreg q[3];\ncreg c[2];\nx q[2];\nh q[0];\ncx q[0],q[1];\nh q[2];\n"
            + "// @qdb assert-separable q[2]\n"
            + "measure q[0] -> c[0];\nmeasure q[1] -> c[1];\n"
        )
        session = DebugSession.from_source(source, seed=0)
        results = session.run_all_assertions()
        assert [r.verdict for r in results] == ["pass"]

    def test_assert_classical_after_x(self):
        source = HEADER + "qreg q[3];\nx q[1];\n// @qdb assert-classical q -> 010\nbarrier q;\n"
        session = DebugSession.from_source(source, seed=0)
        results = session.run_all_assertions()
        assert results[0].verdict == "pass"
        assert results[0].evidence["dominant"] == "010"

    def test_assert_classical_fails_on_wrong_bits(self):
        source = HEADER + "qreg q[2];\nx q[1];\n// @qdb assert-classical q -> 10\nbarrier q;\n"
        session = DebugSession.from_source(source, seed=0)
        assert session.run_all_assertions()[0].verdict == "fail"

    def test_assert_distribution_on_entangled_pair(self):
        source = (
            HEADER
            + "qreg q[3];\ncreg c[2];\nx q[2];\nh q[0];\ncx q[0],q[1];\nh q[2];\n"
            + "measure q[0] -> c[0];\nmeasure q[1] -> c[1];\n"
            + "// @qdb assert-distribution c {00:0.5, 11:0.5} tol 0.05\n"
        )
        session = DebugSession.from_source(source, seed=21)
        results = session.run_all_assertions()
        result = results[0]
        assert result.verdict == "pass"
        assert result.shots_used == 1060  # Chernoff at eps=0.05, delta=0.01
        assert result.p_value is not None and result.p_value > 0.01

    def test_assert_distribution_budget_exhausted_is_inconclusive(self):
        source = (
            HEADER
            + "qreg q[1];\ncreg c[1];\nh q[0];\nmeasure q[0] -> c[0];\n"
            + "// @qdb assert-distribution c {0:0.5, 1:0.5} tol 0.05\n"
        )
        session = DebugSession.from_source(source, seed=0, shot_budget=100)
        results = session.run_all_assertions()
        assert results[0].verdict == "inconclusive"

    def test_assert_superposition_both_modes(self):
        source = HEADER + "qreg q[1];\nh q[0];\n// @qdb assert-superposition q\nbarrier q;\n"
        for mode in (OMNISCIENT, "device"):
            session = DebugSession.from_source(source, seed=4, mode=mode)
            results = session.run_all_assertions()
            assert results[0].verdict == "pass", mode

    def test_assert_superposition_fails_on_basis_state(self):
        source = HEADER + "qreg q[1];\nx q[0];\n// @qdb assert-superposition q\nbarrier q;\n"
        for mode in (OMNISCIENT, "device"):
            session = DebugSession.from_source(source, seed=4, mode=mode)
            assert session.run_all_assertions()[0].verdict == "fail", mode

    def test_assert_entangled_device_mode(self):
        source = (
            HEADER
            + "qreg q[2];\nh q[0];\ncx q[0],q[1];\n"
            + "// @qdb assert-entangled q[0],q[1]\nbarrier q;\n"
        )
        session = DebugSession.from_source(source, seed=1, mode="device")
        results = session.run_all_assertions()
        assert results[0].verdict == "pass"

    def test_assert_classical_device_mode(self):
        source = HEADER + "qreg q[2];\nx q[0];\n// @qdb assert-classical q -> 10\nbarrier q;\n"
        session = DebugSession.from_source(source, seed=2, mode="device", shot_budget=64)
        results = session.run_all_assertions()
        assert results[0].verdict == "pass"
        assert results[0].shots_used == 64

    def test_assertion_results_json_round_trip(self):
        import json

        source = HEADER + "qreg q[1];\nh q[0];\n// @qdb assert-superposition q\nbarrier q;\n"
        session = DebugSession.from_source(source, seed=0)
        payload = session.run_all_assertions()[0].to_json()
        text = json.dumps(payload, sort_keys=True)
        assert json.loads(text)["verdict"] == "pass"


class TestStepAndEventLog:
    def test_step_reports_trace_and_assertions(self):
        source = HEADER + "qreg q[1];\nx q[0];\n// @qdb assert-classical q -> 1\nbarrier q;\n"
        session = DebugSession.from_source(source, seed=0)
        event, results = session.step()
        assert event.kind == "u" and results[0].verdict == "pass"
        assert any(entry["event"] == "assertion" for entry in session.event_log)

    def test_continue_in_chunks_matches_single_call(self, superposition_ir):
        a = DebugSession(superposition_ir, seed=3)
        direct = a.continue_()
        b = DebugSession(superposition_ir, seed=3)
        chunked = None
        while chunked is None:
            chunked = b.continue_(max_steps=1)
        assert (direct.reason, direct.position) == (chunked.reason, chunked.position)
        assert a.cursor.classical_bits() == b.cursor.classical_bits()


class TestSessionTomography:
    def test_omniscient_defaults_to_exact(self):
        session = DebugSession.from_source(HEADER + "qreg q[1];\nh q[0];\n", seed=0)
        session.continue_()
        result = session.tomography([0])
        plus = QuantumState.zero(1).apply_1q(gates.H, 0)
        assert fidelity(plus, result.estimate) >= 1 - 1e-10

    def test_device_mode_uses_budget(self):
        session = DebugSession.from_source(
            HEADER + "qreg q[1];\nh q[0];\n", seed=0, mode="device", shot_budget=256
        )
        session.continue_()
        result = session.tomography([0])
        assert result.shots_per_setting == 256
