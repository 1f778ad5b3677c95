"""Interactive and scriptable debugging tactics.

A DebugSession drives an ExecutionCursor in one of two inspection modes:

* omniscient - state amplitudes may be read directly (legal only because the
  program runs in a simulator);
* device-faithful - no amplitude of the live state is ever read. Evidence
  comes from re-executing the program prefix with fresh measurements, the
  only information channel a physical device offers. Statistical queries
  derive their own RNG substreams so replays are deterministic.

Also exposes the non-session analyses: superposition checking for known
inputs, separability reporting, preparation matching, the orthogonal-family
exact cloner, the universal approximate cloner, and state tomography.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import gates
from .engine import DENSE, EngineConfig, ExecutionCursor, TraceEvent, execute, step_execute
from .errors import (
    BlankNotZero,
    DimensionMismatch,
    MixedGlobalState,
    MixedSource,
    NonUnitaryPrefix,
    NonUnitaryPreparation,
    RegisterOverlap,
    TooManyQubits,
    UnknownInput,
    UnresolvableLocation,
)
from .harness import chernoff_shots, compare_distributions
from .qasm.ir import CircuitIR, Directive
from .rng import CounterRng, derive_key
from .state import (
    DensityMatrix,
    QuantumState,
    equal_up_to_global_phase,
    fidelity,
    index_to_bits,
    partial_trace,
)

OMNISCIENT = "omniscient"
DEVICE = "device-faithful"
_MODE_ALIASES = {"omniscient": OMNISCIENT, "device": DEVICE, "device-faithful": DEVICE}

SUPERPOSITION_TOL = 1e-10
ENTANGLED_PURITY_TOL = 1e-6
CLASSICAL_PROB_TOL = 1e-9
# Single-qubit purity lies in [0.5, 1]; sampled estimates are accepted as
# "separable" above the midpoint between the two ideals.
DEVICE_PURITY_THRESHOLD = 0.75
# Default statistical budget: Chernoff sizing at epsilon=0.05, delta=0.01.
DEFAULT_SHOT_BUDGET = chernoff_shots(0.05, 0.01).shots

_PAULI_LABELS = ("I", "X", "Y", "Z")


# --- reports ---------------------------------------------------------------------

@dataclass(frozen=True)
class QubitSeparability:
    qubit: int
    purity: float
    entangled: bool

    def to_json(self) -> dict:
        return {"qubit": self.qubit, "purity": self.purity, "entangled": self.entangled}


@dataclass(frozen=True)
class BipartitionSeparability:
    partition: tuple[int, ...]
    purity: float
    entangled: bool

    def to_json(self) -> dict:
        return {"partition": list(self.partition), "purity": self.purity, "entangled": self.entangled}


@dataclass
class SeparabilityReport:
    per_qubit: list[QubitSeparability]
    bipartitions: list[BipartitionSeparability] | None = None
    mode: str = OMNISCIENT
    shots_per_setting: int | None = None

    def entry(self, qubit: int) -> QubitSeparability:
        for item in self.per_qubit:
            if item.qubit == qubit:
                return item
        raise KeyError(qubit)

    def to_json(self) -> dict:
        out: dict = {
            "mode": self.mode,
            "per_qubit": [e.to_json() for e in self.per_qubit],
        }
        if self.bipartitions is not None:
            out["bipartitions"] = [e.to_json() for e in self.bipartitions]
        if self.shots_per_setting is not None:
            out["shots_per_setting"] = self.shots_per_setting
        return out


@dataclass
class SuperpositionReport:
    superposed: bool
    support: list[tuple[str, float]]

    def to_json(self) -> dict:
        return {
            "superposed": self.superposed,
            "support": [{"basis": b, "probability": p} for b, p in self.support],
        }


@dataclass(frozen=True)
class PreparationMatch:
    name: str
    initial_bits: str
    operator_names: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "initial_bits": self.initial_bits,
            "operator_names": list(self.operator_names),
        }


@dataclass
class CloneReport:
    copy_qubits: tuple[int, int]
    fidelities: tuple[float, float] | None

    def to_json(self) -> dict:
        return {
            "copy_qubits": list(self.copy_qubits),
            "fidelities": list(self.fidelities) if self.fidelities else None,
        }


@dataclass
class AssertionResult:
    directive: Directive
    verdict: str  # pass | fail | inconclusive
    evidence: dict
    shots_used: int | None = None
    p_value: float | None = None

    def to_json(self) -> dict:
        return {
            "directive": self.directive.to_json(),
            "verdict": self.verdict,
            "evidence": self.evidence,
            "shots_used": self.shots_used,
            "p_value": self.p_value,
        }


@dataclass
class TomographyResult:
    estimate: DensityMatrix
    shots_per_setting: int | None
    settings: list[str]
    fidelity_vs_reference: float | None = None

    def to_json(self) -> dict:
        return {
            "estimate": self.estimate.to_json(),
            "shots_per_setting": self.shots_per_setting,
            "settings": self.settings,
            "fidelity_vs_reference": self.fidelity_vs_reference,
        }


@dataclass
class StopInfo:
    reason: str  # breakpoint | end
    position: int
    assertions: list[AssertionResult] = field(default_factory=list)


# --- free-standing analyses ----------------------------------------------------------


def run_unitary_prefix(ir: CircuitIR, initial: QuantumState) -> QuantumState:
    """Apply a measurement-free instruction list to a copy of `initial`."""
    state = initial.copy()
    for instr in ir.instructions:
        if instr.kind in ("measure", "reset"):
            raise NonUnitaryPrefix("prefix contains measurement")
        if instr.condition is not None:
            # No measurement can precede, so every creg is still zero.
            if instr.condition[1] != 0:
                continue
        if instr.kind == "u":
            state.apply_1q(gates.u_matrix(*instr.params), instr.qubits[0])
        elif instr.kind == "cx":
            state.apply_cx(instr.qubits[0], instr.qubits[1])
    return state


def check_superposition_known_input(ir: CircuitIR, initial_bits: str | None) -> SuperpositionReport:
    """Regenerate U|psi_0> for a known basis input and inspect its support.

    `initial_bits is None` means the input state is unknown; deciding
    superposition is unsupported in that case and raises UnknownInput.
    """
    if initial_bits is None:
        raise UnknownInput(
            "cannot decide superposition for an unknown input state; "
            "supply the initial basis state"
        )
    state = run_unitary_prefix(ir, QuantumState.from_bits(initial_bits))
    probs = state.basis_probabilities()
    order = np.argsort(-probs, kind="stable")
    support = [
        (index_to_bits(int(i), state.n_qubits), float(probs[i]))
        for i in order
        if probs[i] > SUPERPOSITION_TOL
    ]
    superposed = bool(probs.max() < 1.0 - SUPERPOSITION_TOL)
    return SuperpositionReport(superposed, support)


def _pure_state_report(
    state: QuantumState | DensityMatrix,
    qubits: Sequence[int] | None = None,
    include_bipartitions: bool = False,
) -> SeparabilityReport:
    n = state.n_qubits
    if isinstance(state, DensityMatrix):
        if state.purity() < 1.0 - ENTANGLED_PURITY_TOL:
            raise MixedGlobalState(
                "separability criterion requires a pure global state "
                f"(purity {state.purity():.6f})"
            )
    targets = list(qubits) if qubits is not None else list(range(n))
    per_qubit = []
    for q in targets:
        p = partial_trace(state, [q]).purity()
        per_qubit.append(QubitSeparability(q, p, p < 1.0 - ENTANGLED_PURITY_TOL))
    bipartitions = None
    if include_bipartitions and n <= 10 and n >= 2:
        # each unordered bipartition once, represented by the side holding qubit 0
        bipartitions = []
        for mask in range(1 << (n - 1)):
            combo = tuple(sorted({0} | {q for q in range(1, n) if mask & (1 << (q - 1))}))
            if len(combo) == n:
                continue
            p = partial_trace(state, combo).purity()
            bipartitions.append(
                BipartitionSeparability(combo, p, p < 1.0 - ENTANGLED_PURITY_TOL)
            )
    return SeparabilityReport(per_qubit, bipartitions, mode=OMNISCIENT)


def separability_report(
    target: "DebugSession | QuantumState | DensityMatrix",
    qubits: Sequence[int] | None = None,
    include_bipartitions: bool = False,
) -> SeparabilityReport:
    """Per-qubit purity criterion: a qubit of a pure global state is
    entangled with the rest iff its reduced purity falls below 1.

    Omniscient sessions and explicit states are analyzed exactly; a
    device-faithful session estimates each qubit's Bloch vector by sampled
    single-qubit tomography and flags on the estimated purity.
    """
    if isinstance(target, DebugSession):
        return target.separability_report(qubits, include_bipartitions)
    return _pure_state_report(target, qubits, include_bipartitions)


def describe_as_known_preparation(
    state: QuantumState,
    candidates: Sequence[tuple[str, CircuitIR, str]],
) -> PreparationMatch | None:
    """First candidate (name, ir, initial bits) regenerating `state` up to
    global phase, reported as classical information: the initial bitstring
    plus the operator names applied to it."""
    for name, ir, initial_bits in candidates:
        regenerated = run_unitary_prefix(ir, QuantumState.from_bits(initial_bits))
        if regenerated.n_qubits != state.n_qubits:
            continue
        if equal_up_to_global_phase(regenerated, state, 1e-9):
            ops = tuple(text for text, _ in itertools.groupby(r.text for r in ir.source_map))
            return PreparationMatch(name, initial_bits, ops)
    return None


def build_universal_cloner() -> np.ndarray:
    """Symmetric universal 1->2 cloning isometry on (source, copy, ancilla),
    completed to an 8x8 unitary by Gram-Schmidt over the standard basis.

    Columns for |a,0,0> follow the optimal symmetric cloner: each output
    copy's reduction has fidelity 5/6 with any pure input (verified in the
    test suite, not assumed).
    """
    s23, s16 = np.sqrt(2.0 / 3.0), np.sqrt(1.0 / 6.0)
    u = np.zeros((8, 8), dtype=np.complex128)
    col0 = np.zeros(8, dtype=np.complex128)
    col0[0b000] = s23
    col0[0b011] = s16
    col0[0b101] = s16
    col4 = np.zeros(8, dtype=np.complex128)
    col4[0b111] = s23
    col4[0b010] = s16
    col4[0b100] = s16
    u[:, 0], u[:, 4] = col0, col4
    basis = [col0, col4]
    free = [1, 2, 3, 5, 6, 7]
    for j in range(8):
        if not free:
            break
        v = np.zeros(8, dtype=np.complex128)
        v[j] = 1.0
        for b in basis:
            v = v - np.vdot(b, v) * b
        norm = np.linalg.norm(v)
        if norm > 1e-9:
            v /= norm
            u[:, free.pop(0)] = v
            basis.append(v)
    return u


UNIVERSAL_CLONER = build_universal_cloner()


def tomography(
    preparation: CircuitIR,
    qubits: Sequence[int],
    shots: int | None,
    config: EngineConfig | None = None,
    reference: QuantumState | None = None,
) -> TomographyResult:
    """Linear-inversion state tomography over the chosen qubits.

    For every non-identity Pauli string the expectation is estimated from
    `shots` basis-rotated measurements (or computed exactly when
    shots is None), then rho_hat = 2^-k sum_P <P> P is projected onto the
    PSD trace-1 cone by clipping negative eigenvalues.
    """
    qs = sorted(set(qubits))
    k = len(qs)
    if k == 0 or k > 3:
        raise TooManyQubits("tomography supports 1 to 3 qubits")
    if preparation.has_measurement():
        raise NonUnitaryPreparation("preparation must be measurement-free")
    config = config or EngineConfig()
    cursor = ExecutionCursor(preparation, config)
    cursor.run_to_end()
    prepared = cursor.state

    dim = 1 << k
    settings = ["".join(p) for p in itertools.product(_PAULI_LABELS, repeat=k)]
    settings = [s for s in settings if set(s) != {"I"}]
    rho = np.eye(dim, dtype=np.complex128)  # identity term: <I...I> = 1

    for setting_index, labels in enumerate(settings):
        if shots is None:
            reduced = partial_trace(prepared, qs)
            matrix = _pauli_matrix(labels)
            value = float(np.trace(reduced.matrix @ matrix).real)
        else:
            value = _sample_pauli_expectation(
                prepared, qs, labels, shots, derive_key(config.seed, setting_index)
            )
        rho += value * _pauli_matrix(labels)
    rho /= dim

    estimate = DensityMatrix(k, _project_psd(rho))
    fidelity_vs_reference = fidelity(reference, estimate) if reference is not None else None
    return TomographyResult(estimate, shots, settings, fidelity_vs_reference)


def _pauli_matrix(labels: str) -> np.ndarray:
    m = gates.PAULI_BY_NAME[labels[0]]
    for label in labels[1:]:
        m = np.kron(m, gates.PAULI_BY_NAME[label])
    return m


def _project_psd(rho: np.ndarray) -> np.ndarray:
    """Nearest PSD trace-1 matrix: clip negative eigenvalues, renormalize."""
    herm = (rho + rho.conj().T) / 2.0
    vals, vecs = np.linalg.eigh(herm)
    vals = np.clip(vals, 0.0, None)
    total = vals.sum()
    if total <= 0.0:
        vals = np.ones_like(vals) / len(vals)
    else:
        vals /= total
    return (vecs * vals) @ vecs.conj().T


def _sample_pauli_expectation(
    state: QuantumState, qubits: list[int], labels: str, shots: int, key: int
) -> float:
    """Estimate <P> by rotating into the Z basis and sampling outcomes."""
    rotated = state.copy()
    active = []
    for q, label in zip(qubits, labels):
        if label == "I":
            continue
        active.append(q)
        rotated.apply_1q(gates.MEASUREMENT_ROTATIONS[label], q)
    if not active:
        return 1.0
    probs = rotated.marginal_probabilities(active)
    outcomes = _sample_from_probs(probs, shots, CounterRng(key))
    signs = np.array([(-1) ** bin(i).count("1") for i in range(len(probs))])
    return float(np.mean(signs[outcomes]))


def _sample_from_probs(probs: np.ndarray, shots: int, rng: CounterRng) -> np.ndarray:
    """Inverse-CDF sampling: one uniform per sample."""
    cdf = np.cumsum(probs)
    cdf[-1] = max(cdf[-1], 1.0)
    return np.searchsorted(cdf, rng.doubles(shots), side="right")


# --- the session -----------------------------------------------------------------------


class DebugSession:
    """Cursor over a CircuitIR with breakpoints, modes, and a shot budget.

    A session is single-owner: one context advances it at a time. Statistical
    queries number themselves so a replayed session reproduces its evidence
    exactly.
    """

    def __init__(
        self,
        ir: CircuitIR,
        seed: int = 0,
        mode: str = OMNISCIENT,
        shot_budget: int = DEFAULT_SHOT_BUDGET,
        source: str | None = None,
        method: str = DENSE,
    ):
        if mode not in _MODE_ALIASES:
            raise ValueError(f"unknown mode {mode!r}; use omniscient or device")
        self.ir = ir
        self.seed = seed
        self.mode = _MODE_ALIASES[mode]
        self.shot_budget = shot_budget
        self.source = source
        self.method = method
        self.breakpoints: set[int] = {
            d.anchor for d in ir.all_directives() if d.kind == "break"
        }
        self.cursor: ExecutionCursor = step_execute(ir, EngineConfig(method=method, seed=seed))
        self.event_log: list[dict] = []
        self._query_index = 0
        self._asserted_at: set[int] = set()
        self._continuing = False
        self._continue_results: list[AssertionResult] = []
        self._continue_moved = False

    @classmethod
    def from_source(cls, source: str, include_path=None, **kwargs) -> "DebugSession":
        from .qasm import load_source

        return cls(load_source(source, include_path), source=source, **kwargs)

    # --- mode and bookkeeping -------------------------------------------------------

    @property
    def omniscient(self) -> bool:
        return self.mode == OMNISCIENT

    def set_mode(self, mode: str) -> None:
        try:
            self.mode = _MODE_ALIASES[mode]
        except KeyError:
            raise ValueError(f"unknown mode {mode!r}; use omniscient or device") from None
        self._log("mode", mode=self.mode)

    def _log(self, event: str, **payload) -> None:
        self.event_log.append({"event": event, "position": self.cursor.position, **payload})

    def _next_query_key(self) -> int:
        key = derive_key(self.seed, self._query_index)
        self._query_index += 1
        return key

    # --- breakpoints and motion ---------------------------------------------------------

    def set_breakpoint(self, line: int | None = None, index: int | None = None) -> int:
        """Pause before the instruction at `index`, or before the first
        instruction whose source statement starts on `line`."""
        if (line is None) == (index is None):
            raise ValueError("specify exactly one of line or index")
        if index is None:
            for i, ref in enumerate(self.ir.source_map):
                if ref.span.line == line:
                    index = i
                    break
            else:
                raise UnresolvableLocation(f"no instruction maps to line {line}")
        if not (0 <= index < len(self.ir.instructions)):
            raise UnresolvableLocation(f"instruction index {index} out of range")
        self.breakpoints.add(index)
        self._log("breakpoint-set", index=index)
        return index

    def _arrive(self, collected: list[AssertionResult]) -> None:
        """Evaluate assertion directives anchored at the current position."""
        pos = self.cursor.position
        if pos in self._asserted_at:
            return
        self._asserted_at.add(pos)
        for directive in self.ir.directives.get(pos, ()):
            if directive.kind == "break":
                continue
            result = self.evaluate_assertion(directive)
            collected.append(result)

    def step(self) -> tuple[TraceEvent | None, list[AssertionResult]]:
        """Advance one instruction; returns the trace event and any
        assertion results that fired at the new position."""
        results: list[AssertionResult] = []
        if self.cursor.finished:
            return None, results
        event = self.cursor.advance()
        self._log("step", index=event.index, kind=event.kind)
        self._arrive(results)
        return event, results

    def continue_(self, max_steps: int | None = None) -> StopInfo | None:
        """Run until a breakpoint or the end of the program.

        With `max_steps` set, returns None when the quota runs out before a
        stop; calling again resumes (used to interleave heartbeats)."""
        if not self._continuing:
            self._continuing = True
            self._continue_results = []
            self._continue_moved = False
            self._arrive(self._continue_results)
        steps = 0
        while not self.cursor.finished:
            pos = self.cursor.position
            if self._continue_moved and pos in self.breakpoints:
                self._continuing = False
                self._log("paused", reason="breakpoint")
                return StopInfo("breakpoint", pos, self._continue_results)
            if max_steps is not None and steps >= max_steps:
                return None
            self.cursor.advance()
            steps += 1
            self._continue_moved = True
            self._arrive(self._continue_results)
        self._continuing = False
        self._log("paused", reason="end")
        return StopInfo("end", self.cursor.position, self._continue_results)

    def run_all_assertions(self) -> list[AssertionResult]:
        """Run to completion (ignoring breakpoints) evaluating every assertion."""
        results: list[AssertionResult] = []
        self._arrive(results)
        while not self.cursor.finished:
            self.cursor.advance()
            self._arrive(results)
        return results

    # --- inspection -------------------------------------------------------------------

    def inspect_state(self) -> dict:
        """Omniscient: full amplitude snapshot. Device-faithful: histogram of
        fresh full-register measurements over re-executed prefixes; the live
        state is left untouched."""
        if self.omniscient:
            probs = self.cursor.state.basis_probabilities()
            t = probs.reshape((2,) * self.ir.n_qubits)
            qubit_p1 = [
                float(np.moveaxis(t, q, 0)[1].sum()) for q in range(self.ir.n_qubits)
            ]
            payload = {
                "mode": self.mode,
                "position": self.cursor.position,
                "snapshot": self.cursor.state.snapshot(),
                "classical_bits": self.cursor.classical_bits(),
                "qubit_probabilities": [[1.0 - p1, p1] for p1 in qubit_p1],
            }
        else:
            histogram = self._sample_outcomes(list(range(self.ir.n_qubits)), self.shot_budget)
            total = max(sum(histogram.values()), 1)
            qubit_p1 = [
                sum(count for bits, count in histogram.items() if bits[q] == "1") / total
                for q in range(self.ir.n_qubits)
            ]
            payload = {
                "mode": self.mode,
                "position": self.cursor.position,
                "histogram": histogram,
                "shots": self.shot_budget,
                "qubit_probabilities": [[1.0 - p1, p1] for p1 in qubit_p1],
            }
        self._log("inspect", mode=self.mode)
        return payload

    def qubit_probability(self, q: int) -> dict:
        if self.omniscient:
            p0, p1 = self.cursor.state.qubit_probability(q)
            return {"qubit": q, "p0": p0, "p1": p1, "mode": self.mode}
        histogram = self._sample_outcomes([q], self.shot_budget)
        ones = histogram.get("1", 0)
        return {
            "qubit": q,
            "p1_estimate": ones / self.shot_budget,
            "shots": self.shot_budget,
            "mode": self.mode,
        }

    # --- device-faithful sampling machinery -----------------------------------------------

    def _prefix_ir(self) -> CircuitIR:
        return self.ir.prefix(self.cursor.position)

    def _sample_outcomes(self, qubits: list[int], shots: int) -> dict[str, int]:
        """Histogram of measuring `qubits` at the pause point, one fresh
        prefix execution per sample (vectorized when the prefix is unitary)."""
        prefix = self._prefix_ir()
        key = self._next_query_key()
        if shots < 1:
            return {}
        if not prefix.has_nonunitary():
            state = run_unitary_prefix(prefix, QuantumState.zero(self.ir.n_qubits))
            probs = state.marginal_probabilities(qubits)
            outcomes = _sample_from_probs(probs, shots, CounterRng(key))
            histogram: dict[str, int] = {}
            for outcome, count in zip(*np.unique(outcomes, return_counts=True)):
                histogram[index_to_bits(int(outcome), len(qubits))] = int(count)
            return histogram
        base = CounterRng(key)
        histogram = {}
        for sample in range(shots):
            rng = base.substream(sample)
            cursor = ExecutionCursor(self.ir, EngineConfig(method=self.method, seed=0), rng=rng)
            cursor.run_to(self.cursor.position)
            bits = "".join(str(cursor.state.measure(q, rng)[0]) for q in qubits)
            histogram[bits] = histogram.get(bits, 0) + 1
        return histogram

    def _sample_creg(self, creg: str, shots: int) -> dict[str, int]:
        """Distribution of a classical register's bits over prefix replays."""
        prefix = self._prefix_ir()
        key = self._next_query_key()
        offset, size = self.ir.cregs[creg]
        result = execute(
            prefix,
            EngineConfig(method=self.method, seed=key),
            shots=shots,
            record_per_shot=True,
        )
        histogram: dict[str, int] = {}
        for bits in result.per_shot or []:
            value = bits[offset : offset + size]
            histogram[value] = histogram.get(value, 0) + 1
        return histogram

    def _sample_bloch_purity(self, q: int, shots: int) -> float:
        """Single-qubit tomographic purity estimate from sampled <X>,<Y>,<Z>."""
        prefix = self._prefix_ir()
        rho = np.eye(2, dtype=np.complex128)
        for label in ("X", "Y", "Z"):
            key = self._next_query_key()
            if not prefix.has_nonunitary():
                state = run_unitary_prefix(prefix, QuantumState.zero(self.ir.n_qubits))
                value = _sample_pauli_expectation(state, [q], label, shots, key)
            else:
                base = CounterRng(key)
                total = 0
                for sample in range(shots):
                    rng = base.substream(sample)
                    cursor = ExecutionCursor(self.ir, EngineConfig(method=self.method, seed=0), rng=rng)
                    cursor.run_to(self.cursor.position)
                    cursor.state.apply_1q(gates.MEASUREMENT_ROTATIONS[label], q)
                    bit, _ = cursor.state.measure(q, rng)
                    total += 1 - 2 * bit
                value = total / shots
            rho += value * gates.PAULI_BY_NAME[label]
        rho = _project_psd(rho / 2.0)
        return float(np.vdot(rho, rho).real)

    # --- separability ------------------------------------------------------------------------

    def separability_report(
        self, qubits: Sequence[int] | None = None, include_bipartitions: bool = False
    ) -> SeparabilityReport:
        if self.omniscient:
            report = _pure_state_report(self.cursor.state, qubits, include_bipartitions)
            self._log("separability", mode=self.mode)
            return report
        targets = list(qubits) if qubits is not None else list(range(self.ir.n_qubits))
        per_qubit = []
        for q in targets:
            purity = self._sample_bloch_purity(q, self.shot_budget)
            per_qubit.append(QubitSeparability(q, purity, purity < DEVICE_PURITY_THRESHOLD))
        self._log("separability", mode=self.mode)
        return SeparabilityReport(
            per_qubit, None, mode=self.mode, shots_per_setting=self.shot_budget
        )

    # --- cloning ---------------------------------------------------------------------------------

    def exact_clone_orthogonal(
        self, source: Sequence[int], blank: Sequence[int]
    ) -> CloneReport:
        """Clone a member of the orthogonal family {H^n |j>} from `source`
        onto `blank` via the Hadamard/CX fan-out circuit. Blanks must be |0>."""
        src = list(source)
        dst = list(blank)
        if set(src) & set(dst):
            raise RegisterOverlap("source and blank qubits overlap")
        if len(src) != len(dst) or not src:
            raise DimensionMismatch("source and blank registers must have equal size")
        state = self.cursor.state
        if self.omniscient:
            probs = state.marginal_probabilities(dst)
            if probs[0] < 1.0 - CLASSICAL_PROB_TOL:
                raise BlankNotZero(f"blank register not in |0...0> (p={probs[0]:.6f})")
        for q in src:
            state.apply_1q(gates.H, q)
        for s, b in zip(src, dst):
            state.apply_cx(s, b)
        for q in src:
            state.apply_1q(gates.H, q)
        for q in dst:
            state.apply_1q(gates.H, q)
        self._log("clone-exact", source=src, blank=dst)
        return CloneReport((src[0], dst[0]), None)

    def universal_clone(self, source: int, blanks: Sequence[int]) -> CloneReport:
        """Approximate 1->2 cloning: copies land on `source` and `blanks[0]`,
        `blanks[1]` is the machine ancilla. In omniscient mode the report
        carries each copy's fidelity against the (pure) input reduction."""
        b = list(blanks)
        if len(b) != 2:
            raise DimensionMismatch("universal cloning needs exactly two blank qubits")
        if source in b or b[0] == b[1]:
            raise RegisterOverlap("source and blank qubits overlap")
        state = self.cursor.state
        input_state: QuantumState | None = None
        if self.omniscient:
            reduced = partial_trace(state, [source])
            if reduced.purity() < 1.0 - ENTANGLED_PURITY_TOL:
                raise MixedSource(
                    f"source qubit is not pure (purity {reduced.purity():.6f})"
                )
            probs = state.marginal_probabilities(b)
            if probs[0] < 1.0 - CLASSICAL_PROB_TOL:
                raise BlankNotZero("blank qubits not in |00>")
            vals, vecs = np.linalg.eigh(reduced.matrix)
            input_state = QuantumState(1, vecs[:, int(np.argmax(vals))].astype(np.complex128))
        state.apply_gate(UNIVERSAL_CLONER, [source, b[0], b[1]])
        fidelities = None
        if input_state is not None:
            f_a = fidelity(input_state, partial_trace(state, [source]))
            f_b = fidelity(input_state, partial_trace(state, [b[0]]))
            fidelities = (f_a, f_b)
        self._log("clone-universal", source=source, blanks=b)
        return CloneReport((source, b[0]), fidelities)

    # --- tomography at the pause point ------------------------------------------------------------

    def tomography(self, qubits: Sequence[int], shots: int | None = None) -> TomographyResult:
        """Tomography of the current prefix state (prefix must be unitary).
        Omniscient sessions default to exact expectations; device-faithful
        sessions default to the session shot budget per setting."""
        prefix = self._prefix_ir()
        if prefix.has_nonunitary():
            raise NonUnitaryPreparation("prefix contains measurement or conditionals")
        if shots is None and not self.omniscient:
            shots = self.shot_budget
        key = self._next_query_key()
        result = tomography(
            prefix, qubits, shots, EngineConfig(method=self.method, seed=key)
        )
        self._log("tomography", qubits=list(qubits), shots=shots)
        return result

    # --- assertions -----------------------------------------------------------------------------------

    def evaluate_assertion(self, directive: Directive) -> AssertionResult:
        handler = {
            "assert-classical": self._assert_classical,
            "assert-superposition": self._assert_superposition,
            "assert-separable": self._assert_separable,
            "assert-entangled": self._assert_entangled,
            "assert-distribution": self._assert_distribution,
        }.get(directive.kind)
        if handler is None:
            raise ValueError(f"not an assertion directive: {directive.kind}")
        result = handler(directive)
        self._log("assertion", kind=directive.kind, verdict=result.verdict)
        return result

    def _assert_classical(self, directive: Directive) -> AssertionResult:
        qubits = list(directive.qubits)
        expected = directive.expected_bits or ""
        if self.omniscient:
            probs = self.cursor.state.marginal_probabilities(qubits)
            top = int(np.argmax(probs))
            dominant = index_to_bits(top, len(qubits))
            ok = dominant == expected and probs[top] >= 1.0 - CLASSICAL_PROB_TOL
            return AssertionResult(
                directive,
                "pass" if ok else "fail",
                {"dominant": dominant, "probability": float(probs[top]), "expected": expected},
            )
        if self.shot_budget < 1:
            return self._inconclusive(directive, "shot budget exhausted")
        histogram = self._sample_outcomes(qubits, self.shot_budget)
        ok = set(histogram) == {expected}
        return AssertionResult(
            directive,
            "pass" if ok else "fail",
            {"histogram": histogram, "expected": expected},
            shots_used=self.shot_budget,
        )

    def _assert_superposition(self, directive: Directive) -> AssertionResult:
        qubits = list(directive.qubits)
        if self.omniscient:
            probs = self.cursor.state.marginal_probabilities(qubits)
            top = float(probs.max())
            superposed = top < 1.0 - SUPERPOSITION_TOL
            return AssertionResult(
                directive,
                "pass" if superposed else "fail",
                {"max_probability": top},
            )
        if self.shot_budget < 2:
            return self._inconclusive(directive, "shot budget too small to witness superposition")
        histogram = self._sample_outcomes(qubits, self.shot_budget)
        superposed = len(histogram) >= 2
        return AssertionResult(
            directive,
            "pass" if superposed else "fail",
            {"histogram": histogram, "distinct_outcomes": len(histogram)},
            shots_used=self.shot_budget,
        )

    def _assert_separable(self, directive: Directive) -> AssertionResult:
        report = self.separability_report(list(directive.qubits))
        entry = report.per_qubit[0]
        return AssertionResult(
            directive,
            "fail" if entry.entangled else "pass",
            {"purity": entry.purity, "qubit": entry.qubit},
            shots_used=report.shots_per_setting,
        )

    def _assert_entangled(self, directive: Directive) -> AssertionResult:
        report = self.separability_report(list(directive.qubits))
        all_entangled = all(e.entangled for e in report.per_qubit)
        return AssertionResult(
            directive,
            "pass" if all_entangled else "fail",
            {"per_qubit": [e.to_json() for e in report.per_qubit]},
            shots_used=report.shots_per_setting,
        )

    def _assert_distribution(self, directive: Directive) -> AssertionResult:
        assert directive.distribution is not None and directive.tolerance is not None
        plan = chernoff_shots(directive.tolerance, 0.01)
        if plan.shots > self.shot_budget:
            return self._inconclusive(
                directive,
                f"needs {plan.shots} shots (Chernoff at eps={directive.tolerance}), "
                f"budget is {self.shot_budget}",
            )
        histogram = self._sample_creg(directive.register or "", plan.shots)
        verdict = compare_distributions(histogram, directive.distribution)
        ok = verdict.passed and verdict.tvd <= directive.tolerance
        return AssertionResult(
            directive,
            "pass" if ok else "fail",
            {"histogram": histogram, "tvd": verdict.tvd, "expected": directive.distribution},
            shots_used=plan.shots,
            p_value=verdict.p_value,
        )

    def _inconclusive(self, directive: Directive, why: str) -> AssertionResult:
        # BudgetExhausted maps to an inconclusive verdict, never a crash.
        return AssertionResult(directive, "inconclusive", {"reason": why})
