"""Shot-by-shot execution of elaborated circuits.

Two interchangeable engines run the same instruction stream:

* ``dense-inplace`` updates the amplitude vector with O(2^n) kernels and
  never materializes an operator matrix;
* ``naive-matrix`` builds the full 2^n x 2^n matrix of every instruction by
  Kronecker extension and multiplies. It is slow on purpose: an independent
  oracle for the fast path.

Randomness: shot ``i`` uses the counter substream ``CounterRng(seed).substream(i)``.
When every measurement is terminal (no reset, no conditionals, all measures
after all gates) and more than one shot is requested, the run samples each
shot's joint outcome by inverse CDF from the first uniform of its substream
instead of replaying the circuit; the outcome distribution is identical and
both engines apply the same rule, so counts stay engine-independent. Any
mid-circuit measurement falls back to honest per-shot replay, drawing one
uniform per measurement.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import gates
from .errors import CapacityExceeded, CursorExhausted, KernelCorruption, NonUnitaryProgram
from .qasm.ir import CircuitIR, Instruction
from .rng import CounterRng
from .state import QuantumState, index_to_bits

DENSE = "dense-inplace"
NAIVE = "naive-matrix"
_METHOD_ALIASES = {"dense": DENSE, "naive": NAIVE, DENSE: DENSE, NAIVE: NAIVE}
DEFAULT_MAX_QUBITS = {DENSE: 20, NAIVE: 10}
_NORM_DRIFT_LIMIT = 1e-6


@dataclass
class EngineConfig:
    method: str = DENSE
    seed: int = 0
    max_qubits: int | None = None
    record_statevector: bool = False

    def __post_init__(self):
        try:
            self.method = _METHOD_ALIASES[self.method]
        except KeyError:
            raise ValueError(f"unknown engine method {self.method!r}") from None

    @property
    def capacity(self) -> int:
        return self.max_qubits if self.max_qubits is not None else DEFAULT_MAX_QUBITS[self.method]

    def to_json(self) -> dict:
        return {"method": self.method, "seed": self.seed}


@dataclass
class TraceEvent:
    index: int
    kind: str
    operands: dict
    norm: float
    snapshot: dict | None = None

    def to_json(self) -> dict:
        out = {
            "index": self.index,
            "kind": self.kind,
            "operands": self.operands,
            "norm": self.norm,
        }
        if self.snapshot is not None:
            out["snapshot"] = self.snapshot
        return out


@dataclass
class RunResult:
    counts: dict[str, int]
    shots: int
    engine: EngineConfig
    final_state: dict | None = None
    per_shot: list[str] | None = None
    elapsed: float = 0.0

    def to_json(self, include_elapsed: bool = False) -> dict:
        out: dict = {
            "counts": {k: self.counts[k] for k in sorted(self.counts)},
            "shots": self.shots,
            "engine": self.engine.to_json(),
            "final_state": self.final_state,
        }
        if self.per_shot is not None:
            out["per_shot"] = self.per_shot
        if include_elapsed:
            out["elapsed_seconds"] = self.elapsed
        return out


# --- full-matrix construction (independent of the in-place kernels) -------------

def embed_1q(gate: np.ndarray, q: int, n: int) -> np.ndarray:
    """Kronecker-extend a 2x2 gate onto qubit q of an n-qubit register."""
    return np.kron(np.kron(np.eye(1 << q), gate), np.eye(1 << (n - 1 - q)))


def cx_full(control: int, target: int, n: int) -> np.ndarray:
    """Full CNOT permutation matrix built by basis-index arithmetic."""
    dim = 1 << n
    cbit = 1 << (n - 1 - control)
    tbit = 1 << (n - 1 - target)
    m = np.zeros((dim, dim), dtype=np.complex128)
    for j in range(dim):
        k = j ^ tbit if j & cbit else j
        m[k, j] = 1.0
    return m


def instruction_unitary(instr: Instruction, n: int) -> np.ndarray:
    if instr.kind == "u":
        return embed_1q(gates.u_matrix(*instr.params), instr.qubits[0], n)
    if instr.kind == "cx":
        return cx_full(instr.qubits[0], instr.qubits[1], n)
    if instr.kind == "barrier":
        return np.eye(1 << n, dtype=np.complex128)
    raise NonUnitaryProgram(f"instruction {instr.kind!r} has no unitary matrix")


# --- kernels ------------------------------------------------------------------------

class _DenseKernel:
    method = DENSE

    def __init__(self, n: int):
        self.state = QuantumState.zero(n)

    def apply(self, instr: Instruction) -> None:
        if instr.kind == "u":
            self.state.apply_1q(gates.u_matrix(*instr.params), instr.qubits[0])
        elif instr.kind == "cx":
            self.state.apply_cx(instr.qubits[0], instr.qubits[1])


class _NaiveKernel:
    method = NAIVE

    def __init__(self, n: int):
        self.state = QuantumState.zero(n)

    def apply(self, instr: Instruction) -> None:
        if instr.kind in ("u", "cx"):
            m = instruction_unitary(instr, self.state.n_qubits)
            self.state._amps = m @ self.state._amps


_KERNELS = {DENSE: _DenseKernel, NAIVE: _NaiveKernel}


def _make_kernel(ir: CircuitIR, config: EngineConfig):
    if ir.n_qubits > config.capacity:
        raise CapacityExceeded(
            f"{ir.n_qubits} qubits exceeds {config.method} capacity {config.capacity}"
        )
    if ir.n_qubits < 1:
        raise CapacityExceeded("program declares no qubits")
    return _KERNELS[config.method](ir.n_qubits)


def _creg_value(ir: CircuitIR, clbits: list[int], name: str) -> int:
    offset, size = ir.cregs[name]
    return sum(clbits[offset + i] << i for i in range(size))


def _check_norm(state: QuantumState) -> float:
    norm = state.norm_sq()
    if abs(norm - 1.0) > _NORM_DRIFT_LIMIT:
        raise KernelCorruption(f"state norm drifted to {norm}")
    return norm


def _run_instruction(kernel, ir: CircuitIR, instr: Instruction, clbits: list[int], rng: CounterRng) -> None:
    """Execute one instruction (condition already checked by the caller)."""
    if instr.kind in ("u", "cx"):
        kernel.apply(instr)
        _check_norm(kernel.state)
    elif instr.kind == "measure":
        bit, _ = kernel.state.measure(instr.qubits[0], rng)
        clbits[instr.clbit] = bit
    elif instr.kind == "reset":
        # measure, then flip back to |0> when the outcome was 1
        bit, _ = kernel.state.measure(instr.qubits[0], rng)
        if bit:
            kernel.apply(Instruction("u", instr.qubits, params=(np.pi, 0.0, np.pi)))
    # barrier: no effect


def _condition_holds(ir: CircuitIR, instr: Instruction, clbits: list[int]) -> bool:
    if instr.condition is None:
        return True
    name, value = instr.condition
    return _creg_value(ir, clbits, name) == value


def _clbit_string(clbits: list[int]) -> str:
    return "".join(str(b) for b in clbits)


# --- execution -------------------------------------------------------------------------

def _terminal_layout(ir: CircuitIR) -> tuple[list[Instruction], list[Instruction]] | None:
    """Split into (unitary prefix, terminal measures) when that shape holds."""
    prefix: list[Instruction] = []
    measures: list[Instruction] = []
    for instr in ir.instructions:
        if instr.kind == "reset" or instr.condition is not None:
            return None
        if instr.kind == "measure":
            measures.append(instr)
        elif instr.kind == "barrier":
            continue
        elif measures:
            return None  # gate after a measurement
        else:
            prefix.append(instr)
    return prefix, measures


def execute(
    ir: CircuitIR,
    config: EngineConfig,
    shots: int = 1024,
    record_per_shot: bool = False,
    trace: Callable[[TraceEvent], None] | None = None,
) -> RunResult:
    """Run `shots` executions and aggregate classical outcomes.

    Identical (ir, config, shots) triples produce identical results; the
    final statevector is recorded only for shots == 1 (with
    config.record_statevector set) so there is no ambiguity about which
    shot it belongs to.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    started = time.perf_counter()
    base = CounterRng(config.seed)
    counts: dict[str, int] = {}
    per_shot: list[str] | None = [] if record_per_shot else None
    final_state = None

    layout = _terminal_layout(ir) if shots > 1 and trace is None else None
    if layout is not None:
        prefix, measures = layout
        kernel = _make_kernel(ir, config)
        for instr in prefix:
            kernel.apply(instr)
            _check_norm(kernel.state)
        measured = sorted({m.qubits[0] for m in measures})
        if measures:
            probs = kernel.state.marginal_probabilities(measured)
            cdf = np.cumsum(probs)
            cdf[-1] = 1.0
        for shot in range(shots):
            clbits = [0] * ir.n_clbits
            if measures:
                u = base.substream(shot).next_double()
                outcome = int(np.searchsorted(cdf, u, side="right"))
                bits = {q: (outcome >> (len(measured) - 1 - i)) & 1 for i, q in enumerate(measured)}
                for m in measures:
                    clbits[m.clbit] = bits[m.qubits[0]]
            key = _clbit_string(clbits)
            counts[key] = counts.get(key, 0) + 1
            if per_shot is not None:
                per_shot.append(key)
    else:
        for shot in range(shots):
            rng = base.substream(shot)
            kernel = _make_kernel(ir, config)
            clbits = [0] * ir.n_clbits
            for index, instr in enumerate(ir.instructions):
                if not _condition_holds(ir, instr, clbits):
                    continue
                _run_instruction(kernel, ir, instr, clbits, rng)
                if trace is not None:
                    snapshot = kernel.state.snapshot() if config.record_statevector else None
                    trace(
                        TraceEvent(
                            index,
                            instr.kind,
                            instr.to_json(),
                            kernel.state.norm_sq(),
                            snapshot,
                        )
                    )
            key = _clbit_string(clbits)
            counts[key] = counts.get(key, 0) + 1
            if per_shot is not None:
                per_shot.append(key)
            if shots == 1 and config.record_statevector:
                final_state = kernel.state.snapshot()

    return RunResult(
        counts=counts,
        shots=shots,
        engine=config,
        final_state=final_state,
        per_shot=per_shot,
        elapsed=time.perf_counter() - started,
    )


class ExecutionCursor:
    """Single-shot stepping handle over a circuit.

    The cursor owns its state: `position` is the index of the next
    instruction, `state` the live statevector, `clbits` the classical bits.
    Conditionals whose guard fails still advance the cursor (the instruction
    was visited, it just had no effect).
    """

    def __init__(self, ir: CircuitIR, config: EngineConfig, rng: CounterRng | None = None):
        self.ir = ir
        self.config = config
        self._kernel = _make_kernel(ir, config)
        self.rng = rng if rng is not None else CounterRng(config.seed).substream(0)
        self.clbits: list[int] = [0] * ir.n_clbits
        self.position = 0
        self.events: list[TraceEvent] = []

    @property
    def state(self) -> QuantumState:
        return self._kernel.state

    @property
    def finished(self) -> bool:
        return self.position >= len(self.ir.instructions)

    def advance(self) -> TraceEvent:
        if self.finished:
            raise CursorExhausted("cursor is past the last instruction")
        instr = self.ir.instructions[self.position]
        if _condition_holds(self.ir, instr, self.clbits):
            _run_instruction(self._kernel, self.ir, instr, self.clbits, self.rng)
        event = TraceEvent(self.position, instr.kind, instr.to_json(), self.state.norm_sq())
        self.position += 1
        self.events.append(event)
        return event

    def run_to(self, index: int) -> None:
        """Advance until `position == index` (clamped to the program end)."""
        index = min(index, len(self.ir.instructions))
        if index < self.position:
            raise ValueError(f"cannot step backwards from {self.position} to {index}")
        while self.position < index:
            self.advance()

    def run_to_end(self) -> None:
        self.run_to(len(self.ir.instructions))

    def creg_value(self, name: str) -> int:
        return _creg_value(self.ir, self.clbits, name)

    def classical_bits(self) -> str:
        return _clbit_string(self.clbits)


def step_execute(ir: CircuitIR, config: EngineConfig) -> ExecutionCursor:
    """Cursor for interactive stepping (single-shot semantics)."""
    return ExecutionCursor(ir, config)


def circuit_unitary(ir: CircuitIR, max_qubits: int = DEFAULT_MAX_QUBITS[NAIVE]) -> np.ndarray:
    """Product of Kronecker-extended instruction matrices, in program order."""
    if ir.has_nonunitary():
        raise NonUnitaryProgram("program contains measurement, reset, or conditionals")
    if ir.n_qubits > max_qubits:
        raise CapacityExceeded(f"{ir.n_qubits} qubits exceeds unitary capacity {max_qubits}")
    dim = 1 << ir.n_qubits
    total = np.eye(dim, dtype=np.complex128)
    for instr in ir.instructions:
        if instr.kind == "barrier":
            continue
        total = instruction_unitary(instr, ir.n_qubits) @ total
    return total


def probabilities_bitstrings(probs: np.ndarray, n: int, threshold: float = 1e-12) -> dict[str, float]:
    """Map basis probabilities to {bitstring: p} dropping negligible entries."""
    return {
        index_to_bits(i, n): float(p) for i, p in enumerate(probs) if p > threshold
    }
