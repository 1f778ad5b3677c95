"""Pure-state and density-matrix linear algebra.

Index convention (documented everywhere user-visible): qubit 0 is the
leftmost character of a basis bitstring and the most significant bit of the
amplitude index, so |x0 x1 ... x_{n-1}> lives at index sum_i x_i * 2^(n-1-i).
Equivalently, reshaping the amplitude vector to shape (2,)*n puts qubit q on
tensor axis q.

Amplitude reads are instrumented: every public inspection accessor bumps
``amplitude_reads`` so the debugger's device-faithful mode can prove it never
peeked at a live state. Internal kernels and measurement sampling use the
private array directly (measurement is the simulated device's own physics,
not an inspection).
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CapacityExceeded,
    DegenerateNorm,
    DimensionMismatch,
    EmptyKeepSet,
    IndexOutOfRange,
    SameQubit,
)
from .rng import CounterRng

ATOL_STATE = 1e-9
_MEASURE_EPS = 1e-12
DEFAULT_TENSOR_LIMIT = 24


def index_to_bits(index: int, n_qubits: int) -> str:
    """Basis index -> bitstring with qubit 0 leftmost."""
    return format(index, f"0{n_qubits}b")


def bits_to_index(bits: str) -> int:
    return int(bits, 2) if bits else 0


class QuantumState:
    """Normalized complex amplitude vector over n qubits."""

    __slots__ = ("n_qubits", "_amps", "amplitude_reads")

    def __init__(self, n_qubits: int, amps: np.ndarray):
        self.n_qubits = n_qubits
        self._amps = amps
        self.amplitude_reads = 0

    # --- construction -------------------------------------------------------

    @classmethod
    def zero(cls, n_qubits: int) -> "QuantumState":
        """|00...0> on n_qubits."""
        if n_qubits < 1:
            raise ValueError("need at least one qubit")
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def from_bits(cls, bits: str) -> "QuantumState":
        """Computational basis state |bits> (qubit 0 leftmost)."""
        if not bits or any(b not in "01" for b in bits):
            raise ValueError(f"invalid basis bitstring {bits!r}")
        state = cls.zero(len(bits))
        idx = bits_to_index(bits)
        state._amps[0] = 0.0
        state._amps[idx] = 1.0
        return state

    @classmethod
    def from_amplitudes(cls, amps: Sequence[complex]) -> "QuantumState":
        arr = np.asarray(amps, dtype=np.complex128).reshape(-1)
        n = arr.size.bit_length() - 1
        if arr.size != (1 << n) or arr.size < 2:
            raise DimensionMismatch(f"amplitude vector length {arr.size} is not a power of two")
        norm = float(np.vdot(arr, arr).real)
        if abs(norm - 1.0) > ATOL_STATE:
            raise ValueError(f"amplitudes not normalized: |psi|^2 = {norm}")
        return cls(n, arr.copy())

    def copy(self) -> "QuantumState":
        return QuantumState(self.n_qubits, self._amps.copy())

    # --- instrumented inspection accessors -----------------------------------

    @property
    def amplitudes(self) -> np.ndarray:
        """Copy of the amplitude vector (counted as an inspection read)."""
        self.amplitude_reads += 1
        return self._amps.copy()

    def basis_probabilities(self) -> np.ndarray:
        """|alpha_x|^2 for every basis index (counted as an inspection read)."""
        self.amplitude_reads += 1
        return np.abs(self._amps) ** 2

    def marginal_probabilities(self, qubits: Sequence[int]) -> np.ndarray:
        """Outcome distribution over the given qubits, in their listed order."""
        qs = list(qubits)
        self._check_qubits(qs)
        if len(set(qs)) != len(qs):
            raise SameQubit("duplicate qubit in marginal")
        self.amplitude_reads += 1
        probs = np.abs(self._amps) ** 2
        t = probs.reshape((2,) * self.n_qubits)
        rest = tuple(q for q in range(self.n_qubits) if q not in qs)
        marg = t.transpose(tuple(qs) + rest).reshape((1 << len(qs), -1)).sum(axis=1)
        return marg

    def qubit_probability(self, q: int) -> tuple[float, float]:
        """(p0, p1) for measuring qubit q (counted as an inspection read)."""
        m = self.marginal_probabilities([q])
        return float(m[0]), float(m[1])

    def snapshot(self) -> dict:
        """JSON-ready snapshot: documented wire format, qubit 0 leftmost."""
        amps = self.amplitudes
        return {
            "n_qubits": self.n_qubits,
            "amplitudes": [[float(a.real), float(a.imag)] for a in amps],
            "ordering": "q0-leftmost",
        }

    # --- internal views (not counted) ----------------------------------------

    def norm_sq(self) -> float:
        return float(np.vdot(self._amps, self._amps).real)

    def _probs(self) -> np.ndarray:
        return np.abs(self._amps) ** 2

    def _check_qubits(self, qubits: Iterable[int]) -> None:
        for q in qubits:
            if not (0 <= q < self.n_qubits):
                raise IndexOutOfRange(f"qubit {q} out of range for {self.n_qubits} qubits")

    # --- gate application -----------------------------------------------------

    def apply_1q(self, gate: np.ndarray, target: int) -> "QuantumState":
        """Apply a 2x2 matrix to `target` in place: O(2^n), no big allocation."""
        self._check_qubits([target])
        step = 1 << (self.n_qubits - 1 - target)
        v = self._amps.reshape(-1, 2, step)
        v0 = v[:, 0, :]
        v1 = v[:, 1, :]
        a = v0.copy()
        # v1 is read before each write, so only the v0 block needs a copy
        np.multiply(v1, gate[0, 1], out=v0)
        v0 += gate[0, 0] * a
        np.multiply(v1, gate[1, 1], out=v1)
        v1 += gate[1, 0] * a
        return self

    def apply_cx(self, control: int, target: int) -> "QuantumState":
        """Permute amplitudes per the CNOT truth table, in place."""
        if control == target:
            raise SameQubit("control and target must differ")
        self._check_qubits([control, target])
        t = self._amps.reshape((2,) * self.n_qubits)
        sel: list = [slice(None)] * self.n_qubits
        sel[control] = 1
        sub = t[tuple(sel)]
        ax = target - 1 if target > control else target
        lo: list = [slice(None)] * (self.n_qubits - 1)
        hi = lo.copy()
        lo[ax] = 0
        hi[ax] = 1
        tmp = sub[tuple(lo)].copy()
        sub[tuple(lo)] = sub[tuple(hi)]
        sub[tuple(hi)] = tmp
        return self

    def apply_gate(self, gate: np.ndarray, targets: Sequence[int]) -> "QuantumState":
        """Apply a 2^k x 2^k matrix to the listed qubits (first qubit = MSB)."""
        ts = list(targets)
        self._check_qubits(ts)
        if len(set(ts)) != len(ts):
            raise SameQubit("duplicate target qubit")
        k = len(ts)
        dim = 1 << k
        gate = np.asarray(gate, dtype=np.complex128)
        if gate.shape != (dim, dim):
            raise DimensionMismatch(f"gate shape {gate.shape} does not act on {k} qubits")
        t = self._amps.reshape((2,) * self.n_qubits)
        rest = tuple(q for q in range(self.n_qubits) if q not in ts)
        perm = tuple(ts) + rest
        front = t.transpose(perm).reshape(dim, -1)
        out = (gate @ front).reshape((2,) * self.n_qubits)
        self._amps = out.transpose(np.argsort(perm)).reshape(-1).copy()
        return self

    # --- measurement -----------------------------------------------------------

    def project(self, q: int, bit: int) -> float:
        """Collapse qubit q onto `bit`; returns the branch probability."""
        self._check_qubits([q])
        step = 1 << (self.n_qubits - 1 - q)
        v = self._amps.reshape(-1, 2, step)
        branch = v[:, bit, :]
        prob = float(np.vdot(branch, branch).real)
        if prob < _MEASURE_EPS:
            raise DegenerateNorm(f"branch {bit} of qubit {q} has probability {prob}")
        v[:, 1 - bit, :] = 0.0
        self._amps /= math.sqrt(prob)
        return prob

    def measure(self, q: int, rng: CounterRng) -> tuple[int, float]:
        """Born-rule measurement of qubit q; one uniform draw per call.

        Returns (bit, probability of that bit). Outcome 0 is selected when
        the draw falls below p0.
        """
        self._check_qubits([q])
        step = 1 << (self.n_qubits - 1 - q)
        v = self._amps.reshape(-1, 2, step)
        zero_branch = v[:, 0, :]
        p0 = float(np.vdot(zero_branch, zero_branch).real)
        bit = 0 if rng.next_double() < p0 else 1
        prob = self.project(q, bit)
        return bit, prob

    # --- composition --------------------------------------------------------------

    def tensor(self, other: "QuantumState", max_qubits: int = DEFAULT_TENSOR_LIMIT) -> "QuantumState":
        """Kronecker product with self's qubits first (most significant)."""
        n = self.n_qubits + other.n_qubits
        if n > max_qubits:
            raise CapacityExceeded(f"{n} qubits exceeds limit {max_qubits}")
        return QuantumState(n, np.kron(self._amps, other._amps))


def inner_product(a: QuantumState, b: QuantumState) -> complex:
    """<a|b>."""
    if a.n_qubits != b.n_qubits:
        raise DimensionMismatch("states have different qubit counts")
    return complex(np.vdot(a._amps, b._amps))


def equal_up_to_global_phase(a: QuantumState, b: QuantumState, tol: float = ATOL_STATE) -> bool:
    """True iff |<a|b>| >= 1 - tol."""
    return abs(inner_product(a, b)) >= 1.0 - tol


class DensityMatrix:
    """Hermitian, trace-1, positive semidefinite operator on n qubits."""

    __slots__ = ("n_qubits", "matrix")

    def __init__(self, n_qubits: int, matrix: np.ndarray):
        dim = 1 << n_qubits
        matrix = np.asarray(matrix, dtype=np.complex128)
        if matrix.shape != (dim, dim):
            raise DimensionMismatch(f"density matrix shape {matrix.shape} != ({dim}, {dim})")
        self.n_qubits = n_qubits
        self.matrix = matrix

    @classmethod
    def from_pure(cls, state: QuantumState) -> "DensityMatrix":
        amps = state._amps
        return cls(state.n_qubits, np.outer(amps, amps.conj()))

    def validate(self, tol: float = ATOL_STATE) -> None:
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > tol:
            raise ValueError(f"trace is {np.trace(m).real}, not 1")
        if float(np.linalg.eigvalsh(m).min()) < -tol:
            raise ValueError("density matrix has a negative eigenvalue")

    def purity(self) -> float:
        """Tr(rho^2); 1 iff pure, 1/2^n for the maximally mixed state."""
        return float(np.vdot(self.matrix, self.matrix).real)

    def to_json(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "matrix": [[[float(v.real), float(v.imag)] for v in row] for row in self.matrix],
            "ordering": "q0-leftmost",
        }


def partial_trace(source: QuantumState | DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Reduced density matrix over `keep` (result ordered by ascending index)."""
    ks = sorted(set(keep))
    if not ks:
        raise EmptyKeepSet("keep set must be non-empty")
    n = source.n_qubits
    for q in ks:
        if not (0 <= q < n):
            raise IndexOutOfRange(f"qubit {q} out of range for {n} qubits")
    k = len(ks)
    rest = [q for q in range(n) if q not in ks]
    if isinstance(source, QuantumState):
        t = source._amps.reshape((2,) * n)
        m = t.transpose(tuple(ks) + tuple(rest)).reshape(1 << k, -1)
        rho = m @ m.conj().T
    else:
        t = source.matrix.reshape((2,) * (2 * n))
        perm = tuple(ks) + tuple(rest) + tuple(n + q for q in ks) + tuple(n + q for q in rest)
        m = t.transpose(perm).reshape(1 << k, 1 << (n - k), 1 << k, 1 << (n - k))
        rho = np.einsum("irjr->ij", m)
    return DensityMatrix(k, rho)


def purity(rho: DensityMatrix) -> float:
    return rho.purity()


def fidelity(psi: QuantumState, rho: DensityMatrix) -> float:
    """<psi|rho|psi> between a pure reference and a (possibly mixed) state."""
    if psi.n_qubits != rho.n_qubits:
        raise DimensionMismatch("state and density matrix differ in qubit count")
    val = float(np.vdot(psi._amps, rho.matrix @ psi._amps).real)
    return min(max(val, 0.0), 1.0)


def pauli_expectation(state: QuantumState, labels: str) -> float:
    """<psi|P|psi> for a Pauli string such as "XIZ" (qubit 0 first)."""
    from . import gates

    if len(labels) != state.n_qubits:
        raise DimensionMismatch(
            f"Pauli string length {len(labels)} != {state.n_qubits} qubits"
        )
    transformed = state.copy()
    for q, label in enumerate(labels):
        if label == "I":
            continue
        try:
            transformed.apply_1q(gates.PAULI_BY_NAME[label], q)
        except KeyError:
            raise ValueError(f"invalid Pauli label {label!r}") from None
    return float(np.vdot(state._amps, transformed._amps).real)
