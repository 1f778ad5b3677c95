"""Elaborated circuit representation.

After elaboration only five instruction kinds remain: "u" (one-qubit
U(theta,phi,lambda)), "cx", "measure", "reset", and "barrier". A
conditional statement is encoded as a `condition` field on the primitive it
guards; this is equivalent to a wrapper node because none of the primitives
a single `if` expands to can rewrite the register being tested.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .tokens import Span

GATE_KINDS = ("u", "cx")
KINDS = ("u", "cx", "measure", "reset", "barrier")

DIRECTIVE_KINDS = (
    "break",
    "assert-classical",
    "assert-superposition",
    "assert-entangled",
    "assert-separable",
    "assert-distribution",
)


@dataclass(frozen=True)
class Instruction:
    kind: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    clbit: int | None = None
    condition: tuple[str, int] | None = None

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind, "qubits": list(self.qubits)}
        if self.kind == "u":
            out["params"] = list(self.params)
        if self.kind == "measure":
            out["clbit"] = self.clbit
        if self.condition is not None:
            out["condition"] = {"creg": self.condition[0], "value": self.condition[1]}
        return out


@dataclass(frozen=True)
class Directive:
    """Debug directive extracted from a `// @qdb ...` comment.

    `anchor` is the instruction index the directive precedes; an anchor equal
    to the instruction count means "after the last instruction".
    """

    kind: str
    anchor: int
    span: Span
    qubits: tuple[int, ...] = ()
    register: str | None = None
    expected_bits: str | None = None
    distribution: dict[str, float] | None = None
    tolerance: float | None = None
    text: str = ""

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind, "anchor": self.anchor, "text": self.text}
        if self.qubits:
            out["qubits"] = list(self.qubits)
        if self.register is not None:
            out["register"] = self.register
        if self.expected_bits is not None:
            out["expected_bits"] = self.expected_bits
        if self.distribution is not None:
            out["distribution"] = dict(self.distribution)
        if self.tolerance is not None:
            out["tolerance"] = self.tolerance
        return out


@dataclass(frozen=True)
class SourceRef:
    """Maps an instruction back to the top-level statement that produced it."""

    span: Span
    text: str


@dataclass
class CircuitIR:
    n_qubits: int
    n_clbits: int
    qregs: dict[str, tuple[int, int]]  # name -> (offset, size)
    cregs: dict[str, tuple[int, int]]
    instructions: list[Instruction] = field(default_factory=list)
    directives: dict[int, list[Directive]] = field(default_factory=dict)
    source_map: list[SourceRef] = field(default_factory=list)

    def has_measurement(self) -> bool:
        return any(i.kind in ("measure", "reset") for i in self.instructions)

    def has_nonunitary(self) -> bool:
        return any(
            i.kind in ("measure", "reset") or i.condition is not None for i in self.instructions
        )

    def qubit_name(self, q: int) -> str:
        for name, (offset, size) in self.qregs.items():
            if offset <= q < offset + size:
                return f"{name}[{q - offset}]"
        return f"q{q}"

    def prefix(self, upto: int) -> "CircuitIR":
        """IR containing instructions [0, upto); directives are not carried."""
        return CircuitIR(
            self.n_qubits,
            self.n_clbits,
            dict(self.qregs),
            dict(self.cregs),
            list(self.instructions[:upto]),
            {},
            list(self.source_map[:upto]),
        )

    def all_directives(self) -> list[Directive]:
        out: list[Directive] = []
        for anchor in sorted(self.directives):
            out.extend(self.directives[anchor])
        return out

    def to_json(self) -> dict:
        instructions = []
        for ins, ref in zip(self.instructions, self.source_map):
            entry = ins.to_json()
            entry["span"] = ref.span.to_json()
            entry["source"] = ref.text
            instructions.append(entry)
        return {
            "n_qubits": self.n_qubits,
            "n_clbits": self.n_clbits,
            "qregs": {k: {"offset": v[0], "size": v[1]} for k, v in self.qregs.items()},
            "cregs": {k: {"offset": v[0], "size": v[1]} for k, v in self.cregs.items()},
            "instructions": instructions,
            "directives": [d.to_json() for d in self.all_directives()],
        }
