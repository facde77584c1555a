"""Gate-level circuit input: parsing, validation, serialization, locations.

A circuit is an ordered list of one-qubit and adjacent two-qubit unitary
gates on Q qubit lines.  Two-qubit matrices are written in the basis
|00>, |01>, |10>, |11> with the lower qubit index as the most significant
bit.  Gates are numbered 1..G in chronological order; the Q initialization
steps occupy pseudo-locations -Q+1..0 so that every step of a run (including
state preparation) has a unique integer address.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

UNITARITY_TOL = 1e-12


class CircuitError(ValueError):
    """Malformed or invalid circuit input."""


@dataclass(frozen=True, eq=False)
class GateSpec:
    gate_id: int                 # 1..G, chronological
    kind: str                    # "one" | "two"
    targets: tuple[int, ...]     # (q,) or adjacent (q, q+1)
    unitary: np.ndarray          # 2x2 or 4x4 complex, row-major
    label: str = ""

    def __post_init__(self):
        u = np.asarray(self.unitary, dtype=complex)
        object.__setattr__(self, "unitary", u)

    @property
    def arity(self) -> int:
        return 1 if self.kind == "one" else 2

    def __eq__(self, other):
        if not isinstance(other, GateSpec):
            return NotImplemented
        return (
            self.gate_id == other.gate_id
            and self.kind == other.kind
            and self.targets == other.targets
            and self.label == other.label
            and self.unitary.shape == other.unitary.shape
            and np.array_equal(self.unitary, other.unitary)
        )


@dataclass(frozen=True, eq=False)
class Circuit:
    qubit_count: int
    gates: tuple[GateSpec, ...]
    name: str = ""

    @property
    def g1(self) -> int:
        return sum(1 for g in self.gates if g.kind == "one")

    @property
    def g2(self) -> int:
        return sum(1 for g in self.gates if g.kind == "two")

    @property
    def gate_count(self) -> int:
        return len(self.gates)

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (
            self.qubit_count == other.qubit_count
            and self.name == other.name
            and self.gates == other.gates
        )


@dataclass(frozen=True)
class Location:
    """One addressable step: initialization (index <= 0) or gate (index >= 1)."""

    index: int
    kind: str                  # "init" | "one" | "two"
    targets: tuple[int, ...]


def validate_gate(gate: GateSpec, qubit_count: int) -> None:
    u = gate.unitary
    dim = 2 if gate.kind == "one" else 4
    if gate.kind not in ("one", "two"):
        raise CircuitError(f"gate {gate.gate_id}: unknown kind {gate.kind!r}")
    if u.shape != (dim, dim):
        raise CircuitError(
            f"gate {gate.gate_id}: matrix shape {u.shape} != ({dim}, {dim})"
        )
    dev = np.max(np.abs(u.conj().T @ u - np.eye(dim)))
    if dev > UNITARITY_TOL:
        raise CircuitError(
            f"gate {gate.gate_id}: non-unitary matrix (max deviation {dev:.3e})"
        )
    for q in gate.targets:
        if not 0 <= q < qubit_count:
            raise CircuitError(
                f"gate {gate.gate_id}: target {q} out of range [0, {qubit_count})"
            )
    if gate.kind == "one" and len(gate.targets) != 1:
        raise CircuitError(f"gate {gate.gate_id}: one-qubit gate needs 1 target")
    if gate.kind == "two":
        if len(gate.targets) != 2 or gate.targets[1] != gate.targets[0] + 1:
            raise CircuitError(
                f"gate {gate.gate_id}: two-qubit targets must be adjacent (q, q+1), "
                f"got {gate.targets}"
            )


def validate_circuit(circuit: Circuit) -> None:
    if circuit.qubit_count <= 0:
        raise CircuitError(f"qubit count must be positive, got {circuit.qubit_count}")
    for i, gate in enumerate(circuit.gates, start=1):
        if gate.gate_id != i:
            raise CircuitError(f"gate ids must be 1..G in order; gate {i} has id {gate.gate_id}")
        validate_gate(gate, circuit.qubit_count)


def _matrix_from_json(entries, dim: int, gate_no: int) -> np.ndarray:
    u = np.zeros((dim, dim), dtype=complex)
    if not isinstance(entries, list) or len(entries) != dim:
        raise CircuitError(f"gate {gate_no}: 'u' must be a {dim}x{dim} matrix of [re, im] pairs")
    for r, row in enumerate(entries):
        if not isinstance(row, list) or len(row) != dim:
            raise CircuitError(f"gate {gate_no}: row {r} of 'u' must have {dim} entries")
        for c, pair in enumerate(row):
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not all(isinstance(x, (int, float)) for x in pair)
            ):
                raise CircuitError(
                    f"gate {gate_no}: entry ({r}, {c}) must be a [re, im] pair"
                )
            u[r, c] = complex(pair[0], pair[1])
    return u


def parse_circuit(text: str) -> Circuit:
    """Parse circuit-file content (JSON) into a validated Circuit."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitError(
            f"syntax error: {exc.msg} (line {exc.lineno}, column {exc.colno})"
        ) from exc
    if not isinstance(doc, dict):
        raise CircuitError("top level must be an object")
    if "qubits" not in doc:
        raise CircuitError("missing 'qubits'")
    qubits = doc["qubits"]
    if not isinstance(qubits, int) or qubits <= 0:
        raise CircuitError(f"'qubits' must be a positive integer, got {qubits!r}")
    raw_gates = doc.get("gates", [])
    if not isinstance(raw_gates, list):
        raise CircuitError("'gates' must be a list")
    gates = []
    for i, item in enumerate(raw_gates, start=1):
        if not isinstance(item, dict):
            raise CircuitError(f"gate {i}: must be an object")
        kind = item.get("kind")
        if kind not in ("one", "two"):
            raise CircuitError(f"gate {i}: 'kind' must be 'one' or 'two', got {kind!r}")
        q = item.get("q")
        if not isinstance(q, int):
            raise CircuitError(f"gate {i}: 'q' must be an integer")
        dim = 2 if kind == "one" else 4
        u = _matrix_from_json(item.get("u"), dim, i)
        targets = (q,) if kind == "one" else (q, q + 1)
        gates.append(GateSpec(i, kind, targets, u, label=str(item.get("label", ""))))
    circuit = Circuit(qubits, tuple(gates), name=str(doc.get("name", "")))
    validate_circuit(circuit)
    return circuit


def serialize_circuit(circuit: Circuit) -> str:
    """Canonical JSON text; parse(serialize(c)) == c with bit-identical matrices."""
    gates = []
    for g in circuit.gates:
        u = [
            [[float(v.real), float(v.imag)] for v in row]
            for row in np.asarray(g.unitary)
        ]
        entry = {"kind": g.kind, "q": g.targets[0], "u": u}
        if g.label:
            entry["label"] = g.label
        gates.append(entry)
    doc: dict = {"qubits": circuit.qubit_count, "gates": gates}
    if circuit.name:
        doc["name"] = circuit.name
    return json.dumps(doc, indent=1)


def circuit_locations(circuit: Circuit) -> list[Location]:
    """All locations in order: inits at -Q+1..0 (qubit 0 first), gates at 1..G."""
    q_count = circuit.qubit_count
    locs = [
        Location(index=-q_count + 1 + q, kind="init", targets=(q,))
        for q in range(q_count)
    ]
    locs.extend(
        Location(index=g.gate_id, kind=g.kind, targets=g.targets)
        for g in circuit.gates
    )
    return locs


# Common gate matrices used in tests, demos, and lattice presets.
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
T_GATE = np.diag([1.0, np.exp(1j * np.pi / 4)]).astype(complex)
CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def one_qubit_gate(gate_id: int, q: int, u: np.ndarray, label: str = "") -> GateSpec:
    return GateSpec(gate_id, "one", (q,), np.asarray(u, dtype=complex), label)


def two_qubit_gate(gate_id: int, q: int, u: np.ndarray, label: str = "") -> GateSpec:
    return GateSpec(gate_id, "two", (q, q + 1), np.asarray(u, dtype=complex), label)
