"""Growing per-qubit factor chains and global index arithmetic.

Each qubit starts as a single 2-dimensional factor.  Every gate it
participates in extends its newest 2-dim factor in place to a 5-dim factor
(adding the stage-1 pair and an IDLE level) and appends a fresh 3-dim and a
fresh 2-dim factor, so a chain with n participations reads, oldest first,

    5 (x) (3 (x) 5)^(n-1) (x) 3 (x) 2.

Basis code conventions (fixed; all modules use these integer codes):

    dim 2:  0 = |0_0>, 1 = |1_0>
    dim 3:  0 = |0_0>, 1 = |1_0>, 2 = |IDLE>
    dim 5:  0 = |0_0>, 1 = |1_0>, 2 = |0_1>, 3 = |1_1>, 4 = |IDLE>

The global ordering is qubits ascending, factors within a qubit oldest to
newest, with the last factor varying fastest (mixed-radix, row-major).
Extending 2 -> 5 in place keeps codes 0 and 1 meaningful, so operators
defined before an extension embed on the stage-0 block {0, 1} afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .circuit import Circuit

HERMITICITY_TOL = 1e-12

DIM_TWO = 2
DIM_THREE = 3
DIM_FIVE = 5

# Codes within a factor.
BIT0_STAGE0 = 0
BIT1_STAGE0 = 1
BIT0_STAGE1 = 2
BIT1_STAGE1 = 3
IDLE_THREE = 2
IDLE_FIVE = 4
STAGE0_CODES = (0, 1)


class LayoutError(ValueError):
    pass


@dataclass
class Factor:
    dim: int
    qubit: int
    gate_id: int      # 0 for the original qubit factor
    role: str         # "origin" | "history" | "bell" | "live"


@dataclass(frozen=True)
class CellSlots:
    """Global factor indices of one gate's cell, per participating qubit.

    For each participant: live is the fresh 2-dim factor, three the fresh
    3-dim factor, five the extended factor holding that qubit's prior state.
    The live slot may later be extended to dim 5 by a subsequent gate; its
    stage-0 block stays codes {0, 1}.
    """

    gate_id: int
    live: tuple[int, ...]
    three: tuple[int, ...]
    five: tuple[int, ...]


@dataclass
class HilbertLayout:
    factors: list[Factor]
    qubit_slots: list[list[int]]        # per qubit, global factor indices oldest->newest
    cells: dict[int, CellSlots]         # gate_id -> slots
    dims: np.ndarray = field(init=False)
    strides: np.ndarray = field(init=False)

    def __post_init__(self):
        self.dims = np.array([f.dim for f in self.factors], dtype=np.int64)
        strides = np.ones(len(self.factors), dtype=np.int64)
        for i in range(len(self.factors) - 2, -1, -1):
            strides[i] = strides[i + 1] * self.dims[i + 1]
        self.strides = strides

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims)) if len(self.dims) else 1

    @property
    def qubit_count(self) -> int:
        return len(self.qubit_slots)

    def live_slot(self, qubit: int) -> int:
        return self.qubit_slots[qubit][-1]

    def live_slots(self) -> list[int]:
        return [chain[-1] for chain in self.qubit_slots]

    def oldest_slot(self, qubit: int) -> int:
        return self.qubit_slots[qubit][0]

    def global_index(self, codes) -> int:
        codes = np.asarray(codes, dtype=np.int64)
        if codes.shape != self.dims.shape:
            raise LayoutError(f"expected {len(self.dims)} codes, got {codes.shape}")
        if np.any(codes < 0) or np.any(codes >= self.dims):
            raise LayoutError("factor code out of range")
        return int(np.dot(codes, self.strides))

    def codes_of(self, index: int) -> np.ndarray:
        if not 0 <= index < self.dim:
            raise LayoutError(f"index {index} out of range [0, {self.dim})")
        return (index // self.strides) % self.dims

    def tensor_shape(self) -> tuple[int, ...]:
        return tuple(int(d) for d in self.dims)


def layout_for(circuit: Circuit, dim_cap: int = 2**31) -> HilbertLayout:
    """Build the layout for a circuit, chronologically growing each chain."""
    chains: list[list[Factor]] = [
        [Factor(DIM_TWO, q, 0, "origin")] for q in range(circuit.qubit_count)
    ]
    # Cells recorded as (qubit, position-in-chain); resolved to global at the end.
    raw_cells: dict[int, list[tuple[int, int]]] = {}
    dim = 2 ** circuit.qubit_count
    for gate in circuit.gates:
        raw_cells[gate.gate_id] = []
        for q in gate.targets:
            chain = chains[q]
            old_live = chain[-1]
            old_live.dim = DIM_FIVE
            old_live.role = "history"
            chain.append(Factor(DIM_THREE, q, gate.gate_id, "bell"))
            chain.append(Factor(DIM_TWO, q, gate.gate_id, "live"))
            raw_cells[gate.gate_id].append((q, len(chain) - 1))
            dim *= 15
            if dim > dim_cap:
                raise LayoutError(
                    f"dimension {dim} exceeds cap {dim_cap} at gate {gate.gate_id}"
                )
    offsets = np.cumsum([0] + [len(c) for c in chains])
    factors = [f for chain in chains for f in chain]
    qubit_slots = [
        list(range(offsets[q], offsets[q + 1])) for q in range(circuit.qubit_count)
    ]
    cells = {}
    for gate_id, parts in raw_cells.items():
        live = tuple(offsets[q] + pos for q, pos in parts)
        cells[gate_id] = CellSlots(
            gate_id=gate_id,
            live=live,
            three=tuple(i - 1 for i in live),
            five=tuple(i - 2 for i in live),
        )
    return HilbertLayout(factors, qubit_slots, cells)


@dataclass
class GlobalOperator:
    """Sparse Hermitian operator on a layout's full space."""

    matrix: sp.csr_matrix
    layout: HilbertLayout

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def hermiticity_defect(self) -> float:
        d = self.matrix - self.matrix.conjugate().T
        return 0.0 if d.nnz == 0 else float(np.max(np.abs(d.data)))

    def check(self) -> None:
        if self.matrix.shape != (self.layout.dim, self.layout.dim):
            raise LayoutError("operator dimension does not match layout")
        if self.hermiticity_defect() > HERMITICITY_TOL:
            raise LayoutError("operator is not Hermitian within tolerance")

    def __matmul__(self, vec):
        return self.matrix @ vec


def _offsets_for(dims, strides) -> np.ndarray:
    """Mixed-radix enumeration: flat index over `dims` -> global offset."""
    total = int(np.prod(dims)) if len(dims) else 1
    offs = np.zeros(total, dtype=np.int64)
    rep = total
    for d, s in zip(dims, strides):
        rep //= d
        offs += ((np.arange(total) // rep) % d) * s
    return offs


def embed(
    local,
    slots,
    layout: HilbertLayout,
    codes: dict[int, np.ndarray] | None = None,
) -> GlobalOperator:
    """Embed a local operator on the given factor slots, identity elsewhere.

    `local` acts on the tensor product of the slots in the order given
    (first slot most significant).  `codes` optionally maps a slot to the
    global codes its local levels occupy; the default is the full factor.
    A 2-level operator on an extended (dim 5) factor embeds on codes {0, 1}.
    """
    local = sp.coo_matrix(local)
    slots = list(slots)
    if len(set(slots)) != len(slots):
        raise LayoutError(f"duplicate slots {slots}")
    codes = codes or {}
    local_dims = []
    injections = []
    for s in slots:
        if not 0 <= s < len(layout.factors):
            raise LayoutError(f"slot {s} out of range")
        inj = np.asarray(
            codes.get(s, np.arange(layout.dims[s])), dtype=np.int64
        )
        if np.any(inj < 0) or np.any(inj >= layout.dims[s]):
            raise LayoutError(f"codes for slot {s} out of range")
        local_dims.append(len(inj))
        injections.append(inj)
    d_local = int(np.prod(local_dims))
    if local.shape != (d_local, d_local):
        raise LayoutError(
            f"local operator shape {local.shape} != slot dimension {d_local}"
        )

    # Offset of each local level combination within the global index.
    slot_offsets = np.zeros(d_local, dtype=np.int64)
    rep = d_local
    for d, inj, s in zip(local_dims, injections, slots):
        rep //= d
        lvl = (np.arange(d_local) // rep) % d
        slot_offsets += inj[lvl] * layout.strides[s]

    rest = [i for i in range(len(layout.factors)) if i not in slots]
    rest_offsets = _offsets_for(layout.dims[rest], layout.strides[rest])

    rows = (slot_offsets[local.row][:, None] + rest_offsets[None, :]).ravel()
    cols = (slot_offsets[local.col][:, None] + rest_offsets[None, :]).ravel()
    data = np.broadcast_to(local.data[:, None], (local.nnz, len(rest_offsets))).ravel()
    mat = sp.coo_matrix((data, (rows, cols)), shape=(layout.dim, layout.dim))
    out = GlobalOperator(mat.tocsr(), layout)
    out.matrix.sum_duplicates()
    out.matrix.sort_indices()
    return out


def identity_operator(layout: HilbertLayout) -> GlobalOperator:
    return GlobalOperator(sp.identity(layout.dim, dtype=complex, format="csr"), layout)


def operator_sum(terms) -> GlobalOperator:
    terms = list(terms)
    if not terms:
        raise LayoutError("cannot sum zero operators")
    acc = terms[0].matrix.copy()
    for t in terms[1:]:
        acc = acc + t.matrix
    acc.sum_duplicates()
    acc.sort_indices()
    return GlobalOperator(acc.tocsr(), terms[0].layout)
