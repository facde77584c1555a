"""Lower a circuit to its frustration-free history-state Hamiltonian.

Every location contributes one positive semi-definite term:

  * initialization of qubit q penalizes the original |1_0> level,
  * a one-qubit gate cell (2 x 3 x 5) carries a motion penalty tying
    stage 0 to stage 1 through the gate unitary, a pair-creation penalty
    selecting the (|00> + |11>)/sqrt(2) entangled pair on the fresh
    (2, 3) factors, and a theta-weighted projection penalty that forces
    the consumed registers into |IDLE> (x) |IDLE> in tandem,
  * a two-qubit gate cell (2 x 3 x 5)^2 carries the joint motion penalty
    (both qubits cross the gate together, lone crossings are penalized)
    plus per-qubit pair-creation and projection penalties.

The energy unit epsilon is fixed to 1; all outputs are in units of it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .circuit import Circuit, circuit_locations, Location
from .layout import (
    BIT1_STAGE0,
    DIM_FIVE,
    GlobalOperator,
    HilbertLayout,
    IDLE_FIVE,
    IDLE_THREE,
    STAGE0_CODES,
    embed,
    layout_for,
    operator_sum,
)

EPSILON = 1.0
PSD_TOL = 1e-10
THETA_RANGE = (0.0, np.pi / 2)


class HamiltonianError(ValueError):
    pass


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not THETA_RANGE[0] <= theta <= THETA_RANGE[1]:
        raise HamiltonianError(f"theta {theta} outside [0, pi/2]")
    return theta


def stage_operator(u: np.ndarray) -> np.ndarray:
    """The gate unitary acting within each stage block of a 5-level factor."""
    out = np.zeros((DIM_FIVE, DIM_FIVE), dtype=complex)
    out[0:2, 0:2] = u
    out[2:4, 2:4] = u
    return out


def h_motion_one(u: np.ndarray) -> np.ndarray:
    """5x5 penalty: (|b_0> - U|b_1>) dyads summed over b, weight eps/2."""
    h = np.zeros((DIM_FIVE, DIM_FIVE), dtype=complex)
    for b in range(2):
        v = np.zeros(DIM_FIVE, dtype=complex)
        v[b] = 1.0
        v[2:4] -= u[:, b]
        h += 0.5 * EPSILON * np.outer(v, v.conj())
    return h


def h_create_pair() -> np.ndarray:
    """6x6 on (live 2) (x) (three 3): penalize all but (|00> + |11>)/sqrt(2).

    Only the {0_0, 1_0} levels of the 3-dim factor are penalized; the IDLE
    level stays free for the post-teleportation branch.
    """
    h = np.zeros((6, 6), dtype=complex)
    vecs = []
    for signs, pair in (
        ((1, -1), ((1, 0), (0, 1))),   # |1 0> - |0 1>
        ((1, 1), ((1, 0), (0, 1))),    # |1 0> + |0 1>
        ((1, -1), ((0, 0), (1, 1))),   # |0 0> - |1 1>
    ):
        v = np.zeros(6, dtype=complex)
        for s, (a, b) in zip(signs, pair):
            v[a * 3 + b] = s
        vecs.append(v)
    for v in vecs:
        h += 0.5 * EPSILON * np.outer(v, v.conj())
    return h


def h_bell_projection(theta: float) -> np.ndarray:
    """15x15 on (three 3) (x) (five 5): tandem consumption of the registers.

    Diagonal penalties forbid one register idling while the other still
    holds state; the rank-1 piece rotates between the stage-1 entangled
    pair (weight sin theta) and the double-IDLE state (weight cos theta).
    """
    theta = _check_theta(theta)
    h = np.zeros((15, 15), dtype=complex)
    for f in range(4):  # IDLE three against any stage level of the five
        i = IDLE_THREE * 5 + f
        h[i, i] += EPSILON
    for t in STAGE0_CODES:  # live three against IDLE five
        i = t * 5 + IDLE_FIVE
        h[i, i] += EPSILON
    v = np.zeros(15, dtype=complex)
    s = np.sin(theta) / np.sqrt(2.0)
    v[0 * 5 + 2] = s          # |0_0>|0_1>
    v[1 * 5 + 3] = s          # |1_0>|1_1>
    v[IDLE_THREE * 5 + IDLE_FIVE] = -np.cos(theta)
    h += EPSILON * np.outer(v, v.conj())
    return h


def _local_embed(op: np.ndarray, positions, dims) -> np.ndarray:
    """Embed `op` (acting on the listed tensor positions) into prod(dims)."""
    n = len(dims)
    full = int(np.prod(dims))
    rest = [i for i in range(n) if i not in positions]
    perm = list(positions) + rest
    d_op = int(np.prod([dims[i] for i in positions]))
    d_rest = full // d_op
    big = np.kron(op, np.eye(d_rest))
    t = big.reshape([dims[i] for i in perm] * 2)
    inv = np.argsort(perm)
    t = t.transpose(list(inv) + [n + i for i in inv])
    return t.reshape(full, full)


def h_gate_one(u: np.ndarray, theta: float) -> np.ndarray:
    """30x30 one-qubit gate cell block on factors (2, 3, 5)."""
    theta = _check_theta(theta)
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise HamiltonianError("one-qubit gate needs a 2x2 unitary")
    dims = (2, 3, 5)
    h = _local_embed(h_motion_one(u), (2,), dims)
    h += _local_embed(h_create_pair(), (0, 1), dims)
    h += _local_embed(h_bell_projection(theta), (1, 2), dims)
    return h


def h_motion_two(u: np.ndarray) -> np.ndarray:
    """25x25 joint motion penalty on the two 5-level history factors.

    Dyad part: (|b_0 B_0> - U|b_1 B_1>) summed over inputs, weight eps/2.
    Penalty part: either qubit at stage 1 (or idled) while the other still
    sits at stage 0, summed over the spectator's levels.
    """
    h = np.zeros((25, 25), dtype=complex)
    for b in range(2):
        for bb in range(2):
            v = np.zeros(25, dtype=complex)
            v[b * 5 + bb] = 1.0
            col = u[:, b * 2 + bb]
            for a in range(2):
                for aa in range(2):
                    v[(2 + a) * 5 + (2 + aa)] -= col[a * 2 + aa]
            h += 0.5 * EPSILON * np.outer(v, v.conj())
    p0 = np.zeros((5, 5))
    p0[0, 0] = p0[1, 1] = 1.0
    p1 = np.zeros((5, 5))
    p1[2, 2] = p1[3, 3] = 1.0
    pidle = np.zeros((5, 5))
    pidle[4, 4] = 1.0
    # Sum over (b, B) doubles the spectator-independent IDLE dyads.
    h += EPSILON * np.kron(p0, p1 + 2.0 * pidle)
    h += EPSILON * np.kron(p1 + 2.0 * pidle, p0)
    return h


def h_gate_two(u: np.ndarray, theta: float) -> np.ndarray:
    """900x900 two-qubit gate cell block on factors (2, 3, 5, 2, 3, 5)."""
    theta = _check_theta(theta)
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise HamiltonianError("two-qubit gate needs a 4x4 unitary")
    dims = (2, 3, 5, 2, 3, 5)
    h = _local_embed(h_motion_two(u), (2, 5), dims)
    h += _local_embed(h_create_pair(), (0, 1), dims)
    h += _local_embed(h_create_pair(), (3, 4), dims)
    h += _local_embed(h_bell_projection(theta), (1, 2), dims)
    h += _local_embed(h_bell_projection(theta), (4, 5), dims)
    return h


def h_cz_literal(theta: float) -> np.ndarray:
    """Controlled-phase cell block written out term by term.

    Independent spelling of the generic two-qubit template specialized to
    the controlled-phase gate: stage-0 and stage-1 diagonal dyads with
    (-1)^{bB}-signed off-diagonal stage transfer at weight eps/2, plus the
    lone-crossing penalties.  Used as a cross-check oracle in tests.
    """
    theta = _check_theta(theta)
    m = np.zeros((25, 25), dtype=complex)
    for b in range(2):
        for bb in range(2):
            sign = -1.0 if b == 1 and bb == 1 else 1.0
            i0 = b * 5 + bb
            i1 = (2 + b) * 5 + (2 + bb)
            m[i0, i0] += 0.5 * EPSILON
            m[i1, i1] += 0.5 * EPSILON
            m[i1, i0] -= 0.5 * EPSILON * sign
            m[i0, i1] -= 0.5 * EPSILON * sign
    p0 = np.zeros((5, 5))
    p0[0, 0] = p0[1, 1] = 1.0
    p1 = np.zeros((5, 5))
    p1[2, 2] = p1[3, 3] = 1.0
    pidle = np.zeros((5, 5))
    pidle[4, 4] = 1.0
    m += EPSILON * np.kron(p0, p1 + 2.0 * pidle)
    m += EPSILON * np.kron(p1 + 2.0 * pidle, p0)
    dims = (2, 3, 5, 2, 3, 5)
    h = _local_embed(m, (2, 5), dims)
    h += _local_embed(h_create_pair(), (0, 1), dims)
    h += _local_embed(h_create_pair(), (3, 4), dims)
    h += _local_embed(h_bell_projection(theta), (1, 2), dims)
    h += _local_embed(h_bell_projection(theta), (4, 5), dims)
    return h


@dataclass
class HamiltonianTerms:
    """One global term per location, plus the local blocks they came from."""

    theta: float
    epsilon: float
    terms: list[tuple[Location, GlobalOperator]]
    local_blocks: dict[int, np.ndarray]

    def term_at(self, index: int) -> GlobalOperator:
        for loc, op in self.terms:
            if loc.index == index:
                return op
        raise KeyError(f"no term at location {index}")


def _init_term(layout: HilbertLayout, qubit: int) -> GlobalOperator:
    slot = layout.oldest_slot(qubit)
    local = np.diag([0.0, EPSILON]).astype(complex)
    codes = {slot: np.array(STAGE0_CODES)} if layout.dims[slot] == DIM_FIVE else None
    return embed(local, [slot], layout, codes=codes)


def h_initialize(layout: HilbertLayout) -> list[GlobalOperator]:
    """Per-qubit penalty on the original |1_0> level (stage-0 bit 1)."""
    return [_init_term(layout, q) for q in range(layout.qubit_count)]


def _gate_term(
    layout: HilbertLayout, gate_id: int, block: np.ndarray
) -> GlobalOperator:
    cell = layout.cells[gate_id]
    slots = []
    codes = {}
    for live, three, five in zip(cell.live, cell.three, cell.five):
        slots.extend([live, three, five])
        if layout.dims[live] == DIM_FIVE:  # extended by a later gate
            codes[live] = np.array(STAGE0_CODES)
    return embed(block, slots, layout, codes=codes or None)


def build_terms(
    circuit: Circuit,
    theta: float,
    layout: HilbertLayout | None = None,
    validate: bool = True,
) -> HamiltonianTerms:
    theta = _check_theta(theta)
    layout = layout or layout_for(circuit)
    blocks: dict[int, np.ndarray] = {}
    for gate in circuit.gates:
        if gate.kind == "one":
            blocks[gate.gate_id] = h_gate_one(gate.unitary, theta)
        else:
            blocks[gate.gate_id] = h_gate_two(gate.unitary, theta)
    if validate:
        for gate_id, block in blocks.items():
            low = float(np.linalg.eigvalsh(block)[0])
            if low < -PSD_TOL * EPSILON:
                raise HamiltonianError(
                    f"gate {gate_id} block not PSD (lowest eigenvalue {low:.3e})"
                )
    terms: list[tuple[Location, GlobalOperator]] = []
    init_ops = h_initialize(layout)
    for loc in circuit_locations(circuit):
        if loc.kind == "init":
            terms.append((loc, init_ops[loc.targets[0]]))
        else:
            terms.append((loc, _gate_term(layout, loc.index, blocks[loc.index])))
    return HamiltonianTerms(theta, EPSILON, terms, blocks)


def assemble(
    circuit: Circuit,
    theta: float,
    layout: HilbertLayout | None = None,
    dim_cap: int = 2**31,
) -> tuple[GlobalOperator, HamiltonianTerms]:
    """Full Hamiltonian (ordered sum over locations) plus its terms."""
    layout = layout or layout_for(circuit, dim_cap=dim_cap)
    terms = build_terms(circuit, theta, layout)
    total = operator_sum([op for _, op in terms.terms])
    return total, terms
