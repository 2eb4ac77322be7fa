"""CNOT+T circuits: parsing, phase-polynomial extraction, resynthesis.

The diagonal phase of a CNOT+T-family circuit is a multilinear polynomial
mod 8 over the input bits; its odd part is the signature tensor.  Extraction
is done by exact simulation over all 2^N inputs (canonical path) with a
fast streaming sum-of-cubes path cross-checked against it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateOperand,
    MissingHeader,
    QubitOutOfRange,
    SingularMatrix,
    UnknownGate,
    ZeroFactor,
)
from .gf2 import (
    MAX_QUBITS,
    xor_cube_inplace,
    BitVec,
    MultilinearPoly8,
    SymmetricTensor,
    mobius_from_truth_table,
    tensor_from_poly,
)

# kind -> (arity, phase increment per activated parity, mod 8)
GATE_KINDS = {
    "CNOT": (2, None),
    "T": (1, 1),
    "TDG": (1, 7),
    "S": (1, 2),
    "SDG": (1, 6),
    "Z": (1, 4),
    "CZ": (2, 4),
    "CCZ": (3, 4),
    "X": (1, None),
}


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise UnknownGate(f"unsupported gate {self.kind!r}")
        arity = GATE_KINDS[self.kind][0]
        if len(self.qubits) != arity:
            raise ValueError(f"{self.kind} takes {arity} qubits, got {len(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise DuplicateOperand(f"{self.kind} {self.qubits}: repeated qubit")


@dataclass
class Circuit:
    n_qubits: int
    gates: list

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise DimensionMismatch(f"n_qubits={self.n_qubits} outside [1, {MAX_QUBITS}]")
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.n_qubits:
                    raise QubitOutOfRange(f"{g.kind} {g.qubits}: qubit {q} >= {self.n_qubits}")

    def count_kind(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)


@dataclass
class PhasePoly:
    """Linear reversible part + affine offsets + diagonal phase mod 8."""

    linear_part: np.ndarray  # (n, n) uint8; row i = parity of wire i in input bits
    offset: BitVec
    phase: MultilinearPoly8

    @property
    def n(self) -> int:
        return self.phase.n


def parse_circuit(text: str) -> Circuit:
    n_qubits = None
    gates = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n_qubits is None:
            if parts[0].lower() != "qubits" or len(parts) != 2:
                raise MissingHeader(f"line {lineno}: expected 'qubits N' header")
            n_qubits = int(parts[1])
            continue
        kind = parts[0].upper()
        if kind not in GATE_KINDS:
            raise UnknownGate(f"line {lineno}: unsupported gate {parts[0]!r}")
        try:
            qubits = tuple(int(p) for p in parts[1:])
        except ValueError as exc:
            raise QubitOutOfRange(f"line {lineno}: bad operand in {line!r}") from exc
        arity = GATE_KINDS[kind][0]
        if len(qubits) != arity:
            raise QubitOutOfRange(f"line {lineno}: {kind} takes {arity} operands")
        if len(set(qubits)) != len(qubits):
            raise DuplicateOperand(f"line {lineno}: repeated operand in {line!r}")
        for q in qubits:
            if q < 0 or (n_qubits is not None and q >= n_qubits):
                raise QubitOutOfRange(f"line {lineno}: qubit {q} out of range")
        gates.append(Gate(kind, qubits))
    if n_qubits is None:
        raise MissingHeader("missing 'qubits N' header")
    return Circuit(n_qubits, gates)


def serialize_circuit(c: Circuit) -> str:
    lines = [f"qubits {c.n_qubits}"]
    for g in c.gates:
        lines.append(" ".join([g.kind] + [str(q) for q in g.qubits]))
    return "\n".join(lines) + "\n"


def phase_polynomial(c: Circuit) -> PhasePoly:
    """Exact 2^N-input simulation of the diagonal phase."""
    n = c.n_qubits
    size = 1 << n
    # wire value arrays over all inputs, plus symbolic (row, offset) tracking
    x = ((np.arange(size)[:, None] >> np.arange(n)[None, :]) & 1).astype(np.uint8)
    wires = [x[:, i].copy() for i in range(n)]
    rows = np.eye(n, dtype=np.uint8)
    offset = 0
    phase = np.zeros(size, dtype=np.int64)
    for g in c.gates:
        inc = GATE_KINDS[g.kind][1]
        if g.kind == "CNOT":
            ctrl, tgt = g.qubits
            wires[tgt] ^= wires[ctrl]
            rows[tgt] ^= rows[ctrl]
        elif g.kind == "X":
            (q,) = g.qubits
            wires[q] ^= 1
            offset ^= 1 << q
        else:
            active = wires[g.qubits[0]].astype(np.int64)
            for q in g.qubits[1:]:
                active = active * wires[q]
            phase += inc * active
    poly = mobius_from_truth_table(phase % 8)
    return PhasePoly(rows, BitVec(n, offset), poly)


def signature_tensor(c: Circuit) -> SymmetricTensor:
    """Signature tensor via the canonical truth-table path."""
    return tensor_from_poly(phase_polynomial(c).phase)


def streaming_signature_tensor(c: Circuit) -> SymmetricTensor:
    """Fast path: XOR cubes of T/Tdg parities (odd multiplicity) and CCZ orbits.

    S/Sdg/Z/CZ and affine offsets provably never touch the tensor.
    """
    n = c.n_qubits
    rows = [1 << i for i in range(n)]
    t = SymmetricTensor(n)
    counts: dict = {}
    for g in c.gates:
        if g.kind == "CNOT":
            ctrl, tgt = g.qubits
            rows[tgt] ^= rows[ctrl]
        elif g.kind in ("T", "TDG"):
            (q,) = g.qubits
            counts[rows[q]] = counts.get(rows[q], 0) + 1
        elif g.kind == "CCZ":
            a, b, cc = (rows[q] for q in g.qubits)
            for combo in (a, b, a ^ b, cc, a ^ cc, b ^ cc, a ^ b ^ cc):
                if combo:
                    counts[combo] = counts.get(combo, 0) + 1
    odd = [BitVec(n, bits) for bits, cnt in counts.items() if cnt % 2 and bits]
    for u in odd:
        xor_cube_inplace(t, u)
    return t


def circuit_from_factors(factors, n: int) -> Circuit:
    """CNOT-ladder + T realization of a sum-of-cubes factor list.

    Each factor's parity is computed onto its lowest set bit, T applied,
    and the ladder undone; the result has identity linear part.
    """
    gates = []
    for u in factors:
        if u.is_zero:
            raise ZeroFactor("cannot synthesize a zero factor")
        if u.n != n:
            raise DimensionMismatch(f"factor width {u.n} != {n}")
        support = u.support()
        pivot = support[0]
        ladder = [Gate("CNOT", (q, pivot)) for q in support[1:]]
        gates.extend(ladder)
        gates.append(Gate("T", (pivot,)))
        gates.extend(reversed(ladder))
    return Circuit(n, gates)


def synthesize_linear(a: np.ndarray) -> Circuit:
    """CNOT-only circuit whose linear part equals the given invertible matrix."""
    a = np.asarray(a, dtype=np.uint8) & 1
    n = a.shape[0]
    if a.shape != (n, n):
        raise DimensionMismatch(f"matrix shape {a.shape} not square")
    work = a.copy()
    ops = []  # elimination ops as (ctrl, tgt): row tgt ^= row ctrl
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if work[r, col]:
                pivot = r
                break
        if pivot is None:
            raise SingularMatrix(f"no pivot in column {col}")
        if pivot != col:
            # row swap = 3 XOR row ops
            for ctrl, tgt in ((pivot, col), (col, pivot), (pivot, col)):
                work[tgt] ^= work[ctrl]
                ops.append((ctrl, tgt))
        for r in range(n):
            if r != col and work[r, col]:
                work[r] ^= work[col]
                ops.append((col, r))
    # ops reduce A to I from the left; the gate sequence is their reverse.
    gates = [Gate("CNOT", (ctrl, tgt)) for ctrl, tgt in reversed(ops)]
    return Circuit(n, gates)


def clifford_equivalent(p: PhasePoly, q: PhasePoly) -> bool:
    """True iff the two phase functions differ only by Clifford content."""
    if p.n != q.n:
        raise DimensionMismatch(f"{p.n} != {q.n}")
    if not np.array_equal(p.linear_part & 1, q.linear_part & 1):
        return False
    if p.offset != q.offset:
        return False
    masks = set(p.phase.coeffs) | set(q.phase.coeffs)
    for mask in masks:
        if mask == 0:
            continue  # global phase
        d = (p.phase.coeffs.get(mask, 0) - q.phase.coeffs.get(mask, 0)) % 8
        deg = bin(mask).count("1")
        if deg == 1:
            if d % 2:
                return False
        elif deg == 2:
            if d % 4:
                return False
        else:
            if d % 8:
                return False
    return True


def gf2_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a.astype(np.uint8) @ b.astype(np.uint8)) & 1


def gf2_inverse(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.uint8) & 1
    n = a.shape[0]
    work = np.concatenate([a.copy(), np.eye(n, dtype=np.uint8)], axis=1)
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if work[r, col]:
                pivot = r
                break
        if pivot is None:
            raise SingularMatrix(f"no pivot in column {col}")
        if pivot != col:
            work[[col, pivot]] = work[[pivot, col]]
        for r in range(n):
            if r != col and work[r, col]:
                work[r] ^= work[col]
    return work[:, n:].copy()
