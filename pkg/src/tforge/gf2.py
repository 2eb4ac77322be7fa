"""GF(2) bit vectors, symmetric rank-3 tensors, and mod-8 multilinear polynomials.

Qubit i is bit i (LSB) of an integer bitmask throughout.  Tensors are stored
dense as uint8 numpy arrays with symmetry enforced on every write; qubit
counts are capped at 16 because verification enumerates all 2^N inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadLength,
    DegreeTooHigh,
    DimensionMismatch,
    NonCliffordResidue,
    ZeroFactor,
)

MAX_QUBITS = 16
TENSOR_MAGIC = b"SIGT0001"


@dataclass(frozen=True)
class BitVec:
    """Fixed-width bit vector over GF(2); one T-gate parity / one game move."""

    n: int
    bits: int

    def __post_init__(self):
        if not 1 <= self.n <= MAX_QUBITS:
            raise DimensionMismatch(f"n={self.n} outside [1, {MAX_QUBITS}]")
        if not 0 <= self.bits < (1 << self.n):
            raise ValueError(f"bits 0x{self.bits:x} wider than n={self.n}")

    def __xor__(self, other: "BitVec") -> "BitVec":
        if self.n != other.n:
            raise DimensionMismatch(f"{self.n} != {other.n}")
        return BitVec(self.n, self.bits ^ other.bits)

    def bit(self, i: int) -> int:
        return (self.bits >> i) & 1

    @property
    def is_zero(self) -> bool:
        return self.bits == 0

    def weight(self) -> int:
        return bin(self.bits).count("1")

    def support(self) -> list:
        return [i for i in range(self.n) if self.bit(i)]

    def to_array(self) -> np.ndarray:
        return np.array([self.bit(i) for i in range(self.n)], dtype=np.uint8)

    def to01(self) -> str:
        """0/1 string, leftmost character = qubit 0."""
        return "".join(str(self.bit(i)) for i in range(self.n))

    @classmethod
    def from01(cls, s: str) -> "BitVec":
        bits = 0
        for i, ch in enumerate(s):
            if ch not in "01":
                raise ValueError(f"bad bit character {ch!r}")
            bits |= int(ch) << i
        return cls(len(s), bits)

    @classmethod
    def unit(cls, n: int, i: int) -> "BitVec":
        return cls(n, 1 << i)

    def __repr__(self):
        return f"BitVec({self.to01()})"


class SymmetricTensor:
    """Dense symmetric N x N x N tensor over GF(2) (the signature tensor)."""

    __slots__ = ("n", "_e")

    def __init__(self, n: int, entries: np.ndarray | None = None):
        if not 1 <= n <= MAX_QUBITS:
            raise DimensionMismatch(f"n={n} outside [1, {MAX_QUBITS}]")
        self.n = n
        if entries is None:
            self._e = np.zeros((n, n, n), dtype=np.uint8)
        else:
            e = np.asarray(entries, dtype=np.uint8) & 1
            if e.shape != (n, n, n):
                raise DimensionMismatch(f"entries shape {e.shape} != {(n, n, n)}")
            for axes in ((0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
                if not np.array_equal(e, e.transpose(axes)):
                    raise ValueError("entries are not symmetric")
            self._e = e

    @property
    def entries(self) -> np.ndarray:
        view = self._e.view()
        view.flags.writeable = False
        return view

    def set_entry(self, i: int, j: int, k: int, value: int) -> None:
        v = value & 1
        for a, b, c in ((i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)):
            self._e[a, b, c] = v

    def flip_entry(self, i: int, j: int, k: int) -> None:
        self.set_entry(i, j, k, 1 ^ self._e[i, j, k])

    @property
    def is_zero(self) -> bool:
        return not self._e.any()

    def copy(self) -> "SymmetricTensor":
        t = SymmetricTensor(self.n)
        t._e = self._e.copy()
        return t

    def canonical_triples(self) -> list:
        """Set entries as (i, j, k) with i <= j <= k, one per orbit."""
        out = []
        for i in range(self.n):
            for j in range(i, self.n):
                for k in range(j, self.n):
                    if self._e[i, j, k]:
                        out.append((i, j, k))
        return out

    def tobytes(self) -> bytes:
        return self._e.tobytes()

    def __eq__(self, other):
        return (
            isinstance(other, SymmetricTensor)
            and self.n == other.n
            and np.array_equal(self._e, other._e)
        )

    def __hash__(self):
        return hash((self.n, self._e.tobytes()))

    def __repr__(self):
        return f"SymmetricTensor(n={self.n}, set={self.canonical_triples()})"

    @classmethod
    def zero(cls, n: int) -> "SymmetricTensor":
        return cls(n)

    @classmethod
    def from_triples(cls, n: int, triples) -> "SymmetricTensor":
        t = cls(n)
        for i, j, k in triples:
            t.set_entry(i, j, k, 1)
        return t


# Cached cube tables per n: table[u] = dense cube of BitVec(n, u), u in [1, 2^n).
_CUBE_TABLES: dict = {}


def _cube_table(n: int) -> np.ndarray:
    tab = _CUBE_TABLES.get(n)
    if tab is None:
        count = 1 << n
        bits = ((np.arange(count)[:, None] >> np.arange(n)[None, :]) & 1).astype(np.uint8)
        tab = (
            bits[:, :, None, None] & bits[:, None, :, None] & bits[:, None, None, :]
        )
        _CUBE_TABLES[n] = tab
    return tab


def cube(u: BitVec) -> SymmetricTensor:
    """Rank-1 symmetric tensor u (x) u (x) u; one T gate's contribution."""
    if u.is_zero:
        raise ZeroFactor("cube of the zero vector")
    t = SymmetricTensor(u.n)
    t._e = _cube_table(u.n)[u.bits].copy()
    return t


def tensor_xor(a: SymmetricTensor, b: SymmetricTensor) -> SymmetricTensor:
    """Entrywise GF(2) sum."""
    if a.n != b.n:
        raise DimensionMismatch(f"{a.n} != {b.n}")
    t = SymmetricTensor(a.n)
    t._e = a._e ^ b._e
    return t


def xor_cube_inplace(t: SymmetricTensor, u: BitVec) -> None:
    """t ^= cube(u) without allocation of an intermediate tensor."""
    if u.is_zero:
        raise ZeroFactor("cube of the zero vector")
    if u.n != t.n:
        raise DimensionMismatch(f"{u.n} != {t.n}")
    t._e ^= _cube_table(t.n)[u.bits]


def sum_of_cubes(n: int, factors) -> SymmetricTensor:
    """XOR of cube(u) over a factor list."""
    t = SymmetricTensor(n)
    for u in factors:
        xor_cube_inplace(t, u)
    return t


@dataclass
class MultilinearPoly8:
    """Multilinear polynomial mod 8; keys are variable-subset bitmasks."""

    n: int
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = {m: c % 8 for m, c in self.coeffs.items() if c % 8}

    def evaluate(self, x: int) -> int:
        """Value at assignment x (bit i of x = variable i), mod 8."""
        total = 0
        for mask, c in self.coeffs.items():
            if mask & x == mask:
                total += c
        return total % 8

    def truth_table(self) -> np.ndarray:
        return np.array([self.evaluate(x) for x in range(1 << self.n)], dtype=np.int64)

    def __eq__(self, other):
        return (
            isinstance(other, MultilinearPoly8)
            and self.n == other.n
            and self.coeffs == other.coeffs
        )


def mobius_from_truth_table(values) -> MultilinearPoly8:
    """Unique multilinear-mod-8 interpolation of a full truth table.

    Standard subset finite-difference butterfly: after processing bit b,
    a[x] holds the coefficient restricted to the sublattice below x.
    """
    vals = np.asarray(values, dtype=np.int64)
    size = vals.shape[0]
    if size == 0 or size & (size - 1):
        raise BadLength(f"table length {size} is not a power of two")
    n = size.bit_length() - 1
    if n > MAX_QUBITS:
        raise BadLength(f"table implies n={n} > {MAX_QUBITS}")
    a = vals % 8
    for b in range(n):
        bit = 1 << b
        hi = (np.arange(size) & bit).astype(bool)
        a[hi] = (a[hi] - a[~hi]) % 8
    coeffs = {int(m): int(a[m]) for m in range(size) if a[m]}
    return MultilinearPoly8(n if n >= 1 else 1, coeffs)


def tensor_from_poly(p: MultilinearPoly8) -> SymmetricTensor:
    """Signature tensor of a CNOT+T phase polynomial.

    Encodes the odd part of each coefficient: degree-1 coeff mod 2 on the
    main diagonal, degree-2 (coeff/2) mod 2 on the pair orbits, degree-3
    (coeff/4) mod 2 on the distinct-index orbits.
    """
    t = SymmetricTensor(p.n)
    for mask, c in p.coeffs.items():
        sup = [i for i in range(p.n) if (mask >> i) & 1]
        deg = len(sup)
        if deg >= 4:
            raise DegreeTooHigh(f"monomial {sup} has degree {deg}")
        if deg == 0:
            continue  # global phase
        if deg == 1:
            if c % 2:
                i = sup[0]
                t.flip_entry(i, i, i)
        elif deg == 2:
            if c % 2:
                raise NonCliffordResidue(f"odd pair coefficient {c} on {sup}")
            if (c // 2) % 2:
                i, j = sup
                t.flip_entry(i, i, j)
                t.flip_entry(i, j, j)
        else:
            if c % 4:
                raise NonCliffordResidue(f"triple coefficient {c} on {sup} not divisible by 4")
            if (c // 4) % 2:
                i, j, k = sup
                t.flip_entry(i, j, k)
    return t


def _monomial_bits(t: SymmetricTensor):
    """Recover (linear, quadratic, cubic) monomial index sets from a tensor."""
    linear, quad, cubic = [], [], []
    e = t._e
    for i in range(t.n):
        if e[i, i, i]:
            linear.append((i,))
        for j in range(i + 1, t.n):
            if e[i, i, j]:
                quad.append((i, j))
            for k in range(j + 1, t.n):
                if e[i, j, k]:
                    cubic.append((i, j, k))
    return linear, quad, cubic


def monomial_factors(t: SymmetricTensor) -> list:
    """Sum-of-cubes expansion with one block per recovered monomial.

    Linear x_i -> [e_i]; quadratic x_i x_j -> 3 factors spanning {i, j};
    cubic x_i x_j x_k -> the 7 nonzero combinations of e_i, e_j, e_k.
    XORs back to t; its length is naive_completion_bound(t).
    """
    n = t.n
    linear, quad, cubic = _monomial_bits(t)
    out = []
    for (i,) in linear:
        out.append(BitVec.unit(n, i))
    for i, j in quad:
        a, b = BitVec.unit(n, i), BitVec.unit(n, j)
        out.extend([a, b, a ^ b])
    for i, j, k in cubic:
        a, b, c = BitVec.unit(n, i), BitVec.unit(n, j), BitVec.unit(n, k)
        out.extend([a, b, a ^ b, c, a ^ c, b ^ c, a ^ b ^ c])
    return out


def naive_completion_bound(t: SymmetricTensor) -> int:
    """Upper bound on the GF(2) symmetric rank: 1/3/7 per monomial degree."""
    linear, quad, cubic = _monomial_bits(t)
    return len(linear) + 3 * len(quad) + 7 * len(cubic)


def save_tensor_text(t: SymmetricTensor, path, header_comments=()) -> None:
    with open(path, "w") as f:
        for line in header_comments:
            f.write(f"# {line}\n")
        f.write(f"{t.n}\n")
        for i, j, k in t.canonical_triples():
            f.write(f"{i} {j} {k}\n")


def save_tensor_binary(t: SymmetricTensor, path) -> None:
    packed = np.packbits(t._e.reshape(-1))
    with open(path, "wb") as f:
        f.write(TENSOR_MAGIC)
        f.write(bytes([t.n]))
        f.write(packed.tobytes())


def load_tensor(path) -> SymmetricTensor:
    """Load either the text or the SIGT0001 binary tensor format."""
    with open(path, "rb") as f:
        head = f.read(len(TENSOR_MAGIC))
        if head == TENSOR_MAGIC:
            n = f.read(1)[0]
            if not 1 <= n <= MAX_QUBITS:
                raise DimensionMismatch(f"binary tensor n={n} out of range")
            need = (n * n * n + 7) // 8
            raw = f.read(need)
            if len(raw) != need:
                raise ValueError(f"binary tensor truncated: {len(raw)} < {need} bytes")
            bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))[: n * n * n]
            t = SymmetricTensor(n)
            # Symmetric closure: OR in every written orbit member.
            e = bits.reshape(n, n, n).astype(np.uint8)
            for axes in ((0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
                e = e | e.transpose(axes)
            t._e = np.ascontiguousarray(e)
            return t
    with open(path, "r") as f:
        n = None
        t = None
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if n is None:
                n = int(line)
                t = SymmetricTensor(n)
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'i j k', got {line!r}")
            i, j, k = (int(p) for p in parts)
            if not all(0 <= v < n for v in (i, j, k)):
                raise ValueError(f"{path}:{lineno}: index out of range for n={n}")
            t.set_entry(i, j, k, 1)
        if t is None:
            raise ValueError(f"{path}: empty tensor file")
        return t
