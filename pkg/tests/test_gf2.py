"""GF(2) core: cubes, Mobius interpolation, tensor encoding, completion bound."""

import itertools

import numpy as np
import pytest

from tforge.errors import (
    BadLength,
    DegreeTooHigh,
    DimensionMismatch,
    NonCliffordResidue,
    ZeroFactor,
)
from tforge.gf2 import (
    BitVec,
    MultilinearPoly8,
    SymmetricTensor,
    cube,
    load_tensor,
    mobius_from_truth_table,
    monomial_factors,
    naive_completion_bound,
    save_tensor_binary,
    save_tensor_text,
    sum_of_cubes,
    tensor_from_poly,
    tensor_xor,
)


def brute_force_rank(t, max_rank=None):
    """Exhaustive minimal sum-of-cubes length via BFS over the cube span."""
    from collections import deque

    n = t.n
    cubes = [cube(BitVec(n, u)).tobytes() for u in range(1, 1 << n)]
    target = t.tobytes()
    zero = SymmetricTensor(n).tobytes()
    dist = {zero: 0}
    frontier = deque([zero])
    if target == zero:
        return 0
    while frontier:
        cur = frontier.popleft()
        d = dist[cur]
        if max_rank is not None and d >= max_rank:
            continue
        arr = np.frombuffer(cur, dtype=np.uint8)
        for cb in cubes:
            nxt = (arr ^ np.frombuffer(cb, dtype=np.uint8)).tobytes()
            if nxt not in dist:
                dist[nxt] = d + 1
                if nxt == target:
                    return d + 1
                frontier.append(nxt)
    raise AssertionError("target not in cube span")


class TestBitVec:
    def test_equality_and_xor(self):
        a = BitVec.from01("110")
        b = BitVec.from01("011")
        assert (a ^ b) == BitVec.from01("101")
        assert a.to01() == "110"
        assert a.bit(0) == 1 and a.bit(2) == 0

    def test_width_mismatch(self):
        with pytest.raises(DimensionMismatch):
            BitVec(2, 1) ^ BitVec(3, 1)

    def test_round_trip_01(self):
        for bits in range(1, 16):
            v = BitVec(4, bits)
            assert BitVec.from01(v.to01()) == v


class TestCube:
    def test_basis_vector(self):
        t = cube(BitVec.unit(3, 0))
        assert t.canonical_triples() == [(0, 0, 0)]

    def test_two_bit_factor(self):
        t = cube(BitVec.from01("110"))
        e = t.entries
        for i, j, k in itertools.product(range(3), repeat=3):
            expected = 1 if max(i, j, k) <= 1 else 0
            assert e[i, j, k] == expected

    def test_zero_factor_rejected(self):
        with pytest.raises(ZeroFactor):
            cube(BitVec(3, 0))

    def test_symmetry_random(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(1, 9))
            u = BitVec(n, int(rng.integers(1, 1 << n)))
            e = cube(u).entries
            for axes in ((0, 2, 1), (1, 0, 2), (2, 1, 0), (1, 2, 0), (2, 0, 1)):
                assert np.array_equal(e, e.transpose(axes))


class TestTensorXor:
    def test_involution(self):
        a = cube(BitVec.from01("101"))
        assert tensor_xor(a, a).is_zero

    def test_identity(self):
        a = cube(BitVec.from01("101"))
        assert tensor_xor(a, SymmetricTensor.zero(3)) == a

    def test_disjoint_diagonals(self):
        t = tensor_xor(cube(BitVec.unit(3, 0)), cube(BitVec.unit(3, 1)))
        assert sorted(t.canonical_triples()) == [(0, 0, 0), (1, 1, 1)]

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            tensor_xor(SymmetricTensor.zero(2), SymmetricTensor.zero(3))


class TestMobius:
    def test_all_zero(self):
        assert mobius_from_truth_table([0, 0, 0, 0]).coeffs == {}

    def test_xor_of_two(self):
        p = mobius_from_truth_table([0, 1, 1, 0])
        assert p.coeffs == {0b01: 1, 0b10: 1, 0b11: 6}

    def test_single_variable(self):
        p = mobius_from_truth_table([0, 1])
        assert p.coeffs == {0b1: 1}

    def test_bad_length(self):
        with pytest.raises(BadLength):
            mobius_from_truth_table([0, 1, 2])

    def test_round_trip_exhaustive_random(self):
        rng = np.random.default_rng(1)
        for n in range(1, 7):
            for _ in range(10):
                values = rng.integers(0, 8, size=1 << n)
                p = mobius_from_truth_table(values)
                assert np.array_equal(p.truth_table(), values % 8)


class TestTensorFromPoly:
    def test_single_linear(self):
        p = MultilinearPoly8(1, {0b1: 1})
        assert tensor_from_poly(p) == cube(BitVec(1, 1))

    def test_parity_pair(self):
        p = mobius_from_truth_table([0, 1, 1, 0])
        assert tensor_from_poly(p) == cube(BitVec.from01("11"))

    def test_odd_pair_rejected(self):
        with pytest.raises(NonCliffordResidue):
            tensor_from_poly(MultilinearPoly8(2, {0b11: 1}))

    def test_bad_triple_rejected(self):
        with pytest.raises(NonCliffordResidue):
            tensor_from_poly(MultilinearPoly8(3, {0b111: 2}))

    def test_degree_four_rejected(self):
        with pytest.raises(DegreeTooHigh):
            tensor_from_poly(MultilinearPoly8(4, {0b1111: 4}))

    def test_ccz_triple(self):
        p = MultilinearPoly8(3, {0b111: 4})
        assert tensor_from_poly(p).canonical_triples() == [(0, 1, 2)]


class TestSumOfCubes:
    def test_matches_poly_path_bruteforce(self):
        # Sum of odd-multiplicity parities equals the tensor of the summed
        # phase table, brute-forced for n <= 5.
        rng = np.random.default_rng(2)
        for n in range(2, 6):
            for _ in range(20):
                count = int(rng.integers(1, 8))
                factors = [BitVec(n, int(rng.integers(1, 1 << n))) for _ in range(count)]
                table = np.zeros(1 << n, dtype=np.int64)
                for x in range(1 << n):
                    for u in factors:
                        table[x] += bin(u.bits & x).count("1") & 1
                poly = mobius_from_truth_table(table % 8)
                assert tensor_from_poly(poly) == sum_of_cubes(n, factors)


class TestCompletionBound:
    def test_zero(self):
        assert naive_completion_bound(SymmetricTensor.zero(4)) == 0

    def test_basis(self):
        assert naive_completion_bound(cube(BitVec.unit(3, 0))) == 1

    def test_two_bit_cube(self):
        assert naive_completion_bound(cube(BitVec.from01("110"))) == 5

    def test_monomial_factors_reconstruct(self):
        rng = np.random.default_rng(3)
        for n in range(2, 6):
            for _ in range(10):
                count = int(rng.integers(1, 6))
                t = sum_of_cubes(
                    n, [BitVec(n, int(rng.integers(1, 1 << n))) for _ in range(count)]
                )
                factors = monomial_factors(t)
                assert len(factors) == naive_completion_bound(t)
                assert sum_of_cubes(n, factors) == t

    def test_bound_at_least_rank(self):
        rng = np.random.default_rng(4)
        for n in range(2, 5):
            for _ in range(6):
                count = int(rng.integers(1, 5))
                t = sum_of_cubes(
                    n, [BitVec(n, int(rng.integers(1, 1 << n))) for _ in range(count)]
                )
                bound = naive_completion_bound(t)
                if t.is_zero:
                    assert bound == 0
                    continue
                assert bound >= brute_force_rank(t)


class TestTensorIo:
    def test_text_round_trip(self, tmp_path):
        t = sum_of_cubes(4, [BitVec.from01("1100"), BitVec.from01("0111")])
        path = tmp_path / "t.sigt"
        save_tensor_text(t, path, header_comments=["test tensor"])
        assert load_tensor(path) == t

    def test_binary_round_trip(self, tmp_path):
        t = sum_of_cubes(5, [BitVec.from01("10101")])
        path = tmp_path / "t.sigtb"
        save_tensor_binary(t, path)
        assert load_tensor(path) == t
