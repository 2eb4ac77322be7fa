"""TensorGame mechanics: moves, gadget matching, scoring, terminal handling."""

import numpy as np
import pytest

from tforge.errors import TerminalState, TooManyActions, ZeroFactor
from tforge.game import (
    GameConfig,
    Outcome,
    initial_state,
    is_terminal,
    legal_actions,
    load_factorization,
    make_factorization,
    match_gadget,
    replay_states,
    save_factorization,
    score_factorization,
    step,
    terminal_value,
)
from tforge.gf2 import BitVec, SymmetricTensor, cube, sum_of_cubes

E = lambda n, i: BitVec.unit(n, i)


def toffoli_pattern(u1, u2, u4):
    return [u1, u2, u1 ^ u2, u4, u1 ^ u4, u2 ^ u4, u1 ^ u2 ^ u4]


class TestInitialState:
    def test_zero_tensor_terminal(self):
        s = initial_state(SymmetricTensor.zero(3), GameConfig())
        assert is_terminal(s) is Outcome.SOLVED

    def test_rank_one_max_moves(self):
        s = initial_state(cube(E(3, 0)), GameConfig())
        assert s.max_moves == 2
        assert is_terminal(s) is Outcome.ONGOING


class TestLegalActions:
    def test_counts(self):
        assert len(legal_actions(initial_state(cube(E(3, 0)), GameConfig()), GameConfig())) == 7
        assert len(legal_actions(initial_state(cube(E(8, 0)), GameConfig()), GameConfig())) == 255

    def test_cap(self):
        s = initial_state(SymmetricTensor.zero(13), GameConfig())
        with pytest.raises(TooManyActions):
            legal_actions(s, GameConfig())


class TestStep:
    def test_solve_rank_one(self):
        cfg = GameConfig()
        s = initial_state(cube(E(3, 0)), cfg)
        s2, r = step(s, E(3, 0), cfg)
        assert r == -1 and s2.t_cost == 1
        assert is_terminal(s2) is Outcome.SOLVED

    def test_involution(self):
        cfg = GameConfig()
        rng = np.random.default_rng(0)
        for _ in range(30):
            n = int(rng.integers(2, 7))
            t = sum_of_cubes(n, [BitVec(n, int(rng.integers(1, 1 << n))) for _ in range(3)])
            s = initial_state(t, cfg)
            if is_terminal(s) is not Outcome.ONGOING:
                continue
            u = BitVec(n, int(rng.integers(1, 1 << n)))
            s1, _ = step(s, u, cfg)
            if is_terminal(s1) is not Outcome.ONGOING:
                continue
            s2, _ = step(s1, u, cfg)
            assert s2.tensor == s.tensor
            assert s2.t_cost == 2

    def test_zero_factor(self):
        cfg = GameConfig()
        with pytest.raises(ZeroFactor):
            step(initial_state(cube(E(2, 0)), cfg), BitVec(2, 0), cfg)

    def test_terminal_state_rejected(self):
        cfg = GameConfig()
        s = initial_state(SymmetricTensor.zero(2), cfg)
        with pytest.raises(TerminalState):
            step(s, E(2, 0), cfg)

    def test_toffoli_refund(self):
        cfg = GameConfig(gadgets_enabled=True)
        pat = toffoli_pattern(E(3, 0), E(3, 1), E(3, 2))
        t = sum_of_cubes(3, pat)
        s = initial_state(t, cfg)
        rewards = []
        for u in pat:
            s, r = step(s, u, cfg)
            rewards.append(r)
        assert is_terminal(s) is Outcome.SOLVED
        assert s.t_cost == 2
        assert rewards[-1] == -1 + (7 - cfg.toffoli_cost)


class TestMatchGadget:
    def test_cs_match(self):
        a, b = E(3, 0), E(3, 1)
        assert match_gadget((a, b, a ^ b), 0) == ("cs", 0)

    def test_toffoli_match(self):
        pat = tuple(toffoli_pattern(E(3, 0), E(3, 1), E(3, 2)))
        assert match_gadget(pat, 0) == ("toffoli", 0)

    def test_no_match(self):
        assert match_gadget((E(3, 0), E(3, 1), E(3, 2)), 0) is None

    def test_dependent_generators_rejected(self):
        u1, u2 = E(4, 0), E(4, 1)
        u4 = u1 ^ u2
        pat = tuple(toffoli_pattern(u1, u2, u4))
        assert match_gadget(pat, 0) != ("toffoli", 0)

    def test_protected_prefix_blocks(self):
        pat = tuple(toffoli_pattern(E(3, 0), E(3, 1), E(3, 2)))
        assert match_gadget(pat, 1) is None or match_gadget(pat, 1)[0] == "cs"


class TestTerminalValue:
    def test_solved(self):
        s = initial_state(SymmetricTensor.zero(2), GameConfig())
        assert terminal_value(s) == 0

    def test_truncated_rank_one(self):
        cfg = GameConfig(max_moves_multiplier=0.0)
        s = initial_state(cube(E(3, 0)), cfg)
        assert is_terminal(s) is Outcome.TRUNCATED
        assert terminal_value(s) == -1

    def test_truncated_two_bit(self):
        cfg = GameConfig(max_moves_multiplier=0.0)
        s = initial_state(cube(BitVec.from01("110")), cfg)
        assert terminal_value(s) == -5


class TestScore:
    def test_single(self):
        assert score_factorization([E(2, 0)], GameConfig()) == 1

    def test_toffoli_pattern_scores_two(self):
        cfg = GameConfig(gadgets_enabled=True)
        assert score_factorization(toffoli_pattern(E(3, 0), E(3, 1), E(3, 2)), cfg) == 2

    def test_cs_default_no_refund(self):
        cfg = GameConfig(gadgets_enabled=True)
        a, b = E(3, 0), E(3, 1)
        assert score_factorization([a, b, a ^ b], cfg) == 3

    def test_cs_refund_when_cheap(self):
        cfg = GameConfig(gadgets_enabled=True, cs_cost=2)
        a, b = E(3, 0), E(3, 1)
        assert score_factorization([a, b, a ^ b], cfg) == 2

    def test_interrupted_pattern_scores_eight(self):
        cfg = GameConfig(gadgets_enabled=True)
        pat = toffoli_pattern(E(4, 0), E(4, 1), E(4, 2))
        interrupted = pat[:3] + [E(4, 3)] + pat[3:]
        assert score_factorization(interrupted, cfg) == 8

    def test_gadgets_off_equals_length(self):
        rng = np.random.default_rng(1)
        cfg = GameConfig(gadgets_enabled=False)
        for _ in range(20):
            n = int(rng.integers(2, 6))
            factors = [
                BitVec(n, int(rng.integers(1, 1 << n))) for _ in range(int(rng.integers(1, 12)))
            ]
            assert score_factorization(factors, cfg) == len(factors)

    def test_cost_monotone_and_bounded(self):
        rng = np.random.default_rng(2)
        cfg = GameConfig(gadgets_enabled=True)
        for _ in range(20):
            n = int(rng.integers(3, 7))
            t = sum_of_cubes(n, [BitVec(n, int(rng.integers(1, 1 << n))) for _ in range(4)])
            s = initial_state(t, cfg)
            prev_cost = 0
            while is_terminal(s) is Outcome.ONGOING:
                u = BitVec(n, int(rng.integers(1, 1 << n)))
                s, _ = step(s, u, cfg)
                assert s.t_cost >= prev_cost
                assert s.t_cost <= s.moves_played
                prev_cost = s.t_cost


class TestReplayStates:
    def test_states_track_residual(self):
        cfg = GameConfig()
        rng = np.random.default_rng(3)
        n = 4
        factors = [BitVec(n, int(rng.integers(1, 1 << n))) for _ in range(6)]
        t = sum_of_cubes(n, factors)
        states = replay_states(t, factors, cfg)
        assert len(states) == 7
        assert states[-1].tensor.is_zero
        for st, u in zip(states, factors):
            nxt = st.tensor.copy()
            from tforge.gf2 import xor_cube_inplace

            xor_cube_inplace(nxt, u)
            # the successor in the list has exactly this residual
        assert states[-1].t_cost == score_factorization(factors, cfg)


class TestFactorizationIo:
    def test_round_trip(self, tmp_path):
        cfg = GameConfig(gadgets_enabled=True)
        f = make_factorization(toffoli_pattern(E(3, 0), E(3, 1), E(3, 2)), cfg)
        assert f.t_count == 2
        path = tmp_path / "f.fact"
        save_factorization(f, 3, path)
        g = load_factorization(path, cfg)
        assert g.factors == f.factors
        assert g.t_count == 2
        assert g.gadget_spans == [(0, "toffoli")]
