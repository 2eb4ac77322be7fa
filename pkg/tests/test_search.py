"""MCTS: policy quality on known optima, determinism, bookkeeping invariants."""

import numpy as np
import pytest

from tforge.errors import EmptyPolicy, TerminalState
from tforge.game import GameConfig, Outcome, initial_state, is_terminal
from tforge.gf2 import BitVec, SymmetricTensor, cube, sum_of_cubes
from tforge.search import (
    SearchConfig,
    mcts_policy,
    play_episode,
    select_action,
    uniform_evaluator,
)


class TestMctsPolicy:
    def test_rank_one_concentrates(self):
        cfg = SearchConfig(simulations=80)
        state = initial_state(cube(BitVec.unit(3, 0)), GameConfig())
        rng = np.random.default_rng(0)
        visits, value = mcts_policy(state, uniform_evaluator, cfg, GameConfig(), rng)
        assert int(np.argmax(visits)) + 1 == 1  # the e0 action

    def test_single_simulation_one_hot(self):
        cfg = SearchConfig(simulations=1)
        state = initial_state(cube(BitVec.unit(2, 0)), GameConfig())
        visits, _ = mcts_policy(state, uniform_evaluator, cfg, GameConfig(), np.random.default_rng(0))
        assert np.count_nonzero(visits) == 1

    def test_rank_one_any_factor(self):
        cfg = SearchConfig(simulations=200)
        rng = np.random.default_rng(1)
        for n in (2, 3, 4):
            for _ in range(5):
                bits = int(rng.integers(1, 1 << n))
                state = initial_state(cube(BitVec(n, bits)), GameConfig())
                visits, _ = mcts_policy(state, uniform_evaluator, cfg, GameConfig(), rng)
                assert int(np.argmax(visits)) + 1 == bits

    def test_visit_conservation(self):
        cfg = SearchConfig(simulations=57)
        state = initial_state(cube(BitVec.from01("110")), GameConfig())
        visits, _ = mcts_policy(state, uniform_evaluator, cfg, GameConfig(), np.random.default_rng(2))
        assert abs(visits.sum() - 1.0) < 1e-12
        # raw counts sum to the simulation budget
        assert np.allclose(visits * cfg.simulations, np.round(visits * cfg.simulations))

    def test_value_in_range(self):
        cfg = SearchConfig(simulations=60)
        gcfg = GameConfig()
        rng = np.random.default_rng(3)
        for _ in range(10):
            n = int(rng.integers(2, 6))
            t = sum_of_cubes(n, [BitVec(n, int(rng.integers(1, 1 << n))) for _ in range(3)])
            state = initial_state(t, gcfg)
            if is_terminal(state) is not Outcome.ONGOING:
                continue
            _, value = mcts_policy(state, uniform_evaluator, cfg, gcfg, rng)
            max_penalty = state.max_moves + 7 * n * (n + 1) * (n + 2) // 6
            assert -(state.max_moves + max_penalty) <= value <= 0

    def test_terminal_rejected(self):
        state = initial_state(SymmetricTensor.zero(2), GameConfig())
        with pytest.raises(TerminalState):
            mcts_policy(state, uniform_evaluator, SearchConfig(), GameConfig(), np.random.default_rng(0))


class TestSelectAction:
    def test_one_hot(self):
        visits = np.array([0.0, 1.0, 0.0])
        assert select_action(visits, 0.0, np.random.default_rng(0)) == BitVec(2, 2)

    def test_tie_break_lowest_index(self):
        visits = np.array([0.5, 0.5, 0.0])
        assert select_action(visits, 0.0, np.random.default_rng(0)) == BitVec(2, 1)

    def test_sampling_proportions(self):
        visits = np.array([0.75, 0.25, 0.0])
        rng = np.random.default_rng(4)
        draws = [select_action(visits, 1.0, rng).bits for _ in range(10000)]
        frac = sum(1 for d in draws if d == 1) / len(draws)
        assert abs(frac - 0.75) < 0.02

    def test_empty(self):
        with pytest.raises(EmptyPolicy):
            select_action(np.array([]), 0.0, np.random.default_rng(0))


class TestPlayEpisode:
    def test_zero_tensor(self):
        f, traj = play_episode(
            SymmetricTensor.zero(3),
            uniform_evaluator,
            GameConfig(),
            SearchConfig(simulations=4),
            "eval",
            np.random.default_rng(0),
        )
        assert f.t_count == 0 and f.factors == [] and traj == []

    def test_rank_one_eval(self):
        f, traj = play_episode(
            cube(BitVec.unit(3, 0)),
            uniform_evaluator,
            GameConfig(),
            SearchConfig(simulations=80),
            "eval",
            np.random.default_rng(1),
        )
        assert f.t_count == 1
        assert f.factors == [BitVec.unit(3, 0)]
        assert traj[0][2] == -1.0

    def test_forced_truncation(self):
        t = sum_of_cubes(3, [BitVec(3, 1), BitVec(3, 2)])
        gcfg = GameConfig(max_moves_multiplier=0.5)  # max_moves = 1
        f, traj = play_episode(
            t, uniform_evaluator, gcfg, SearchConfig(simulations=1), "eval", np.random.default_rng(2)
        )
        assert len(f.factors) == 1
        assert traj[-1][2] < -1.0  # reward plus truncation penalty

    def test_determinism(self):
        t = sum_of_cubes(4, [BitVec(4, 3), BitVec(4, 9), BitVec(4, 12)])
        for mode in ("train", "eval"):
            runs = []
            for _ in range(2):
                rng = np.random.default_rng(42)
                f, traj = play_episode(
                    t, uniform_evaluator, GameConfig(), SearchConfig(simulations=30), mode, rng
                )
                runs.append((tuple(u.bits for u in f.factors), [tuple(v) for _, v, _ in traj]))
            assert runs[0][0] == runs[1][0]
            for a, b in zip(runs[0][1], runs[1][1]):
                assert a == b

    def test_uniform_mcts_solves_rank_one(self):
        # >= 99% of seeds solve a random rank-1 tensor in exactly one move
        rng_master = np.random.default_rng(5)
        wins = 0
        trials = 100
        for seed in range(trials):
            n = int(rng_master.integers(2, 7))
            bits = int(rng_master.integers(1, 1 << n))
            f, _ = play_episode(
                cube(BitVec(n, bits)),
                uniform_evaluator,
                GameConfig(),
                SearchConfig(simulations=200),
                "eval",
                np.random.default_rng(seed),
            )
            if f.t_count == 1:
                wins += 1
        assert wins >= 99

    def test_solved_trajectories_reconstruct(self):
        rng = np.random.default_rng(6)
        gcfg = GameConfig()
        scfg = SearchConfig(simulations=40)
        checked = 0
        for _ in range(30):
            n = int(rng.integers(3, 6))
            t = sum_of_cubes(n, [BitVec(n, int(rng.integers(1, 1 << n))) for _ in range(2)])
            if t.is_zero:
                continue
            f, _ = play_episode(t, uniform_evaluator, gcfg, scfg, "eval", rng)
            if len(f.factors) < initial_state(t, gcfg).max_moves:  # solved, not truncated
                assert sum_of_cubes(n, f.factors) == t
                checked += 1
        assert checked > 0
