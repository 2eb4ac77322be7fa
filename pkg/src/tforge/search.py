"""PUCT Monte Carlo Tree Search over TensorGame states.

The evaluator is pluggable: anything callable as evaluator(state) ->
(priors, value) with priors a numpy array over the enumerated nonzero
factors (index = factor bitmask - 1).  The tree is rebuilt for every move;
rewards from the game (including gadget refunds) are backed up additively.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyPolicy, TerminalState
from .gf2 import BitVec, SymmetricTensor
from .game import (
    GameConfig,
    Outcome,
    initial_state,
    is_terminal,
    make_factorization,
    step,
    terminal_value,
)


@dataclass(frozen=True)
class SearchConfig:
    simulations: int = 80
    c_puct: float = 1.25
    dirichlet_alpha: float = 0.3
    dirichlet_fraction: float = 0.25
    temperature_moves: int = 4
    discount: float = 1.0

    def __post_init__(self):
        if self.simulations < 1:
            raise ValueError("simulations must be >= 1")
        if not 0.0 <= self.dirichlet_fraction <= 1.0:
            raise ValueError("dirichlet_fraction outside [0, 1]")


class _Node:
    __slots__ = ("state", "prior", "visits", "value_sum", "children", "rewards", "value_est")

    def __init__(self, state):
        self.state = state
        self.prior = None  # np array over 2^n - 1 actions, set on expansion
        self.visits = None
        self.value_sum = None
        self.children = {}  # action bits -> _Node
        self.rewards = {}  # action bits -> immediate reward
        self.value_est = 0.0

    @property
    def expanded(self) -> bool:
        return self.prior is not None

    def mean_value(self) -> float:
        total = self.visits.sum()
        if total == 0:
            return self.value_est
        return float(self.value_sum.sum() / total)


def uniform_evaluator(state) -> tuple:
    """Uniform prior, constant value.

    A value tied to the remaining tensor (say, minus the naive completion
    bound) looks tempting, but with first-play urgency equal to the parent
    mean it collapses exploration: unvisited actions inherit the parent's
    deeply negative estimate and are never tried.
    """
    count = (1 << state.n) - 1
    return np.full(count, 1.0 / count), 0.0


def _expand(node: _Node, evaluator) -> float:
    priors, value = evaluator(node.state)
    priors = np.asarray(priors, dtype=np.float64)
    total = priors.sum()
    if total <= 0:
        priors = np.full(priors.size, 1.0 / priors.size)
    else:
        priors = priors / total
    node.prior = priors
    node.visits = np.zeros(priors.size, dtype=np.int64)
    node.value_sum = np.zeros(priors.size, dtype=np.float64)
    node.value_est = float(value)
    return node.value_est


def _select_index(node: _Node, c_puct: float) -> int:
    total = node.visits.sum()
    sqrt_total = np.sqrt(max(total, 1))
    # first-play urgency: unvisited children score the parent's estimate
    parent_q = node.mean_value()
    q = np.where(node.visits > 0, node.value_sum / np.maximum(node.visits, 1), parent_q)
    ucb = q + c_puct * node.prior * sqrt_total / (1.0 + node.visits)
    return int(np.argmax(ucb))


def mcts_policy(
    state,
    evaluator,
    cfg: SearchConfig,
    game_cfg: GameConfig,
    rng,
    train: bool = False,
):
    """Run cfg.simulations PUCT simulations from state.

    Returns (visit distribution over the 2^n - 1 enumerated actions,
    root value estimate).  Root priors are mixed with Dirichlet noise in
    train mode.
    """
    if is_terminal(state) is not Outcome.ONGOING:
        raise TerminalState("search from a terminal state")
    root = _Node(state)
    _expand(root, evaluator)
    if train and cfg.dirichlet_fraction > 0:
        noise = rng.dirichlet(np.full(root.prior.size, cfg.dirichlet_alpha))
        root.prior = (1 - cfg.dirichlet_fraction) * root.prior + cfg.dirichlet_fraction * noise
    n = state.n

    for _ in range(cfg.simulations):
        node = root
        path = []  # (parent node, action index)
        while True:
            a = _select_index(node, cfg.c_puct)
            path.append((node, a))
            bits = a + 1
            child = node.children.get(bits)
            if child is None:
                nxt, reward = step(node.state, BitVec(n, bits), game_cfg)
                child = _Node(nxt)
                node.children[bits] = child
                node.rewards[bits] = reward
            if is_terminal(child.state) is not Outcome.ONGOING:
                leaf_value = float(terminal_value(child.state))
                break
            if not child.expanded:
                leaf_value = _expand(child, evaluator)
                break
            node = child

        g = leaf_value
        for parent, a in reversed(path):
            g = parent.rewards[a + 1] + cfg.discount * g
            parent.visits[a] += 1
            parent.value_sum[a] += g

    visits = root.visits.astype(np.float64)
    total = visits.sum()
    policy = visits / total
    root_value = float(root.value_sum.sum() / total)
    return policy, root_value


def select_action(visits: np.ndarray, temperature: float, rng) -> BitVec:
    """Pick an action from a normalized visit distribution.

    Temperature 0 is argmax with lowest-index tie-break; tau > 0 samples
    proportionally to visits**(1/tau).
    """
    visits = np.asarray(visits, dtype=np.float64)
    if visits.size == 0 or visits.sum() <= 0:
        raise EmptyPolicy("empty or all-zero visit distribution")
    n = int(np.log2(visits.size + 1))
    if temperature == 0:
        return BitVec(n, int(np.argmax(visits)) + 1)
    weighted = np.power(visits, 1.0 / temperature)
    weighted = weighted / weighted.sum()
    return BitVec(n, int(rng.choice(visits.size, p=weighted)) + 1)


def play_episode(
    tensor: SymmetricTensor,
    evaluator,
    game_cfg: GameConfig,
    search_cfg: SearchConfig,
    mode: str,
    rng,
):
    """Play one full game; returns (Factorization, trajectory).

    Trajectory rows are (state, visit distribution, return); returns are the
    discounted sums of observed rewards plus the terminal value.  Train mode
    uses tau=1 for the first temperature_moves moves and Dirichlet root
    noise; eval mode is greedy (tau=0) throughout.
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"mode {mode!r}")
    train = mode == "train"
    state = initial_state(tensor, game_cfg)
    rows = []  # (state, visits, reward)
    while is_terminal(state) is Outcome.ONGOING:
        visits, _ = mcts_policy(state, evaluator, search_cfg, game_cfg, rng, train=train)
        tau = 1.0 if train and state.moves_played < search_cfg.temperature_moves else 0.0
        action = select_action(visits, tau, rng)
        nxt, reward = step(state, action, game_cfg)
        rows.append((state, visits, reward))
        state = nxt

    g = float(terminal_value(state))
    trajectory = []
    for st, visits, reward in reversed(rows):
        g = reward + search_cfg.discount * g
        trajectory.append((st, visits, g))
    trajectory.reverse()
    factorization = make_factorization(list(state.history), game_cfg)
    return factorization, trajectory
