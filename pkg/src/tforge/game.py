"""The TensorGame: residual signature tensor, factor moves, gadget refunds.

A move XOR-subtracts cube(u) from the residual tensor at base cost 1.
When gadgets are enabled, a completed Toffoli pattern (7 consecutive
factors generated by three independent vectors, in canonical order)
refunds 7 - toffoli_cost; a CS pattern (3 factors) refunds 3 - cs_cost.
Matched spans are consumed greedily and never reused; a match whose
refund is zero is a no-op so it cannot block a longer pattern.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import TerminalState, TooManyActions, ZeroFactor
from .gf2 import (
    BitVec,
    SymmetricTensor,
    naive_completion_bound,
    xor_cube_inplace,
)

GADGET_WINDOW = 7  # longest pattern; also the history the model needs to see


@dataclass(frozen=True)
class GameConfig:
    gadgets_enabled: bool = False
    toffoli_cost: int = 2
    cs_cost: int = 3
    max_moves_multiplier: float = 2.0
    action_enum_max_qubits: int = 12

    def __post_init__(self):
        if self.toffoli_cost < 0 or self.toffoli_cost > 7:
            raise ValueError(f"toffoli_cost {self.toffoli_cost} outside [0, 7]")
        if self.cs_cost < 0 or self.cs_cost > 3:
            raise ValueError(f"cs_cost {self.cs_cost} outside [0, 3]")


class Outcome(enum.Enum):
    ONGOING = "ongoing"
    SOLVED = "solved"
    TRUNCATED = "truncated"


@dataclass(frozen=True)
class GameState:
    tensor: SymmetricTensor
    history: tuple  # all factors played, oldest first
    moves_played: int
    t_cost: int
    protected_prefix: int  # factors before this index are consumed by gadgets
    max_moves: int

    @property
    def n(self) -> int:
        return self.tensor.n


@dataclass
class Factorization:
    factors: list
    t_count: int
    gadget_spans: list = field(default_factory=list)  # (start_index, kind)

    @property
    def n(self):
        return self.factors[0].n if self.factors else None


def _gf2_rank(ints) -> int:
    basis = []
    for v in ints:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    return len(basis)


def match_gadget(history, protected_prefix: int):
    """Detect a just-completed gadget pattern at the end of the history.

    Returns (kind, start_index) with kind in {"toffoli", "cs"}, or None.
    Toffoli: last 7 factors are u1, u2, u1^u2, u4, u1^u4, u2^u4, u1^u2^u4
    with u1, u2, u4 linearly independent.  CS: last 3 are u1, u2, u1^u2
    with u1 != u2.  Toffoli takes precedence.
    """
    m = len(history)
    if m - 7 >= protected_prefix:
        u1, u2, u3, u4, u5, u6, u7 = (h.bits for h in history[-7:])
        if (
            u3 == u1 ^ u2
            and u5 == u1 ^ u4
            and u6 == u2 ^ u4
            and u7 == u1 ^ u2 ^ u4
            and _gf2_rank([u1, u2, u4]) == 3
        ):
            return ("toffoli", m - 7)
    if m - 3 >= protected_prefix:
        u1, u2, u3 = (h.bits for h in history[-3:])
        if u1 != u2 and u3 == u1 ^ u2:
            return ("cs", m - 3)
    return None


def initial_state(t: SymmetricTensor, cfg: GameConfig) -> GameState:
    bound = naive_completion_bound(t)
    max_moves = math.ceil(cfg.max_moves_multiplier * bound)
    return GameState(
        tensor=t.copy(),
        history=(),
        moves_played=0,
        t_cost=0,
        protected_prefix=0,
        max_moves=max_moves,
    )


def is_terminal(state: GameState) -> Outcome:
    if state.tensor.is_zero:
        return Outcome.SOLVED
    if state.moves_played >= state.max_moves:
        return Outcome.TRUNCATED
    return Outcome.ONGOING


def terminal_value(state: GameState) -> int:
    outcome = is_terminal(state)
    if outcome is Outcome.SOLVED:
        return 0
    return -naive_completion_bound(state.tensor)


def legal_actions(state: GameState, cfg: GameConfig) -> list:
    n = state.n
    if n > cfg.action_enum_max_qubits:
        raise TooManyActions(f"n={n} exceeds enumeration cap {cfg.action_enum_max_qubits}")
    return [BitVec(n, bits) for bits in range(1, 1 << n)]


def _match_and_refund(history, protected_prefix: int, cfg: GameConfig):
    """Apply gadget accounting after a move; returns (refund, prefix, span)."""
    if not cfg.gadgets_enabled:
        return 0, protected_prefix, None
    match = match_gadget(history, protected_prefix)
    if match is None:
        return 0, protected_prefix, None
    kind, start = match
    refund = (7 - cfg.toffoli_cost) if kind == "toffoli" else (3 - cfg.cs_cost)
    if refund <= 0:
        # zero-value match is a no-op so it cannot swallow a longer pattern
        return 0, protected_prefix, None
    return refund, len(history), (start, kind)


def step(state: GameState, u: BitVec, cfg: GameConfig):
    """Play factor u; returns (next_state, reward)."""
    if u.is_zero:
        raise ZeroFactor("zero factor is not a legal move")
    if is_terminal(state) is not Outcome.ONGOING:
        raise TerminalState(f"game already {is_terminal(state).value}")
    tensor = state.tensor.copy()
    xor_cube_inplace(tensor, u)
    history = state.history + (u,)
    reward = -1
    refund, prefix, _ = _match_and_refund(history, state.protected_prefix, cfg)
    reward += refund
    return (
        GameState(
            tensor=tensor,
            history=history,
            moves_played=state.moves_played + 1,
            t_cost=state.t_cost - reward,
            protected_prefix=prefix,
            max_moves=state.max_moves,
        ),
        reward,
    )


def replay_costs(factors, cfg: GameConfig):
    """Per-move costs (1 - refund) of a factor sequence, plus gadget spans.

    Pure gadget accounting: no tensors, no truncation; used by scoring and
    by demonstration return-to-go targets.
    """
    history = []
    prefix = 0
    costs = []
    spans = []
    for u in factors:
        if u.is_zero:
            raise ZeroFactor("zero factor in sequence")
        history.append(u)
        refund, prefix, span = _match_and_refund(tuple(history), prefix, cfg)
        costs.append(1 - refund)
        if span is not None:
            spans.append(span)
    return costs, spans


def score_factorization(factors, cfg: GameConfig) -> int:
    """Final T-cost of a factor sequence; equals len(factors) without gadgets."""
    costs, _ = replay_costs(factors, cfg)
    return sum(costs)


def make_factorization(factors, cfg: GameConfig) -> Factorization:
    costs, spans = replay_costs(factors, cfg)
    return Factorization(list(factors), sum(costs), spans)


def replay_states(t: SymmetricTensor, factors, cfg: GameConfig):
    """States visited when playing a factor list from tensor t.

    Ignores truncation and mid-sequence zero residuals (a demonstration may
    pass through zero); returns len(factors) + 1 states.
    """
    tensor = t.copy()
    history = []
    prefix = 0
    cost = 0
    states = [
        GameState(
            tensor=tensor.copy(),
            history=(),
            moves_played=0,
            t_cost=0,
            protected_prefix=0,
            max_moves=math.ceil(cfg.max_moves_multiplier * naive_completion_bound(t)),
        )
    ]
    for idx, u in enumerate(factors):
        xor_cube_inplace(tensor, u)
        history.append(u)
        refund, prefix, _ = _match_and_refund(tuple(history), prefix, cfg)
        cost += 1 - refund
        states.append(
            GameState(
                tensor=tensor.copy(),
                history=tuple(history),
                moves_played=idx + 1,
                t_cost=cost,
                protected_prefix=prefix,
                max_moves=states[0].max_moves,
            )
        )
    return states


def save_factorization(f: Factorization, n: int, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{n}\n")
        for u in f.factors:
            fh.write(u.to01() + "\n")
        fh.write(f"# t_count={f.t_count}\n")


def load_factorization(path, cfg: GameConfig) -> Factorization:
    factors = []
    n = None
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if n is None:
                n = int(line)
                continue
            if len(line) != n:
                raise ValueError(f"factor {line!r} is not {n} characters")
            factors.append(BitVec.from01(line))
    if n is None:
        raise ValueError(f"{path}: empty factorization file")
    return make_factorization(factors, cfg)
