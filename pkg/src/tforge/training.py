"""Training regimes: synthetic demonstrations, self-play RL, and the mix.

Demonstrations are sampled factor sequences replayed into supervised
(state, next-factor, return-to-go) targets; RL data comes from MCTS
self-play episodes on tensors extracted from random circuits.  A single
sequential loop interleaves episode generation with gradient steps so a
fixed seed reproduces checkpoints bit for bit.
"""

from __future__ import annotations

import collections
import json
import time
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np
import torch

from .circuit import Circuit, Gate, streaming_signature_tensor
from .errors import ConfigConflict, ShapeMismatch
from .game import GameConfig, make_factorization, replay_costs, replay_states
from .gf2 import BitVec, SymmetricTensor, sum_of_cubes
from .model import (
    ModelConfig,
    ModelEvaluator,
    NetInput,
    TensorGameNet,
    batch_to_torch,
    save_checkpoint,
    state_to_netinput,
)
from .search import SearchConfig, play_episode


@dataclass(frozen=True)
class TrainConfig:
    mode: str = "demo"  # demo | rl | demo_rl
    qubit_range: tuple = (5, 8)
    steps: int = 100000
    batch_size: int = 128
    demo_fraction: float = 0.5
    rl_pool_size: int = 100000
    lr: float = 1e-4
    value_loss_weight: float = 1.0
    grad_clip_norm: float = 1.0
    seed: int = 0
    buffer_capacity: int = 100000
    steps_per_episode: int = 4  # gradient steps between self-play episodes
    checkpoint_every: int = 1000
    eval_every: int = 1000
    compile: bool = False

    def __post_init__(self):
        if self.mode not in ("demo", "rl", "demo_rl"):
            raise ValueError(f"mode {self.mode!r}")
        lo, hi = self.qubit_range
        if not 1 <= lo <= hi:
            raise ValueError(f"bad qubit_range {self.qubit_range}")
        if not 0.0 <= self.demo_fraction <= 1.0:
            raise ValueError("demo_fraction outside [0, 1]")


@dataclass(frozen=True)
class DemoConfig:
    p_gadget: float = 0.5
    max_rank_factor: int = 3  # rank uniform in [1, max_rank_factor * n]


@dataclass
class DemoSample:
    net_input: NetInput
    target_action: int  # action index = factor bits - 1
    target_return: float
    n: int


def _random_nonzero(n: int, rng) -> BitVec:
    return BitVec(n, int(rng.integers(1, 1 << n)))


def _independent_triple(n: int, rng):
    while True:
        a, b, c = (_random_nonzero(n, rng) for _ in range(3))
        if a.bits != b.bits and c.bits not in (0, a.bits, b.bits, a.bits ^ b.bits):
            return a, b, c


def toffoli_pattern(a: BitVec, b: BitVec, c: BitVec) -> list:
    return [a, b, a ^ b, c, a ^ c, b ^ c, a ^ b ^ c]


def gen_demo(n: int, game_cfg: GameConfig, rng, demo_cfg: DemoConfig = DemoConfig()):
    """Random (tensor, factorization) pair; factors replay to the zero tensor."""
    rank = int(rng.integers(1, demo_cfg.max_rank_factor * n + 1))
    factors = [_random_nonzero(n, rng) for _ in range(rank)]
    if game_cfg.gadgets_enabled and n >= 3 and rng.random() < demo_cfg.p_gadget:
        pattern = toffoli_pattern(*_independent_triple(n, rng))
        start = int(rng.integers(0, len(factors) + 1))
        factors = factors[:start] + pattern + factors[start + 7 :]
    tensor = sum_of_cubes(n, factors)
    return tensor, make_factorization(factors, game_cfg)


def demo_samples(n, game_cfg, model_cfg, rng, demo_cfg=DemoConfig()):
    """One demonstration episode unrolled into supervised samples."""
    tensor, factorization = gen_demo(n, game_cfg, rng, demo_cfg)
    factors = factorization.factors
    states = replay_states(tensor, factors, game_cfg)
    costs, _ = replay_costs(factors, game_cfg)
    suffix = np.concatenate([np.cumsum(costs[::-1])[::-1], [0.0]])
    out = []
    for i, u in enumerate(factors):
        out.append(
            DemoSample(
                net_input=state_to_netinput(states[i], model_cfg),
                target_action=u.bits - 1,
                target_return=-float(suffix[i]),
                n=n,
            )
        )
    return out


def gen_random_circuit(n: int, rng) -> Circuit:
    """Random CNOT+T circuit: G ~ U[5n, 15n] gates, T fraction ~ U[0.2, 0.6]."""
    if n < 2:
        raise ValueError("need n >= 2 for CNOT gates")
    g = int(rng.integers(5 * n, 15 * n + 1))
    frac = float(rng.uniform(0.2, 0.6))
    n_t = int(round(frac * g))
    t_slots = set(rng.choice(g, size=n_t, replace=False).tolist())
    gates = []
    for slot in range(g):
        if slot in t_slots:
            gates.append(Gate("T", (int(rng.integers(0, n)),)))
        else:
            ctrl = int(rng.integers(0, n))
            tgt = int(rng.integers(0, n - 1))
            if tgt >= ctrl:
                tgt += 1
            gates.append(Gate("CNOT", (ctrl, tgt)))
    return Circuit(n, gates)


def _timing_circuit_tensor(n: int, rng) -> SymmetricTensor:
    """Fixed-protocol circuit: 10n gates, half of them T."""
    g = 10 * n
    n_t = g // 2
    t_slots = set(rng.choice(g, size=n_t, replace=False).tolist())
    gates = []
    for slot in range(g):
        if slot in t_slots:
            gates.append(Gate("T", (int(rng.integers(0, n)),)))
        else:
            ctrl = int(rng.integers(0, n))
            tgt = int(rng.integers(0, n - 1))
            if tgt >= ctrl:
                tgt += 1
            gates.append(Gate("CNOT", (ctrl, tgt)))
    return streaming_signature_tensor(Circuit(n, gates))


def build_rl_pool(train_cfg: TrainConfig, rng) -> list:
    """Tensors from random circuits; duplicate T parities cancel during
    extraction (the internal stand-in for an external pre-optimizer);
    zero tensors are dropped and resampled."""
    lo, hi = train_cfg.qubit_range
    pool = []
    while len(pool) < train_cfg.rl_pool_size:
        n = int(rng.integers(lo, hi + 1))
        t = streaming_signature_tensor(gen_random_circuit(max(n, 2), rng))
        if not t.is_zero:
            pool.append(t)
    return pool


class ReplayBuffer:
    """Bounded FIFO of (NetInput, policy target, return target, n)."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._rows = collections.deque(maxlen=capacity)

    def __len__(self):
        return len(self._rows)

    def push(self, row):
        self._rows.append(row)

    def sample(self, batch_size: int, rng):
        if len(self._rows) < batch_size:
            raise ValueError("buffer smaller than batch size")
        idx = rng.integers(0, len(self._rows), size=batch_size)
        return [self._rows[int(i)] for i in idx]


def _batch_tensors(inputs, actions_dim, policy_rows, value_rows):
    t, h, m = batch_to_torch(inputs)
    policy = torch.zeros((len(inputs), actions_dim))
    for row, spec in enumerate(policy_rows):
        if isinstance(spec, int):
            policy[row, spec] = 1.0
        else:
            policy[row, : len(spec)] = torch.from_numpy(np.asarray(spec, dtype=np.float32))
    value = torch.tensor(value_rows, dtype=torch.float32)
    return (t, h, m), policy, value


def loss_fn(logits, value, policy_target, value_target, value_loss_weight):
    """Masked cross-entropy + weighted MSE; returns (total, policy, value)."""
    if logits.shape != policy_target.shape:
        raise ShapeMismatch(f"logits {tuple(logits.shape)} vs target {tuple(policy_target.shape)}")
    safe_logits = torch.where(
        torch.isfinite(logits), logits, torch.full_like(logits, -1e9)
    )
    logp = torch.log_softmax(safe_logits, dim=1)
    policy_loss = -(policy_target * logp).sum(dim=1).mean()
    value_loss = (value - value_target).pow(2).mean()
    total = policy_loss + value_loss_weight * value_loss
    return total, policy_loss, value_loss


class _DemoStream:
    """Streams supervised rows from freshly generated demonstrations."""

    def __init__(self, train_cfg, game_cfg, model_cfg, demo_cfg, rng):
        self.train_cfg = train_cfg
        self.game_cfg = game_cfg
        self.model_cfg = model_cfg
        self.demo_cfg = demo_cfg
        self.rng = rng
        self._queue = collections.deque()

    def draw(self, count: int):
        lo, hi = self.train_cfg.qubit_range
        while len(self._queue) < count:
            n = int(self.rng.integers(lo, hi + 1))
            for s in demo_samples(n, self.game_cfg, self.model_cfg, self.rng, self.demo_cfg):
                self._queue.append(s)
        return [self._queue.popleft() for _ in range(count)]


def train(
    train_cfg: TrainConfig,
    game_cfg: GameConfig,
    search_cfg: SearchConfig,
    model_cfg: ModelConfig,
    run_dir,
    demo_cfg: DemoConfig = DemoConfig(),
    eval_tensors=None,
    eval_ids=None,
    pool=None,
    log=print,
):
    """Run `steps` gradient updates; returns (model, final checkpoint path).

    Writes config.json, metrics.csv, and periodic checkpoints under run_dir.
    Sequential single-worker loop: with a fixed seed the checkpoint stream
    is bit-reproducible.
    """
    if game_cfg.gadgets_enabled and model_cfg.history_len < 7:
        raise ConfigConflict("gadgets need history_len >= 7 so the matcher window is visible")
    lo, hi = train_cfg.qubit_range
    if hi > model_cfg.n_max:
        raise ConfigConflict(f"qubit_range {train_cfg.qubit_range} exceeds n_max {model_cfg.n_max}")

    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    config_echo = {
        "train": asdict(train_cfg),
        "game": asdict(game_cfg),
        "search": asdict(search_cfg),
        "model": asdict(model_cfg),
        "demo": asdict(demo_cfg),
    }
    with open(run_dir / "config.json", "w") as f:
        json.dump(config_echo, f, indent=2, default=list)

    torch.set_num_threads(1)
    torch.manual_seed(train_cfg.seed)
    rng = np.random.default_rng(train_cfg.seed)
    net = TensorGameNet(model_cfg)
    step_net = torch.compile(net) if train_cfg.compile else net
    opt = torch.optim.Adam(net.parameters(), lr=train_cfg.lr)

    if train_cfg.mode == "demo":
        demo_rows = train_cfg.batch_size
    elif train_cfg.mode == "rl":
        demo_rows = 0
    else:
        demo_rows = int(round(train_cfg.demo_fraction * train_cfg.batch_size))
    rl_rows = train_cfg.batch_size - demo_rows

    use_demo = demo_rows > 0
    use_rl = rl_rows > 0  # demo_rl at demo_fraction=1 degenerates to demo
    demo_stream = (
        _DemoStream(train_cfg, game_cfg, model_cfg, demo_cfg, rng) if use_demo else None
    )
    buffer = ReplayBuffer(train_cfg.buffer_capacity) if use_rl else None
    if use_rl and pool is None:
        pool = build_rl_pool(train_cfg, rng)

    metrics_path = run_dir / "metrics.csv"
    with open(metrics_path, "w") as f:
        f.write("step,loss,policy_loss,value_loss,buffer_size,eval_t_count,elapsed_s\n")

    def run_eval(evaluator):
        if not eval_tensors:
            return ""
        counts = []
        for t in eval_tensors:
            fac, _ = play_episode(
                t, evaluator, game_cfg, search_cfg, "eval", np.random.default_rng(train_cfg.seed)
            )
            counts.append(fac.t_count)
        return "|".join(str(c) for c in counts)

    started = time.perf_counter()
    ckpt_path = None
    for step_idx in range(1, train_cfg.steps + 1):
        if use_rl:
            run_episode = (step_idx - 1) % train_cfg.steps_per_episode == 0
            while run_episode or len(buffer) < train_cfg.batch_size:
                tensor = pool[int(rng.integers(0, len(pool)))]
                _, trajectory = play_episode(
                    tensor, ModelEvaluator(net), game_cfg, search_cfg, "train", rng
                )
                for state, visits, ret in trajectory:
                    buffer.push(
                        (state_to_netinput(state, model_cfg), visits, float(ret), state.n)
                    )
                run_episode = False

        inputs, policy_rows, value_rows = [], [], []
        if demo_rows:
            for s in demo_stream.draw(demo_rows):
                inputs.append(s.net_input)
                policy_rows.append(s.target_action)
                value_rows.append(s.target_return)
        if rl_rows:
            for net_input, visits, ret, _n in buffer.sample(rl_rows, rng):
                inputs.append(net_input)
                policy_rows.append(visits)
                value_rows.append(ret)

        batch, policy_target, value_target = _batch_tensors(
            inputs, model_cfg.n_actions, policy_rows, value_rows
        )
        logits, value = step_net(*batch)
        total, policy_loss, value_loss = loss_fn(
            logits, value, policy_target, value_target, train_cfg.value_loss_weight
        )
        opt.zero_grad()
        total.backward()
        torch.nn.utils.clip_grad_norm_(net.parameters(), train_cfg.grad_clip_norm)
        opt.step()
        total, policy_loss, value_loss = (
            total.detach(), policy_loss.detach(), value_loss.detach()
        )

        emit_metrics = (
            step_idx % 50 == 0 or step_idx == 1 or step_idx == train_cfg.steps
        )
        eval_str = ""
        if step_idx % train_cfg.eval_every == 0 or step_idx == train_cfg.steps:
            eval_str = run_eval(ModelEvaluator(net))
            emit_metrics = True
        if emit_metrics:
            with open(metrics_path, "a") as f:
                f.write(
                    f"{step_idx},{float(total):.6f},{float(policy_loss):.6f},"
                    f"{float(value_loss):.6f},{len(buffer) if buffer else 0},"
                    f"{eval_str},{time.perf_counter() - started:.1f}\n"
                )
        if step_idx % train_cfg.checkpoint_every == 0 or step_idx == train_cfg.steps:
            ckpt_path = run_dir / f"checkpoint_{step_idx:08d}.ckpt"
            save_checkpoint(net, model_cfg, ckpt_path)
            if log:
                log(
                    f"step {step_idx}/{train_cfg.steps} loss {float(total):.4f} "
                    f"eval [{eval_str}] elapsed {time.perf_counter() - started:.0f}s"
                )

    final_path = run_dir / "final.ckpt"
    save_checkpoint(net, model_cfg, final_path)
    return net, final_path
