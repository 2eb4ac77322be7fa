#!/usr/bin/env python3
"""
Training a tiny agent on synthetic demonstrations
=================================================

The policy/value network never sees labelled circuits.  Demonstrations are
manufactured backwards: sample random factors, XOR their cubes into a
tensor, and the factor list is a perfect playthrough for that tensor.
Supervised learning on (position, next factor, return-to-go) tuples is
enough for the agent to start solving small instances greedily.  This demo
trains a deliberately tiny model for a few hundred steps and watches it
learn to solve rank-limited 3-qubit tensors.
"""

import tempfile
from pathlib import Path

import numpy as np

from tforge.game import GameConfig
from tforge.gf2 import sum_of_cubes
from tforge.model import ModelConfig, ModelEvaluator
from tforge.search import SearchConfig, play_episode
from tforge.training import TrainConfig, gen_demo, train

game_cfg = GameConfig()
model_cfg = ModelConfig(n_max=3, embed_dim=16, layers=1, heads=2)
train_cfg = TrainConfig(
    mode="demo", qubit_range=(3, 3), steps=600, batch_size=32, seed=0,
    checkpoint_every=600,
)

run_dir = Path(tempfile.mkdtemp(prefix="tforge_demo_"))
print("training 600 steps (tiny model, CPU)...")
net, ckpt = train(train_cfg, game_cfg, SearchConfig(), model_cfg, run_dir)
print("checkpoint:", ckpt)
print("metrics head:")
for line in (run_dir / "metrics.csv").read_text().splitlines()[:4]:
    print("  ", line)

# Score the agent: greedy episodes on fresh random tensors.
net.eval()
evaluator = ModelEvaluator(net)
rng = np.random.default_rng(42)
solved = 0
total_t = 0
trials = 30
for _ in range(trials):
    tensor, reference = gen_demo(3, game_cfg, rng)
    f, _ = play_episode(
        tensor, evaluator, game_cfg, SearchConfig(simulations=24), "eval", rng
    )
    if sum_of_cubes(3, f.factors) == tensor:
        solved += 1
        total_t += f.t_count
print(f"\nsolved {solved}/{trials} random 3-qubit tensors greedily")
if solved:
    print(f"mean T-count over solved: {total_t / solved:.1f}")
