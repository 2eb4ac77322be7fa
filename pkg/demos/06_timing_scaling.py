#!/usr/bin/env python3
"""
How cost scales with qubit count
================================

Per-training-step time grows with the cube of the qubit count: the hidden
state is an n x n x n grid and axial attention touches every slice.  The
timing harness builds random circuits with 10n gates (half of them T),
sizes the model to n, and times gradient steps.  This demo sweeps a few
sizes; the acceptance sweep uses n = 5, 8, 11.
"""

from tforge.bench import timing_benchmark
from tforge.game import GameConfig
from tforge.model import ModelConfig
from tforge.search import SearchConfig

rows = timing_benchmark(
    [3, 5, 7],
    GameConfig(),
    SearchConfig(simulations=8),
    ModelConfig(n_max=7, embed_dim=16, layers=2, heads=2),
    steps=5,
    batch_size=16,
)

print(f"{'n':>3} {'step mean':>12} {'step std':>11} {'eval episode':>13}")
for r in rows:
    print(
        f"{r['n']:>3} {r['step_mean_s'] * 1e3:>10.1f}ms "
        f"{r['step_std_s'] * 1e3:>9.1f}ms {r['eval_episode_s']:>11.2f}s"
    )
print("\nstrictly increasing:", all(
    a["step_mean_s"] < b["step_mean_s"] for a, b in zip(rows, rows[1:])
))
