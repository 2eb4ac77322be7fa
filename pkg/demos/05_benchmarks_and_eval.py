#!/usr/bin/env python3
"""
Benchmarks, baselines, and evaluation reports
=============================================

Two measurement harnesses live in tforge.bench: the fixed benchmark
fixtures (mod5_4 and two Toffoli networks), and bulk evaluation of an
agent against a deterministic internal baseline over a generated set of
random-circuit tensors.  This demo runs both with the uniform evaluator --
substitute a trained checkpoint via tforge.model.load_checkpoint to see
real numbers.
"""

import tempfile
from pathlib import Path

import numpy as np

from tforge.bench import (
    evaluate,
    format_benchmark_table,
    internal_baseline,
    run_benchmarks,
)
from tforge.circuit import streaming_signature_tensor
from tforge.game import GameConfig
from tforge.search import SearchConfig, uniform_evaluator
from tforge.training import gen_random_circuit

fixtures = Path(__file__).resolve().parent.parent / "src" / "tforge" / "fixtures"

# 1. The named fixtures, with and without gadget scoring.
rows = run_benchmarks(
    lambda cfg: uniform_evaluator, fixtures, SearchConfig(simulations=32)
)
print(format_benchmark_table(rows))

# 2. The internal baseline alone: deduplicate the naive monomial expansion,
# then greedily merge factor pairs.  Deterministic, no search.
rng = np.random.default_rng(3)
t = streaming_signature_tensor(gen_random_circuit(5, rng))
base = internal_baseline(t)
print("\nrandom 5-qubit tensor: baseline T-count", base.t_count)

# 3. Bulk evaluation with confidence intervals.
tensors = []
while len(tensors) < 20:
    t = streaming_signature_tensor(gen_random_circuit(4, rng))
    if not t.is_zero:
        tensors.append(t)
report = evaluate(
    uniform_evaluator, tensors, GameConfig(), SearchConfig(simulations=32), seed=0
)
o = report.overall
print(
    f"\n20 random 4-qubit tensors: agent {o['mean_agent_t']:.1f}"
    f"±{o['mean_agent_t_ci95']:.1f} vs baseline {o['mean_baseline_t']:.1f}; "
    f"improvement {o['improvement_pct']:.1f}%"
)
print("(a uniform prior loses to the baseline; trained agents are the point)")
