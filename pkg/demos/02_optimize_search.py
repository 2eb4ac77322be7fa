#!/usr/bin/env python3
"""
T-count optimization as a tensor decomposition game
===================================================

Writing the signature tensor as an XOR of r rank-one "cube" tensors gives a
circuit with exactly r T gates.  Finding a small r is a single-player game:
each move subtracts one cube, and the game ends when the tensor is zero.
This demo plays the game with Monte Carlo tree search on a Toffoli using a
simple hand-written heuristic in place of a learned model, then rebuilds
and verifies a circuit.
"""

import numpy as np

from tforge.circuit import (
    circuit_from_factors,
    parse_circuit,
    serialize_circuit,
    streaming_signature_tensor,
)
from tforge.game import GameConfig
from tforge.gf2 import naive_completion_bound, sum_of_cubes
from tforge.search import SearchConfig, play_episode

circuit = parse_circuit("qubits 3\nCCZ 0 1 2\n")
tensor = streaming_signature_tensor(circuit)
print("naive bound for CCZ:", 7, "T gates (one per odd monomial)")


# Stand-in for a trained network: uniform prior over actions, and "moves
# still needed if we fall back to the naive expansion" as the value guess.
def heuristic_evaluator(state):
    count = 2**state.n - 1
    return np.full(count, 1.0 / count), -float(
        naive_completion_bound(state.tensor)
    )


game_cfg = GameConfig()
search_cfg = SearchConfig(simulations=256)
rng = np.random.default_rng(0)

factorization, _ = play_episode(
    tensor, heuristic_evaluator, game_cfg, search_cfg, "eval", rng
)
solved = sum_of_cubes(tensor.n, factorization.factors) == tensor
print("search found", len(factorization.factors), "factors; solved:", solved)
print("factors (as qubit subsets):")
for u in factorization.factors:
    print("  ", u.support())

# Any exact factor list converts straight back into a CNOT+T circuit.
if solved:
    rebuilt = circuit_from_factors(factorization.factors, tensor.n)
    assert streaming_signature_tensor(rebuilt) == tensor
    print("\nrebuilt circuit:")
    print(serialize_circuit(rebuilt))
