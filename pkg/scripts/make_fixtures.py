"""Regenerate the benchmark tensor fixtures under src/tforge/fixtures/.

These are synthetic stand-ins, not the published benchmark netlists: each is
the signature tensor of a small CNOT+CCZ construction whose non-Clifford
content is one or two CCZ gates applied to CNOT-computed parities.  The
mod5_4 construction follows from the identity that a 4-bit number with an
extra flag qubit tests x = c mod 5 via (a xor c)(b xor d); its odd part is a
single CCZ on the parities (q0 xor q2, q1 xor q3, q4).
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from tforge.circuit import Circuit, Gate, signature_tensor, streaming_signature_tensor
from tforge.game import GameConfig, score_factorization
from tforge.gf2 import BitVec, save_tensor_binary, save_tensor_text, sum_of_cubes
from tforge.training import toffoli_pattern

OUT = Path(__file__).resolve().parents[1] / "src" / "tforge" / "fixtures"


def ccz_on_parities(n, parities):
    """CNOT ladder computing each parity on its last wire, CCZ, uncompute."""
    gates = []
    wires = []
    for sup in parities:
        wire = sup[-1]
        wires.append(wire)
        for src in sup[:-1]:
            gates.append(Gate("CNOT", (src, wire)))
    gates.append(Gate("CCZ", tuple(wires)))
    for sup in reversed(parities):
        wire = sup[-1]
        for src in reversed(sup[:-1]):
            gates.append(Gate("CNOT", (src, wire)))
    return Circuit(n, gates)


def generators(n, parities):
    return [
        BitVec(n, sum(1 << q for q in sup)) for sup in parities
    ]


FIXTURES = {
    # one CCZ on parities (q0^q2, q1^q3, q4); 5 qubits
    "mod5_4": (5, [[(0, 2), (1, 3), (4,)]]),
    # two support-disjoint CCZ-on-parity patterns; 7 qubits
    "nc_toff3": (7, [[(0, 3), (1,), (2,)], [(4,), (5,), (6,)]]),
    # two support-disjoint CCZ-on-parity patterns; 8 qubits
    "barenco_toff3": (8, [[(0, 4), (1, 5), (2,)], [(3,), (6,), (7,)]]),
}


def main():
    OUT.mkdir(exist_ok=True)
    for name, (n, pattern_list) in FIXTURES.items():
        circuits = []
        gates = []
        for parities in pattern_list:
            gates.extend(ccz_on_parities(n, parities).gates)
        circuit = Circuit(n, gates)
        t = signature_tensor(circuit)
        assert streaming_signature_tensor(circuit) == t

        # explicit factorization: the 7-combination pattern per CCZ
        factors = []
        for parities in pattern_list:
            factors.extend(toffoli_pattern(*generators(n, parities)))
        assert sum_of_cubes(n, factors) == t
        plain = score_factorization(factors, GameConfig())
        gadget = score_factorization(factors, GameConfig(gadgets_enabled=True))
        assert plain == 7 * len(pattern_list)
        assert gadget == 2 * len(pattern_list)

        header = [
            f"fixture {name}: synthetic stand-in, not the published benchmark netlist",
            f"signature tensor of {len(pattern_list)} CCZ gate(s) on CNOT-computed parities",
            f"known decomposition: {plain} factors plain, cost {gadget} with gadgets",
        ]
        save_tensor_text(t, OUT / f"{name}.sigt", header_comments=header)
        reread = __import__("tforge.gf2", fromlist=["load_tensor"]).load_tensor(OUT / f"{name}.sigt")
        assert reread == t
        print(f"{name}: n={n} triples={len(t.canonical_triples())} plain={plain} gadplay={gadget}")


if __name__ == "__main__":
    main()
