"""Command-line interface: tensor, optimize, train, eval, gen, bench, verify, time.

Exit codes: 0 success, 1 runtime failure, 2 usage error.  Every run writes a
JSON config echo next to its output so the invocation can be reproduced.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .errors import (
    DuplicateOperand,
    MissingHeader,
    QubitOutOfRange,
    TforgeError,
    UnknownGate,
)

_PARSE_ERRORS = (UnknownGate, QubitOutOfRange, DuplicateOperand, MissingHeader)
from .game import GameConfig, load_factorization, make_factorization, save_factorization
from .gf2 import load_tensor, save_tensor_binary, save_tensor_text, sum_of_cubes
from .search import SearchConfig, play_episode, uniform_evaluator


def _fixture_dir() -> Path:
    override = os.environ.get("TFORGE_DATA")
    if override:
        return Path(override)
    return Path(__file__).parent / "fixtures"


def _parse_qubits(spec: str):
    """'5..8' inclusive range, or a single value '5'."""
    if ".." in spec:
        lo_s, hi_s = spec.split("..", 1)
        lo, hi = int(lo_s), int(hi_s)
    else:
        lo = hi = int(spec)
    if not 1 <= lo <= hi:
        raise argparse.ArgumentTypeError(f"bad qubit range {spec!r}")
    return lo, hi


def _echo_config(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, default=str)


def _game_config(args) -> GameConfig:
    return GameConfig(gadgets_enabled=getattr(args, "gadgets", False))


def _search_config(args) -> SearchConfig:
    return SearchConfig(simulations=getattr(args, "sims", 80))


def _load_evaluator(args):
    if getattr(args, "uniform", False):
        return uniform_evaluator
    from .model import ModelEvaluator, load_checkpoint

    model, _ = load_checkpoint(args.agent)
    model.eval()
    return ModelEvaluator(model)


def _load_input_tensor(path: str):
    p = Path(path)
    if p.suffix == ".sigt":
        return load_tensor(p)
    from .circuit import parse_circuit, streaming_signature_tensor

    return streaming_signature_tensor(parse_circuit(p.read_text()))


def cmd_tensor(args) -> int:
    from .circuit import parse_circuit, signature_tensor, streaming_signature_tensor

    circuit = parse_circuit(Path(args.circuit).read_text())
    tensor = streaming_signature_tensor(circuit)
    if args.verify:
        reference = signature_tensor(circuit)
        if tensor != reference:
            print("verification FAILED: streaming and truth-table tensors differ", file=sys.stderr)
            return 1
        print("verification passed: streaming matches truth-table extraction")
    out = Path(args.output)
    if args.binary:
        save_tensor_binary(tensor, out)
    else:
        save_tensor_text(tensor, out)
    _echo_config(out.with_suffix(out.suffix + ".config.json"), {
        "command": "tensor", "circuit": args.circuit, "output": args.output,
        "binary": args.binary, "verify": args.verify,
    })
    print(f"wrote {out} (n={tensor.n}, {len(tensor.canonical_triples())} canonical triples)")
    return 0


def cmd_optimize(args) -> int:
    tensor = _load_input_tensor(args.input)
    game_cfg = _game_config(args)
    search_cfg = _search_config(args)
    evaluator = _load_evaluator(args)
    rng = np.random.default_rng(args.seed)
    factorization, _ = play_episode(tensor, evaluator, game_cfg, search_cfg, "eval", rng)
    residual = sum_of_cubes(tensor.n, factorization.factors)
    solved = residual == tensor
    print(f"t_count={factorization.t_count} factors={len(factorization.factors)} solved={solved}")
    out = Path(args.output)
    save_factorization(factorization, tensor.n, out)
    _echo_config(out.with_suffix(out.suffix + ".config.json"), {
        "command": "optimize", "input": args.input, "output": args.output,
        "agent": getattr(args, "agent", None), "uniform": args.uniform,
        "game": asdict(game_cfg), "search": asdict(search_cfg), "seed": args.seed,
    })
    if args.emit_circuit:
        if not solved:
            print("not solved; refusing to emit a circuit", file=sys.stderr)
            return 1
        from .circuit import (
            Circuit,
            circuit_from_factors,
            phase_polynomial,
            clifford_equivalent,
            serialize_circuit,
            streaming_signature_tensor,
            synthesize_linear,
        )

        circuit = circuit_from_factors(factorization.factors, tensor.n)
        if streaming_signature_tensor(circuit) != tensor:
            print("emitted circuit failed tensor verification", file=sys.stderr)
            return 1
        print("verification passed: emitted circuit reproduces the signature tensor")
        if Path(args.input).suffix != ".sigt":
            from .circuit import parse_circuit

            original = parse_circuit(Path(args.input).read_text())
            # Restore the original's final linear map with a CNOT-only suffix.
            fixup = synthesize_linear(phase_polynomial(original).linear_part)
            circuit = Circuit(tensor.n, tuple(circuit.gates) + tuple(fixup.gates))
            if not clifford_equivalent(phase_polynomial(original), phase_polynomial(circuit)):
                print("emitted circuit is not Clifford-equivalent to the input", file=sys.stderr)
                return 1
            print("verification passed: Clifford-equivalent to the input circuit")
        Path(args.emit_circuit).write_text(serialize_circuit(circuit))
        print(f"wrote {args.emit_circuit}")
    return 0


def cmd_train(args) -> int:
    import torch

    from .bench import load_eval_set
    from .model import ModelConfig
    from .training import TrainConfig, train

    torch.set_num_threads(max(args.workers, 1))
    train_cfg = TrainConfig(
        mode=args.mode,
        qubit_range=_parse_qubits(args.qubits),
        steps=args.steps,
        batch_size=args.batch_size,
        demo_fraction=args.demo_fraction,
        rl_pool_size=args.rl_pool_size,
        lr=args.lr,
        seed=args.seed,
        steps_per_episode=args.steps_per_episode,
        checkpoint_every=args.checkpoint_every,
        eval_every=args.eval_every,
        compile=args.compile,
    )
    model_cfg = ModelConfig(
        n_max=args.n_max,
        embed_dim=args.embed_dim,
        layers=args.layers,
        heads=args.heads,
        history_len=args.history_len,
    )
    game_cfg = _game_config(args)
    search_cfg = _search_config(args)
    eval_tensors = eval_ids = None
    if args.eval_set:
        eval_ids, eval_tensors, _ = load_eval_set(args.eval_set)
    _, final = train(
        train_cfg, game_cfg, search_cfg, model_cfg, args.run_dir,
        eval_tensors=eval_tensors, eval_ids=eval_ids,
    )
    print(f"final checkpoint: {final}")
    return 0


def cmd_eval(args) -> int:
    from .bench import evaluate, import_baseline, load_eval_set, write_report

    ids, tensors, _ = load_eval_set(args.set)
    imported = None
    if args.baseline != "internal":
        imported = import_baseline(args.baseline)
    evaluator = _load_evaluator(args)
    report = evaluate(
        evaluator, tensors, _game_config(args), _search_config(args),
        seed=args.seed, ids=ids, imported=imported,
    )
    out = Path(args.out)
    write_report(report, out)
    _echo_config(out / "config.json", {
        "command": "eval", "set": args.set, "agent": getattr(args, "agent", None),
        "uniform": args.uniform, "baseline": args.baseline, "sims": args.sims,
        "seed": args.seed, "gadgets": args.gadgets,
    })
    o = report.overall
    print(
        f"circuits={o['count']} mean_agent_t={o['mean_agent_t']:.2f}"
        f"±{o['mean_agent_t_ci95']:.2f} baseline_t={o['mean_baseline_t']:.2f} "
        f"improvement={o['improvement_pct']:.1f}%±{o['improvement_pct_ci95']:.1f}"
    )
    return 0


def cmd_gen(args) -> int:
    from .circuit import streaming_signature_tensor
    from .training import gen_random_circuit

    lo, hi = _parse_qubits(args.qubits)
    if lo < 2:
        print("gen needs qubit counts >= 2", file=sys.stderr)
        return 2
    rng = np.random.default_rng(args.seed)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    count = 0
    while count < args.count:
        n = int(rng.integers(lo, hi + 1))
        tensor = streaming_signature_tensor(gen_random_circuit(n, rng))
        if tensor.is_zero:
            continue
        cid = f"circuit_{count:05d}"
        fname = f"{cid}.sigt"
        save_tensor_text(tensor, out / fname)
        entries.append({"id": cid, "n": n, "file": fname})
        count += 1
    manifest = {
        "circuits": entries,
        "seed": args.seed,
        "qubits": f"{lo}..{hi}",
        "count": args.count,
    }
    with open(out / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2)
    _echo_config(out / "config.json", {
        "command": "gen", "qubits": args.qubits, "count": args.count,
        "seed": args.seed, "output": args.output,
    })
    print(f"wrote {args.count} tensors + manifest to {out}")
    return 0


def cmd_bench(args) -> int:
    from .bench import format_benchmark_table, run_benchmarks

    evaluator = _load_evaluator(args)
    rows = run_benchmarks(
        lambda cfg: evaluator, _fixture_dir(), _search_config(args), seed=args.seed
    )
    table = format_benchmark_table(rows)
    print(table)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w") as f:
            f.write("name,n,gadgets,t_count,baseline_t,wall_clock\n")
            for r in rows:
                f.write(
                    f"{r['name']},{r['n']},{int(r['gadgets'])},{r['t_count']},"
                    f"{r['baseline_t']},{r['wall_clock']:.3f}\n"
                )
        _echo_config(out.with_suffix(out.suffix + ".config.json"), {
            "command": "bench", "agent": getattr(args, "agent", None),
            "uniform": args.uniform, "sims": args.sims, "seed": args.seed,
        })
    return 0


def cmd_verify(args) -> int:
    game_cfg = _game_config(args)
    tensor = load_tensor(args.tensor)
    factorization = load_factorization(args.factors, game_cfg)
    residual = sum_of_cubes(tensor.n, factorization.factors)
    rescored = make_factorization(factorization.factors, game_cfg)
    if residual != tensor:
        print("FAIL: factors do not reconstruct the tensor", file=sys.stderr)
        return 1
    if rescored.t_count != factorization.t_count:
        print(
            f"FAIL: stored t_count {factorization.t_count} != replayed {rescored.t_count}",
            file=sys.stderr,
        )
        return 1
    print(f"ok: {len(factorization.factors)} factors, t_count={factorization.t_count}")
    return 0


def cmd_time(args) -> int:
    from .bench import timing_benchmark, write_timing
    from .model import ModelConfig

    n_list = [int(x) for x in args.qubit_list.split(",")]
    model_cfg = ModelConfig(
        n_max=max(n_list), embed_dim=args.embed_dim, layers=args.layers,
        heads=args.heads,
    )
    rows = timing_benchmark(
        n_list, _game_config(args), _search_config(args), model_cfg,
        steps=args.steps, seed=args.seed,
    )
    print("n,step_mean_s,step_std_s,eval_episode_s")
    for r in rows:
        print(f"{r['n']},{r['step_mean_s']:.4f},{r['step_std_s']:.4f},{r['eval_episode_s']:.3f}")
    if args.out:
        write_timing(rows, args.out)
        _echo_config(Path(args.out).with_suffix(".config.json"), {
            "command": "time", "qubits": args.qubit_list, "steps": args.steps,
            "seed": args.seed,
        })
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tforge", description="T-count optimization via tensor decomposition"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, agent=True, search=True):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        if search:
            p.add_argument("--sims", type=int, default=80)
            p.add_argument("--gadgets", action="store_true")
        if agent:
            group = p.add_mutually_exclusive_group(required=True)
            group.add_argument("--agent", help="checkpoint path")
            group.add_argument("--uniform", action="store_true")

    p = sub.add_parser("tensor", help="extract a signature tensor from a circuit")
    p.add_argument("circuit")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--binary", action="store_true")
    p.add_argument("--verify", action="store_true")
    p.set_defaults(fn=cmd_tensor)

    p = sub.add_parser("optimize", help="optimize one tensor or circuit")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--emit-circuit")
    add_common(p)
    p.set_defaults(fn=cmd_optimize)

    p = sub.add_parser("train", help="train an agent")
    p.add_argument("--mode", choices=["demo", "rl", "demo_rl"], required=True)
    p.add_argument("--qubits", required=True, help="lo..hi inclusive")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--run-dir", required=True)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--demo-fraction", type=float, default=0.5)
    p.add_argument("--rl-pool-size", type=int, default=100000)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--steps-per-episode", type=int, default=4)
    p.add_argument("--checkpoint-every", type=int, default=1000)
    p.add_argument("--eval-every", type=int, default=1000)
    p.add_argument("--eval-set")
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--embed-dim", type=int, default=64)
    p.add_argument("--layers", type=int, default=3)
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--history-len", type=int, default=7)
    p.add_argument("--compile", action="store_true")
    add_common(p, agent=False)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="evaluate an agent on a tensor set")
    p.add_argument("--set", required=True)
    p.add_argument("--baseline", default="internal", help="'internal' or a CSV path")
    p.add_argument("--out", required=True)
    add_common(p)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("gen", help="generate a random-circuit tensor set")
    p.add_argument("--qubits", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("-o", "--output", required=True)
    add_common(p, agent=False, search=False)
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("bench", help="run the benchmark fixtures")
    p.add_argument("--out")
    add_common(p)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("verify", help="verify a factorization against a tensor")
    p.add_argument("--tensor", required=True)
    p.add_argument("--factors", required=True)
    p.add_argument("--gadgets", action="store_true")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("time", help="per-step timing across qubit counts")
    p.add_argument("--qubits", dest="qubit_list", required=True, help="comma list, e.g. 5,8,11")
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--embed-dim", type=int, default=16)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--heads", type=int, default=2)
    p.add_argument("--out")
    add_common(p, agent=False)
    p.set_defaults(fn=cmd_time)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except _PARSE_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except TforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
