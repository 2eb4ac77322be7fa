"""Baseline optimizer, evaluation harness, benchmark runs, timing studies.

The internal baseline is a deterministic algebraic optimizer: expand the
tensor into its monomial sum-of-cubes, cancel duplicate factors, then run a
greedy pair-rewrite pass (replace factors (a, b) by (z, a xor b xor z) when
the cube sum is preserved and a duplicate cancellation shrinks the list).
It is a stand-in for an external compiler pipeline, and reports always tag
which baseline produced each number.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MissingFixture, ParseError, UnknownId
from .game import GameConfig, Factorization, make_factorization, score_factorization
from .gf2 import (
    BitVec,
    SymmetricTensor,
    load_tensor,
    monomial_factors,
    naive_completion_bound,
    sum_of_cubes,
    tensor_xor,
)
from .search import SearchConfig, play_episode

FIXTURE_NAMES = ("mod5_4", "nc_toff3", "barenco_toff3")

_PACKED_CUBES: dict = {}


def _packed_cube_table(n: int) -> np.ndarray:
    """(2^n, ceil(n^3/8)) uint8 rows; row u = packed bits of cube(u)."""
    tab = _PACKED_CUBES.get(n)
    if tab is None:
        rows = np.stack(
            [np.zeros((n, n, n), np.uint8)]
            + [np.asarray(_cube_entries(BitVec(n, u))) for u in range(1, 1 << n)]
        )
        tab = np.packbits(rows.reshape(1 << n, n * n * n), axis=1)
        _PACKED_CUBES[n] = tab
    return tab


def _cube_entries(u: BitVec) -> np.ndarray:
    from .gf2 import cube

    return cube(u).entries


def cancel_duplicate_factors(factors: list) -> list:
    """Drop factor pairs (cubes cancel mod 2); keeps first-seen order."""
    counts: dict = {}
    for u in factors:
        counts[u.bits] = counts.get(u.bits, 0) + 1
    n = factors[0].n if factors else 1
    out = []
    for u in factors:
        if counts[u.bits] % 2:
            counts[u.bits] = 0  # emit the surviving copy once
            out.append(u)
        elif counts[u.bits]:
            counts[u.bits] = counts[u.bits] % 2
    return out


def _submasks(mask: int):
    """All nonzero submasks of mask."""
    sub = mask
    out = []
    while sub:
        out.append(sub)
        sub = (sub - 1) & mask
    return out


def _greedy_pair_rewrite(n: int, bits_list: list) -> list:
    """One accepted rewrite per restart, looped to fixpoint."""
    tab = _packed_cube_table(n)
    bits_list = list(bits_list)
    improved = True
    while improved:
        improved = False
        present = set(bits_list)
        m = len(bits_list)
        for ia in range(m):
            a = bits_list[ia]
            for ib in range(ia + 1, m):
                b = bits_list[ib]
                union = a | b
                target = tab[a] ^ tab[b]
                zs = [z for z in _submasks(union) if z not in (a, b) and (a ^ b ^ z) != 0]
                if not zs:
                    continue
                zs = np.array(zs)
                ws = (a ^ b) ^ zs
                ok = np.all(tab[zs] ^ tab[ws] == target, axis=1)
                for z, w in zip(zs[ok], ws[ok]):
                    z, w = int(z), int(w)
                    # a rewrite only helps if it creates a duplicate
                    if z not in present and w not in present:
                        continue
                    candidate = [x for idx, x in enumerate(bits_list) if idx not in (ia, ib)]
                    candidate += [z, w]
                    reduced = cancel_duplicate_factors([BitVec(n, x) for x in candidate])
                    if len(reduced) < m:
                        bits_list = [u.bits for u in reduced]
                        improved = True
                        break
                if improved:
                    break
            if improved:
                break
    return bits_list


@dataclass
class BaselineResult:
    t_count: int
    factors: Factorization
    method: str  # "internal" or "imported"


def internal_baseline(t: SymmetricTensor) -> BaselineResult:
    """Monomial expansion -> duplicate cancellation -> greedy pair rewrites."""
    factors = cancel_duplicate_factors(monomial_factors(t))
    bits_list = _greedy_pair_rewrite(t.n, [u.bits for u in factors])
    out = [BitVec(t.n, b) for b in bits_list]
    assert sum_of_cubes(t.n, out) == t
    assert len(out) <= naive_completion_bound(t)
    return BaselineResult(
        t_count=len(out),
        factors=make_factorization(out, GameConfig()),
        method="internal",
    )


@dataclass
class EvalReport:
    rows: list  # dicts: id, n, baseline_t, agent_t, baseline_method, wall_clock
    per_n: dict  # n -> aggregate dict
    overall: dict
    wall_clock_total: float = 0.0


def _aggregate(rows: list) -> dict:
    agent = np.array([r["agent_t"] for r in rows], dtype=np.float64)
    base = np.array([r["baseline_t"] for r in rows], dtype=np.float64)
    k = len(rows)
    mean = float(agent.mean())
    sem = float(agent.std(ddof=1) / math.sqrt(k)) if k > 1 else 0.0
    improved = float((agent < base).mean()) * 100.0
    half = 196.0 * math.sqrt(max(improved / 100.0 * (1 - improved / 100.0), 0.0) / k)
    return {
        "count": k,
        "mean_agent_t": mean,
        "mean_agent_t_ci95": 1.96 * sem,
        "mean_baseline_t": float(base.mean()),
        "improvement_pct": improved,
        "improvement_pct_ci95": half,
    }


def evaluate(
    evaluator,
    eval_set: list,
    game_cfg: GameConfig,
    search_cfg: SearchConfig,
    seed: int = 0,
    ids: list | None = None,
    imported: dict | None = None,
) -> EvalReport:
    """Greedy rollouts vs the baseline over a list of tensors.

    `imported` maps circuit id -> t_count and overrides the internal
    baseline row by row; every key must name a circuit in the set.
    """
    if not eval_set:
        raise ValueError("empty evaluation set")
    if ids is None:
        ids = [f"circuit_{i:05d}" for i in range(len(eval_set))]
    if imported:
        unknown = set(imported) - set(ids)
        if unknown:
            raise UnknownId(f"imported baseline ids not in eval set: {sorted(unknown)}")
    rng = np.random.default_rng(seed)
    rows = []
    t_start = time.perf_counter()
    for cid, tensor in zip(ids, eval_set):
        t0 = time.perf_counter()
        factorization, _ = play_episode(tensor, evaluator, game_cfg, search_cfg, "eval", rng)
        residual = tensor_xor(tensor, sum_of_cubes(tensor.n, factorization.factors))
        if residual.is_zero:
            agent_t = factorization.t_count
        else:
            # Truncated episode: finish with the naive expansion of what is
            # left so the reported count is that of a valid decomposition.
            completed = list(factorization.factors) + monomial_factors(residual)
            agent_t = score_factorization(completed, game_cfg)
        if imported and cid in imported:
            baseline_t, method = imported[cid], "imported"
        else:
            result = internal_baseline(tensor)
            baseline_t, method = result.t_count, result.method
        rows.append(
            {
                "id": cid,
                "n": tensor.n,
                "baseline_t": baseline_t,
                "agent_t": agent_t,
                "baseline_method": method,
                "wall_clock": time.perf_counter() - t0,
            }
        )
    per_n = {}
    for n in sorted({r["n"] for r in rows}):
        per_n[n] = _aggregate([r for r in rows if r["n"] == n])
    overall = _aggregate(rows)
    return EvalReport(rows, per_n, overall, wall_clock_total=time.perf_counter() - t_start)


def import_baseline(path) -> dict:
    """CSV with header `id,t_count` -> {id: t_count}."""
    out = {}
    with open(path) as f:
        lines = f.read().splitlines()
    if not lines or lines[0].strip() != "id,t_count":
        raise ParseError(f"{path}:1: expected header 'id,t_count'")
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(f"{path}:{lineno}: expected 2 fields, got {len(parts)}")
        cid, raw = parts[0].strip(), parts[1].strip()
        try:
            val = int(raw)
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: bad t_count {raw!r}") from exc
        if val < 0:
            raise ParseError(f"{path}:{lineno}: negative t_count")
        out[cid] = val
    return out


def run_benchmarks(
    evaluator_for,
    fixtures_dir,
    search_cfg: SearchConfig,
    game_cfg: GameConfig = GameConfig(),
    seed: int = 0,
    names=FIXTURE_NAMES,
) -> list:
    """Optimize each fixture with gadgets off and on.

    `evaluator_for(game_cfg)` returns the evaluator to use for that setting
    (a trained agent may differ per gadget mode).  Rows: dicts with name,
    gadgets, t_count, wall_clock, baseline_t.
    """
    fixtures_dir = Path(fixtures_dir)
    rows = []
    for name in names:
        path = fixtures_dir / f"{name}.sigt"
        if not path.exists():
            raise MissingFixture(f"missing benchmark fixture {path}")
        tensor = load_tensor(path)
        for gadgets in (False, True):
            cfg = GameConfig(
                gadgets_enabled=gadgets,
                toffoli_cost=game_cfg.toffoli_cost,
                cs_cost=game_cfg.cs_cost,
                max_moves_multiplier=game_cfg.max_moves_multiplier,
                action_enum_max_qubits=game_cfg.action_enum_max_qubits,
            )
            rng = np.random.default_rng(seed)
            t0 = time.perf_counter()
            factorization, _ = play_episode(
                tensor, evaluator_for(cfg), cfg, search_cfg, "eval", rng
            )
            residual = tensor_xor(tensor, sum_of_cubes(tensor.n, factorization.factors))
            if residual.is_zero:
                t_count = factorization.t_count
            else:
                completed = list(factorization.factors) + monomial_factors(residual)
                t_count = score_factorization(completed, cfg)
            rows.append(
                {
                    "name": name,
                    "n": tensor.n,
                    "gadgets": gadgets,
                    "t_count": t_count,
                    "baseline_t": internal_baseline(tensor).t_count,
                    "wall_clock": time.perf_counter() - t0,
                }
            )
    return rows


def format_benchmark_table(rows: list) -> str:
    header = f"{'circuit':<16}{'n':>3}{'gadgets':>9}{'t_count':>9}{'baseline':>10}{'secs':>8}"
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(
            f"{r['name']:<16}{r['n']:>3}{'on' if r['gadgets'] else 'off':>9}"
            f"{r['t_count']:>9}{r['baseline_t']:>10}{r['wall_clock']:>8.2f}"
        )
    return "\n".join(lines)


def timing_benchmark(
    n_list,
    game_cfg: GameConfig,
    search_cfg: SearchConfig,
    model_cfg,
    steps: int = 10,
    batch_size: int = 32,
    seed: int = 0,
) -> list:
    """Per-training-step wall clock vs qubit count.

    Protocol: random circuits with 10n gates, half of them T; one gradient
    step on a batch of their initial positions, timed over >= `steps`
    measured iterations after one warmup.  Also times a single greedy
    evaluation episode per n.
    """
    import torch

    from .model import ModelConfig, TensorGameNet, ModelEvaluator, batch_to_torch, state_to_netinput
    from .game import initial_state
    from .training import _timing_circuit_tensor

    torch.set_num_threads(1)
    rows = []
    for n in n_list:
        # Size the model to n so per-step time reflects the instance size
        # rather than padding to a shared maximum.
        cfg = ModelConfig(
            n_max=n,
            embed_dim=model_cfg.embed_dim,
            layers=model_cfg.layers,
            heads=model_cfg.heads,
            history_len=model_cfg.history_len,
            symmetrize=model_cfg.symmetrize,
        )
        torch.manual_seed(seed)
        net = TensorGameNet(cfg)
        opt = torch.optim.Adam(net.parameters())
        rng = np.random.default_rng(seed)
        tensors = [_timing_circuit_tensor(n, rng) for _ in range(batch_size)]
        inputs = [state_to_netinput(initial_state(t, game_cfg), cfg) for t in tensors]
        batch = batch_to_torch(inputs)
        targets = torch.zeros(batch_size, cfg.n_actions)
        targets[:, 0] = 1.0
        z = torch.zeros(batch_size)

        def one_step():
            logits, value = net(*batch)
            logp = torch.log_softmax(logit_masked(logits), dim=1)
            loss = -(targets * logp).sum(dim=1).mean() + (value - z).pow(2).mean()
            opt.zero_grad()
            loss.backward()
            opt.step()

        def logit_masked(logits):
            return torch.where(torch.isfinite(logits), logits, torch.full_like(logits, -1e9))

        one_step()  # warmup
        times = []
        for _ in range(max(steps, 10)):
            t0 = time.perf_counter()
            one_step()
            times.append(time.perf_counter() - t0)
        evaluator = ModelEvaluator(net)
        t0 = time.perf_counter()
        play_episode(tensors[0], evaluator, game_cfg, search_cfg, "eval", np.random.default_rng(seed))
        eval_time = time.perf_counter() - t0
        rows.append(
            {
                "n": n,
                "step_mean_s": float(np.mean(times)),
                "step_std_s": float(np.std(times)),
                "steps_measured": len(times),
                "eval_episode_s": eval_time,
            }
        )
    return rows


def write_report(report: EvalReport, out_dir) -> None:
    """report.csv + report.json + plotdata/*.csv."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cols = ["id", "n", "baseline_t", "agent_t", "baseline_method", "wall_clock"]
    with open(out_dir / "report.csv", "w") as f:
        f.write(",".join(cols) + "\n")
        for r in report.rows:
            f.write(",".join(str(r[c]) for c in cols) + "\n")
    with open(out_dir / "report.json", "w") as f:
        json.dump(
            {"rows": report.rows, "per_n": report.per_n, "overall": report.overall},
            f,
            indent=2,
        )
    plot = out_dir / "plotdata"
    plot.mkdir(exist_ok=True)
    with open(plot / "avg_tcount_by_n.csv", "w") as f:
        f.write("n,mean_agent_t,ci95,mean_baseline_t\n")
        for n, agg in sorted(report.per_n.items()):
            f.write(
                f"{n},{agg['mean_agent_t']},{agg['mean_agent_t_ci95']},{agg['mean_baseline_t']}\n"
            )
    with open(plot / "improvement_by_n.csv", "w") as f:
        f.write("n,improvement_pct,ci95\n")
        for n, agg in sorted(report.per_n.items()):
            f.write(f"{n},{agg['improvement_pct']},{agg['improvement_pct_ci95']}\n")


def write_timing(rows: list, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write("n,step_mean_s,step_std_s,steps_measured,eval_episode_s\n")
        for r in rows:
            f.write(
                f"{r['n']},{r['step_mean_s']},{r['step_std_s']},"
                f"{r['steps_measured']},{r['eval_episode_s']}\n"
            )


def load_eval_set(directory):
    """Directory of .sigt tensors plus manifest.json -> (ids, tensors, meta)."""
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise MissingFixture(f"no manifest.json in {directory}")
    with open(manifest_path) as f:
        meta = json.load(f)
    ids, tensors = [], []
    for entry in meta["circuits"]:
        path = directory / entry["file"]
        if not path.exists():
            raise MissingFixture(f"manifest names missing tensor file {path}")
        ids.append(entry["id"])
        tensors.append(load_tensor(path))
    return ids, tensors, meta
