"""Policy/value network over (residual tensor, factor history) and checkpoints.

The tensor is embedded on an n_max^3 position grid; each position (i, j, k)
sees its bit plus the history and mask bits of qubits i, j, k.  Axial
attention runs along two position axes with shared weights, and every block
output is averaged over the cyclic (optionally all 6) permutations of the
three position axes.  No positional encodings anywhere, so the network is
exactly equivariant under qubit permutations.  The policy head scores every
nonzero n_max-bit factor from summed per-qubit features; actions touching
inactive qubits get -inf logits.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, asdict

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .errors import CorruptCheckpoint, ShapeMismatch, VersionMismatch
from .game import GameState

CHECKPOINT_MAGIC = b"TFAG0001"

_CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))
_FULL = ((0, 1, 2), (1, 2, 0), (2, 0, 1), (0, 2, 1), (2, 1, 0), (1, 0, 2))


@dataclass(frozen=True)
class ModelConfig:
    n_max: int = 8
    embed_dim: int = 64
    layers: int = 3
    heads: int = 4
    history_len: int = 7
    symmetrize: str = "cyclic"

    def __post_init__(self):
        if self.embed_dim % self.heads:
            raise ValueError("embed_dim must be divisible by heads")
        if self.symmetrize not in ("cyclic", "full"):
            raise ValueError(f"symmetrize {self.symmetrize!r}")

    @property
    def n_actions(self) -> int:
        return (1 << self.n_max) - 1

    def version_tag(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class NetInput:
    """Padded network input; all arrays are uint8 numpy."""

    tensor: np.ndarray  # (n_max, n_max, n_max)
    history: np.ndarray  # (history_len, n_max), most recent factor last
    mask: np.ndarray  # (n_max,)


def state_to_netinput(state: GameState, cfg: ModelConfig) -> NetInput:
    n = state.n
    if n > cfg.n_max:
        raise ShapeMismatch(f"state has n={n} > n_max={cfg.n_max}")
    m = cfg.n_max
    tensor = np.zeros((m, m, m), dtype=np.uint8)
    tensor[:n, :n, :n] = state.tensor.entries
    history = np.zeros((cfg.history_len, m), dtype=np.uint8)
    recent = state.history[-cfg.history_len :]
    for row, u in enumerate(recent, start=cfg.history_len - len(recent)):
        history[row, :n] = u.to_array()
    mask = np.zeros(m, dtype=np.uint8)
    mask[:n] = 1
    return NetInput(tensor, history, mask)


def batch_to_torch(inputs, device="cpu"):
    t = torch.from_numpy(np.stack([x.tensor for x in inputs])).to(device)
    h = torch.from_numpy(np.stack([x.history for x in inputs])).to(device)
    m = torch.from_numpy(np.stack([x.mask for x in inputs])).to(device)
    return t, h, m


class AxialBlock(nn.Module):
    """Attention along two position axes (shared weights) + MLP, pre-norm.

    qkv projections are computed once and reused for both axes; the two
    attention outputs are summed before the output projection.
    """

    def __init__(self, dim: int, heads: int):
        super().__init__()
        self.heads = heads
        self.norm_attn = nn.LayerNorm(dim)
        self.qkv = nn.Linear(dim, 3 * dim)
        self.proj = nn.Linear(dim, dim)
        self.norm_mlp = nn.LayerNorm(dim)
        self.mlp = nn.Sequential(nn.Linear(dim, 2 * dim), nn.GELU(), nn.Linear(2 * dim, dim))

    @staticmethod
    def _axis_attention(q, k, v, axis: int):
        # q/k/v: (B, n, n, n, heads, hd); attend along position axis `axis`
        perm = [0, 1, 2, 3]
        perm.remove(axis)
        tensors = []
        for x in (q, k, v):
            xp = x.permute(*perm, 4, axis, 5)  # (..., heads, seq, hd)
            tensors.append(xp.reshape(-1, xp.shape[-2], xp.shape[-1]))
        out = F.scaled_dot_product_attention(*tensors)
        b, n1, n2, n3 = q.shape[:4]
        heads, hd = q.shape[4], q.shape[5]
        out = out.view(*(q.shape[p] for p in perm), heads, q.shape[axis], hd)
        out = out.permute(0, 1, 2, 4, 3, 5)  # (B, a, b, attended, heads, hd)
        inv = [0, 0, 0]
        for dst, src_axis in enumerate(perm[1:] + [axis]):
            inv[src_axis - 1] = dst + 1
        out = out.permute(0, *inv, 4, 5).reshape(b, n1, n2, n3, heads * hd)
        return out

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        b, n1, n2, n3, d = h.shape
        x = self.norm_attn(h)
        qkv = self.qkv(x).view(b, n1, n2, n3, 3, self.heads, d // self.heads)
        q, k, v = qkv[..., 0, :, :], qkv[..., 1, :, :], qkv[..., 2, :, :]
        attn = self._axis_attention(q, k, v, 1) + self._axis_attention(q, k, v, 2)
        h = h + self.proj(attn)
        h = h + self.mlp(self.norm_mlp(h))
        return h


class TensorGameNet(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        in_features = 1 + 3 * cfg.history_len + 3
        self.embed = nn.Linear(in_features, cfg.embed_dim)
        self.blocks = nn.ModuleList(AxialBlock(cfg.embed_dim, cfg.heads) for _ in range(cfg.layers))
        self.policy_mlp = nn.Sequential(
            nn.Linear(cfg.embed_dim, cfg.embed_dim),
            nn.GELU(),
            nn.Linear(cfg.embed_dim, 1),
        )
        self.value_mlp = nn.Sequential(
            nn.Linear(cfg.embed_dim, cfg.embed_dim),
            nn.GELU(),
            nn.Linear(cfg.embed_dim, 1),
        )
        # enumeration of all nonzero n_max-bit factors; row u-1 = bits of u
        bits = ((np.arange(1, 1 << cfg.n_max)[:, None] >> np.arange(cfg.n_max)[None, :]) & 1)
        self.register_buffer("action_bits", torch.from_numpy(bits.astype(np.float32)))
        self._perms = _CYCLIC if cfg.symmetrize == "cyclic" else _FULL

    def _symmetrize(self, h: torch.Tensor) -> torch.Tensor:
        views = []
        for p in self._perms:
            axes = (0, 1 + p[0], 1 + p[1], 1 + p[2], 4)
            views.append(h.permute(*axes))
        return torch.stack(views).mean(dim=0)

    def forward(self, tensor, history, mask):
        """tensor (B,m,m,m), history (B,H,m), mask (B,m) -> (logits, value)."""
        cfg = self.cfg
        m = cfg.n_max
        if tensor.shape[1:] != (m, m, m):
            raise ShapeMismatch(f"tensor shape {tuple(tensor.shape[1:])} != {(m, m, m)}")
        if history.shape[1:] != (cfg.history_len, m):
            raise ShapeMismatch(f"history shape {tuple(history.shape[1:])}")
        if mask.shape[1:] != (m,):
            raise ShapeMismatch(f"mask shape {tuple(mask.shape[1:])}")
        dtype = self.embed.weight.dtype
        t = tensor.to(dtype)
        hist = history.to(dtype)
        msk = mask.to(dtype)
        # zero out anything outside the active mask
        t = t * (msk[:, :, None, None] * msk[:, None, :, None] * msk[:, None, None, :])
        hist = hist * msk[:, None, :]

        b = t.shape[0]
        per_qubit = torch.cat([hist.transpose(1, 2), msk[:, :, None]], dim=2)  # (B,m,H+1)
        fi = per_qubit[:, :, None, None, :].expand(b, m, m, m, per_qubit.shape[2])
        fj = per_qubit[:, None, :, None, :].expand(b, m, m, m, per_qubit.shape[2])
        fk = per_qubit[:, None, None, :, :].expand(b, m, m, m, per_qubit.shape[2])
        feats = torch.cat([t[..., None], fi, fj, fk], dim=4)
        h = self.embed(feats)
        for block in self.blocks:
            h = self._symmetrize(block(h))

        q = h.mean(dim=(2, 3))  # (B, m, d) per-qubit features
        action_feats = torch.einsum("an,bnd->bad", self.action_bits.to(dtype), q)
        logits = self.policy_mlp(action_feats).squeeze(-1)  # (B, A)
        illegal = (self.action_bits.to(dtype) @ (1.0 - msk).unsqueeze(-1)).squeeze(-1) > 0
        logits = logits.masked_fill(illegal, float("-inf"))
        value = self.value_mlp(h.mean(dim=(1, 2, 3))).squeeze(-1)
        return logits, value


class ModelEvaluator:
    """Adapts a TensorGameNet to the search evaluator protocol.

    Caches (tensor, history, mask) -> (priors, value) for the lifetime of
    the object; a fresh evaluator should be made per params snapshot.
    """

    def __init__(self, model: TensorGameNet, cache_size: int = 200000):
        self.model = model
        self.cfg = model.cfg
        self.cache = {}
        self.cache_size = cache_size

    def __call__(self, state: GameState):
        inp = state_to_netinput(state, self.cfg)
        key = (inp.tensor.tobytes(), inp.history.tobytes(), inp.mask.tobytes())
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        with torch.inference_mode():
            t, h, m = batch_to_torch([inp])
            logits, value = self.model(t, h, m)
        count = (1 << state.n) - 1
        legal_logits = logits[0, :count]
        priors = torch.softmax(legal_logits, dim=0).numpy().astype(np.float64)
        result = (priors, float(value[0]))
        if len(self.cache) < self.cache_size:
            self.cache[key] = result
        return result


def save_checkpoint(model: TensorGameNet, cfg: ModelConfig, path) -> None:
    """TFAG0001 | u32 config-json length | config json | params | sha256."""
    header = dict(asdict(cfg))
    header["version"] = cfg.version_tag()
    blob = json.dumps(header, sort_keys=True).encode()
    out = bytearray()
    out += CHECKPOINT_MAGIC
    out += struct.pack("<I", len(blob))
    out += blob
    for name, param in model.state_dict().items():
        arr = param.detach().cpu().numpy()
        name_b = name.encode()
        out += struct.pack("<H", len(name_b))
        out += name_b
        out += struct.pack("<BB", arr.ndim, {"float32": 0, "float64": 1}[str(arr.dtype)])
        for dim in arr.shape:
            out += struct.pack("<I", dim)
        out += arr.tobytes()
    out += hashlib.sha256(bytes(out)).digest()
    with open(path, "wb") as f:
        f.write(bytes(out))


def load_checkpoint(path):
    """Returns (model, config); raises CorruptCheckpoint / VersionMismatch."""
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < len(CHECKPOINT_MAGIC) + 36 or raw[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise CorruptCheckpoint(f"{path}: bad magic or truncated file")
    body, digest = raw[:-32], raw[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise CorruptCheckpoint(f"{path}: checksum mismatch")
    off = len(CHECKPOINT_MAGIC)
    (json_len,) = struct.unpack_from("<I", body, off)
    off += 4
    header = json.loads(body[off : off + json_len].decode())
    off += json_len
    version = header.pop("version")
    cfg = ModelConfig(**header)
    if version != cfg.version_tag():
        raise VersionMismatch(f"{path}: version tag {version} != {cfg.version_tag()}")
    model = TensorGameNet(cfg)
    state = {}
    dtypes = {0: np.float32, 1: np.float64}
    try:
        while off < len(body):
            (name_len,) = struct.unpack_from("<H", body, off)
            off += 2
            name = body[off : off + name_len].decode()
            off += name_len
            ndim, dt = struct.unpack_from("<BB", body, off)
            off += 2
            shape = struct.unpack_from(f"<{ndim}I", body, off)
            off += 4 * ndim
            count = int(np.prod(shape)) if ndim else 1
            arr = np.frombuffer(body, dtype=dtypes[dt], count=count, offset=off).reshape(shape)
            off += arr.nbytes
            state[name] = torch.from_numpy(arr.copy())
    except (struct.error, ValueError, KeyError) as exc:
        raise CorruptCheckpoint(f"{path}: malformed parameter record") from exc
    model.load_state_dict(state)
    return model, cfg
