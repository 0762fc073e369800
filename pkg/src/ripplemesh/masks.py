"""Frontier attention masks and the sparse contextual attention reference.

The frontier mask lets a query at face i attend exactly to the faces still
in the frontier queue at emission time (plus itself); everything else gets
an additive -inf logit. The sparse contextual machinery partitions the
full face sequence into blocks and, per query step, combines a compressed
block summary, the raw tokens of the highest-scoring valid blocks, and a
trailing local window. Everything here is plain deterministic arithmetic:
no learned parameters, fixed gates, seeded projections.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .tokenizer import TokenSequence


@dataclass
class FrontierMask:
    """Additive-logit mask over a face window; entries are 0 or -inf.

    Row i (absolute ordinal window_start + i) is open exactly on columns j
    with head_i <= window_start + j <= i. Frontier members that fall before
    the window are clipped and counted per row.
    """

    window_start: int
    logits: np.ndarray           # (L, L) float64 of {0, -inf}
    clipped_per_row: np.ndarray  # (L,) int64

    @property
    def window_len(self) -> int:
        return len(self.logits)

    @property
    def total_clipped(self) -> int:
        return int(self.clipped_per_row.sum())

    def to_dense_i8(self) -> np.ndarray:
        """0 where attendable, -1 sentinel where masked."""
        return np.where(np.isfinite(self.logits), 0, -1).astype(np.int8)

    def row_supports(self) -> list[np.ndarray]:
        """Window-relative finite columns per row."""
        return [np.flatnonzero(np.isfinite(row)).astype(np.int64) for row in self.logits]


def frontier_mask(heads: np.ndarray, window_start: int, window_len: int) -> FrontierMask:
    """Build the frontier mask for faces [window_start, window_start + L).

    ``heads`` holds the queue-front ordinal per face for at least the
    covered range (seeds point at themselves, giving a diagonal-only row).
    """
    heads = np.asarray(heads, dtype=np.int64)
    rows = np.arange(window_start, window_start + window_len)
    if rows[-1] >= len(heads):
        raise ShapeError(f"window [{window_start}, {rows[-1]}] exceeds {len(heads)} faces")
    h = heads[rows]
    lo = np.maximum(h - window_start, 0)
    hi = rows - window_start  # diagonal included: self is always attendable
    cols = np.arange(window_len)
    open_mask = (cols[None, :] >= lo[:, None]) & (cols[None, :] <= hi[:, None])
    logits = np.where(open_mask, 0.0, -np.inf)
    clipped = np.maximum(window_start - h, 0)
    return FrontierMask(window_start, logits, clipped.astype(np.int64))


@dataclass(frozen=True)
class NscaLayout:
    """Block partition of the full face sequence plus causality rules.

    A block is valid at query step t when none of its tokens sit after t;
    a block ending exactly at t is therefore valid. The local window is
    the trailing ``local_kernel`` strictly-past positions. ``local_stride``
    is carried for exports but does not change the reference computation.
    """

    seq_len: int
    block_size: int = 64
    top_k: int = 16
    local_kernel: int = 32
    local_stride: int = 16

    def __post_init__(self):
        if self.seq_len < 0 or self.block_size < 1:
            raise ValueError("need seq_len >= 0 and block_size >= 1")
        if self.top_k < 0 or self.local_kernel < 0:
            raise ValueError("top_k and local_kernel must be >= 0")

    @property
    def n_blocks(self) -> int:
        return -(-self.seq_len // self.block_size) if self.seq_len else 0

    @property
    def block_bounds(self) -> np.ndarray:
        """(n_blocks, 2) half-open [start, end) ranges; last may be partial."""
        starts = np.arange(self.n_blocks, dtype=np.int64) * self.block_size
        ends = np.minimum(starts + self.block_size, self.seq_len)
        return np.stack([starts, ends], axis=1)

    def valid_blocks(self, step: int) -> np.ndarray:
        """Ids of blocks whose every token position is <= step."""
        bounds = self.block_bounds
        return np.flatnonzero(bounds[:, 1] - 1 <= step)

    def block_mask_row(self, step: int) -> np.ndarray:
        """int8 row over blocks: 0 valid, -1 masked."""
        bounds = self.block_bounds
        return np.where(bounds[:, 1] - 1 <= step, 0, -1).astype(np.int8)

    def local_window(self, step: int) -> tuple[int, int]:
        """Half-open strictly-past range [max(0, t - kernel), t)."""
        return max(0, step - self.local_kernel), step


def nsca_plan(
    seq_len_faces: int,
    block_size: int = 64,
    top_k: int = 16,
    local_kernel: int = 32,
    local_stride: int = 16,
) -> NscaLayout:
    """Plan the block partition for a sequence of the given face length."""
    return NscaLayout(seq_len_faces, block_size, top_k, local_kernel, local_stride)


def reference_attention(
    queries: np.ndarray,
    keys: np.ndarray,
    values: np.ndarray,
    mask: np.ndarray | None = None,
) -> np.ndarray:
    """Plain softmax attention: softmax(Q K^T / sqrt(d) + mask) V.

    Rows whose logits are all -inf produce zero output vectors.
    """
    q = np.asarray(queries, dtype=np.float64)
    k = np.asarray(keys, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if q.ndim != 2 or k.ndim != 2 or v.ndim != 2:
        raise ShapeError("queries, keys, values must be 2-D")
    if q.shape[1] != k.shape[1]:
        raise ShapeError(f"query dim {q.shape[1]} != key dim {k.shape[1]}")
    if k.shape[0] != v.shape[0]:
        raise ShapeError(f"{k.shape[0]} keys vs {v.shape[0]} values")
    logits = q @ k.T / np.sqrt(q.shape[1])
    if mask is not None:
        mask = np.asarray(mask, dtype=np.float64)
        if mask.shape != logits.shape:
            raise ShapeError(f"mask shape {mask.shape} != logits shape {logits.shape}")
        logits = logits + mask
    finite = np.isfinite(logits)
    alive = finite.any(axis=1)
    out = np.zeros((q.shape[0], v.shape[1]), dtype=np.float64)
    if alive.any():
        sub = logits[alive]
        rowmax = np.max(np.where(finite[alive], sub, -np.inf), axis=1, keepdims=True)
        w = np.exp(sub - rowmax)
        w[~finite[alive]] = 0.0
        w /= w.sum(axis=1, keepdims=True)
        out[alive] = w @ v
    return out


def face_embeddings(seq: TokenSequence, dim: int = 32, coord_dim: int = 16, seed: int = 0) -> np.ndarray:
    """Deterministic face embeddings for the attention reference.

    Each coordinate token is looked up in a seeded random table, the nine
    per-face vectors are concatenated channel-wise, and a fixed random
    projection maps the result to ``dim``. This stands in for the learned
    pooling stack so mask and selection logic can be exercised end to end.
    """
    rng = np.random.default_rng(seed)
    table = rng.standard_normal((seq.vocab.size, coord_dim))
    proj = rng.standard_normal((9 * coord_dim, dim)) / np.sqrt(9 * coord_dim)
    coords = seq.face_triples().reshape(seq.face_count, 9)
    stacked = table[coords].reshape(seq.face_count, 9 * coord_dim)
    return stacked @ proj


@dataclass
class NscaStepResult:
    step: int
    output: np.ndarray
    selected_blocks: np.ndarray
    valid_blocks: np.ndarray
    local_range: tuple[int, int]


def nsca_reference(
    embeddings: np.ndarray,
    query_steps: np.ndarray | list[int],
    layout: NscaLayout,
    gates: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3),
    queries: np.ndarray | None = None,
) -> list[NscaStepResult]:
    """Deterministic three-branch contextual attention at face granularity.

    Per query step t: (a) attention over mean-pooled compressed keys of the
    valid blocks, (b) attention over the raw tokens of the top-k valid
    blocks scored by q . compressed_key (ties break toward lower block id),
    (c) attention over the strictly-past local window. The output is the
    gate-weighted sum; branches with no context contribute zeros.
    """
    emb = np.asarray(embeddings, dtype=np.float64)
    if emb.ndim != 2:
        raise ShapeError("embeddings must be (seq_len, dim)")
    if len(emb) != layout.seq_len:
        raise ShapeError(f"embeddings length {len(emb)} != layout seq_len {layout.seq_len}")
    if abs(sum(gates) - 1.0) > 1e-9:
        raise ValueError("gates must sum to 1")
    q_src = emb if queries is None else np.asarray(queries, dtype=np.float64)

    bounds = layout.block_bounds
    comp = np.stack([emb[s:e].mean(axis=0) for s, e in bounds]) if layout.n_blocks else np.zeros((0, emb.shape[1]))

    results = []
    for step in (int(s) for s in query_steps):
        q = q_src[step][None, :]
        valid = layout.valid_blocks(step)

        if len(valid):
            branch_c = reference_attention(q, comp[valid], comp[valid])[0]
        else:
            branch_c = np.zeros(emb.shape[1])

        if len(valid) and layout.top_k > 0:
            scores = comp[valid] @ q[0]
            order = np.lexsort((valid, -scores))
            chosen = np.sort(valid[order[:layout.top_k]])
            positions = np.concatenate([np.arange(bounds[b, 0], bounds[b, 1]) for b in chosen])
            branch_s = reference_attention(q, emb[positions], emb[positions])[0]
        else:
            chosen = np.zeros(0, dtype=np.int64)
            branch_s = np.zeros(emb.shape[1])

        lo, hi = layout.local_window(step)
        if hi > lo:
            branch_l = reference_attention(q, emb[lo:hi], emb[lo:hi])[0]
        else:
            branch_l = np.zeros(emb.shape[1])

        out = gates[0] * branch_c + gates[1] * branch_s + gates[2] * branch_l
        results.append(NscaStepResult(step, out, chosen.astype(np.int64), valid.astype(np.int64), (lo, hi)))
    return results
