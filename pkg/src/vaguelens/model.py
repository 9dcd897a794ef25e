"""Bidirectional GRU multi-task network with hand-written backpropagation.

Architecture: embedding lookup -> forward GRU + backward GRU over the
token sequence -> tanh fusion layer producing one vector per token ->
two bias-free softmax heads (next-word prediction over the vocabulary,
vague/not-vague classification).  The joint loss is a weighted sum of
the two cross-entropy terms over unmasked positions.

Two GRU cell variants are supported:

* ``standard_reset`` (default): the reset gate scales the previous state
  inside the candidate computation (conventional GRU).
* ``as_printed``: the candidate ignores the reset gate entirely; the
  gate is still computed but feeds nothing downstream.

Gradients are computed by explicit backpropagation through time; no
autodiff framework is involved.  Batched forward/backward use one GEMM
per time step so results at real positions are bitwise independent of
trailing padding.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import EOS_ID, PAD_ID, Vocabulary
from .numerics import DimensionError, log_softmax, sigmoid

GRU_VARIANTS = ("standard_reset", "as_printed")
VAGUE_CLASS, NOT_VAGUE_CLASS = 0, 1  # vague-head class indices

CHECKPOINT_MAGIC = b"VLMODEL1"


class ModelError(ValueError):
    """Model configuration or parameter mismatch."""


class CheckpointFormatError(ModelError):
    """A checkpoint file is malformed."""


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    emb_dim: int = 300
    hidden_dim: int = 512
    fusion_dim: int = 200
    max_len: int = 50
    n_classes: int = 2
    word_weight: float = 1.0
    vague_weight: float = 2.0
    gru_variant: str = "standard_reset"

    def __post_init__(self) -> None:
        for name in ("vocab_size", "emb_dim", "hidden_dim", "fusion_dim", "max_len"):
            if getattr(self, name) < 1:
                raise ModelError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.n_classes != 2:
            raise ModelError(f"n_classes must be 2, got {self.n_classes}")
        if self.word_weight < 0 or self.vague_weight < 0:
            raise ModelError("loss weights must be nonnegative")
        if self.gru_variant not in GRU_VARIANTS:
            raise ModelError(
                f"gru_variant must be one of {GRU_VARIANTS}, got {self.gru_variant!r}"
            )


@dataclass
class GruParams:
    """One direction's gate parameters.  w_*: (d, D), u_*: (d, d), b_*: (d,)."""

    w_in: np.ndarray
    u_in: np.ndarray
    b_in: np.ndarray
    w_reset: np.ndarray
    u_reset: np.ndarray
    b_reset: np.ndarray
    w_cell: np.ndarray
    u_cell: np.ndarray
    b_cell: np.ndarray

    FIELDS = ("w_in", "u_in", "b_in", "w_reset", "u_reset", "b_reset", "w_cell", "u_cell", "b_cell")

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.FIELDS}


@dataclass
class ModelParams:
    """All trainable tensors.

    ``embedding`` row 0 is the PAD embedding and is pinned to zero; it is
    never updated.
    """

    embedding: np.ndarray  # (V, D)
    fwd: GruParams
    bwd: GruParams
    fusion_w: np.ndarray  # (l, 2d)
    fusion_b: np.ndarray  # (l,)
    word_w: np.ndarray  # (V, l)
    vague_w: np.ndarray  # (2, l)

    def to_dict(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {"embedding": self.embedding}
        for prefix, gru in (("fwd", self.fwd), ("bwd", self.bwd)):
            for name, arr in gru.arrays().items():
                out[f"{prefix}.{name}"] = arr
        out["fusion.w"] = self.fusion_w
        out["fusion.b"] = self.fusion_b
        out["head.word_w"] = self.word_w
        out["head.vague_w"] = self.vague_w
        return out

    @classmethod
    def from_dict(cls, arrays: dict[str, np.ndarray]) -> "ModelParams":
        def gru(prefix: str) -> GruParams:
            return GruParams(**{name: arrays[f"{prefix}.{name}"] for name in GruParams.FIELDS})

        return cls(
            embedding=arrays["embedding"],
            fwd=gru("fwd"),
            bwd=gru("bwd"),
            fusion_w=arrays["fusion.w"],
            fusion_b=arrays["fusion.b"],
            word_w=arrays["head.word_w"],
            vague_w=arrays["head.vague_w"],
        )

    def validate(self, config: ModelConfig) -> None:
        expected = expected_shapes(config)
        for name, arr in self.to_dict().items():
            if arr.shape != expected[name]:
                raise ModelError(f"{name} has shape {arr.shape}, expected {expected[name]}")
            if not np.isfinite(arr).all():
                raise ModelError(f"{name} contains non-finite values")

    def astype(self, dtype) -> "ModelParams":
        return ModelParams.from_dict(
            {name: arr.astype(dtype) for name, arr in self.to_dict().items()}
        )


def expected_shapes(config: ModelConfig) -> dict[str, tuple[int, ...]]:
    v, d_e, d_h, d_f = config.vocab_size, config.emb_dim, config.hidden_dim, config.fusion_dim
    shapes: dict[str, tuple[int, ...]] = {"embedding": (v, d_e)}
    for prefix in ("fwd", "bwd"):
        for gate in ("in", "reset", "cell"):
            shapes[f"{prefix}.w_{gate}"] = (d_h, d_e)
            shapes[f"{prefix}.u_{gate}"] = (d_h, d_h)
            shapes[f"{prefix}.b_{gate}"] = (d_h,)
    shapes["fusion.w"] = (d_f, 2 * d_h)
    shapes["fusion.b"] = (d_f,)
    shapes["head.word_w"] = (v, d_f)
    shapes["head.vague_w"] = (config.n_classes, d_f)
    return shapes


def init_params(
    config: ModelConfig,
    rng: np.random.Generator,
    dtype=np.float64,
    embedding_table: np.ndarray | None = None,
) -> ModelParams:
    """Seeded parameter initialization.

    Embeddings are standard normal (or the supplied table); all weight
    matrices are uniform(-s, s) with s = 1/sqrt(fan_in); biases start at
    zero.  The PAD embedding row is pinned to zero.
    """
    if embedding_table is not None:
        if embedding_table.shape != (config.vocab_size, config.emb_dim):
            raise ModelError(
                f"embedding table shape {embedding_table.shape} != "
                f"({config.vocab_size}, {config.emb_dim})"
            )
        embedding = embedding_table.astype(dtype, copy=True)
    else:
        embedding = rng.standard_normal((config.vocab_size, config.emb_dim)).astype(dtype)
    embedding[PAD_ID, :] = 0.0

    def uniform(shape: tuple[int, ...]) -> np.ndarray:
        fan_in = shape[-1]
        s = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-s, s, size=shape).astype(dtype)

    def gru() -> GruParams:
        d_h, d_e = config.hidden_dim, config.emb_dim
        return GruParams(
            w_in=uniform((d_h, d_e)),
            u_in=uniform((d_h, d_h)),
            b_in=np.zeros(d_h, dtype=dtype),
            w_reset=uniform((d_h, d_e)),
            u_reset=uniform((d_h, d_h)),
            b_reset=np.zeros(d_h, dtype=dtype),
            w_cell=uniform((d_h, d_e)),
            u_cell=uniform((d_h, d_h)),
            b_cell=np.zeros(d_h, dtype=dtype),
        )

    return ModelParams(
        embedding=embedding,
        fwd=gru(),
        bwd=gru(),
        fusion_w=uniform((config.fusion_dim, 2 * config.hidden_dim)),
        fusion_b=np.zeros(config.fusion_dim, dtype=dtype),
        word_w=uniform((config.vocab_size, config.fusion_dim)),
        vague_w=uniform((config.n_classes, config.fusion_dim)),
    )


def load_embeddings(
    path: str | Path,
    vocabulary: Vocabulary,
    emb_dim: int,
    seed: int = 0,
) -> tuple[np.ndarray, int, int]:
    """Build an embedding table from a ``word v_1 ... v_D`` text file.

    Vocabulary words found in the file get the file vector; the rest get
    i.i.d. standard-normal entries drawn in id order from a generator
    seeded with ``seed``.  The PAD row is always zero.  Returns
    ``(table, n_matched, n_unmatched)``.
    """
    vectors: dict[str, np.ndarray] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            word, values = parts[0], parts[1:]
            if len(values) != emb_dim:
                raise ModelError(
                    f"{path}:{lineno}: embedding for {word!r} has {len(values)} "
                    f"dimensions, expected {emb_dim}"
                )
            vectors[word] = np.array([float(v) for v in values], dtype=np.float64)
    rng = np.random.default_rng(seed)
    table = np.zeros((len(vocabulary), emb_dim), dtype=np.float64)
    matched = unmatched = 0
    for idx, word in enumerate(vocabulary.id_to_word):
        if idx == PAD_ID:
            continue  # PAD embeds to the zero vector regardless of the file
        if word in vectors:
            table[idx] = vectors[word]
            matched += 1
        else:
            table[idx] = rng.standard_normal(emb_dim)
            unmatched += 1
    return table, matched, unmatched


def embed(vocab_id: int, params: ModelParams) -> np.ndarray:
    """Embedding row lookup; PAD maps to the zero vector."""
    if not 0 <= vocab_id < params.embedding.shape[0]:
        raise IndexError(
            f"vocab id {vocab_id} out of range [0, {params.embedding.shape[0]})"
        )
    if vocab_id == PAD_ID:
        return np.zeros(params.embedding.shape[1], dtype=params.embedding.dtype)
    return params.embedding[vocab_id]


@dataclass(frozen=True)
class GruGates:
    input_gate: np.ndarray
    reset_gate: np.ndarray
    cell: np.ndarray


def gru_cell(
    gru_params: GruParams,
    h_prev: np.ndarray,
    x_t: np.ndarray,
    variant: str = "standard_reset",
) -> tuple[np.ndarray, GruGates]:
    """One GRU step.  Accepts single vectors or (batch, dim) arrays.

    input gate  i = sigmoid(W_i x + U_i h + b_i)
    reset gate  r = sigmoid(W_r x + U_r h + b_r)
    cell        c = tanh(W_c x + U_c (r * h) + b_c)   [standard_reset]
                c = tanh(W_c x + U_c h + b_c)          [as_printed; r unused]
    new state   h' = i * c + (1 - i) * h
    """
    if variant not in GRU_VARIANTS:
        raise ModelError(f"unknown gru variant {variant!r}")
    h_prev = np.asarray(h_prev)
    x_t = np.asarray(x_t)
    single = h_prev.ndim == 1
    h = np.atleast_2d(h_prev)
    x = np.atleast_2d(x_t)
    d_h, d_x = gru_params.u_in.shape[0], gru_params.w_in.shape[1]
    if x.shape[1] != d_x or h.shape[1] != d_h or x.shape[0] != h.shape[0]:
        raise DimensionError(
            f"gru_cell: x {x.shape} and h_prev {h.shape} incompatible with "
            f"parameter dims (input {d_x}, hidden {d_h})"
        )
    i = sigmoid(x @ gru_params.w_in.T + h @ gru_params.u_in.T + gru_params.b_in)
    r = sigmoid(x @ gru_params.w_reset.T + h @ gru_params.u_reset.T + gru_params.b_reset)
    if variant == "standard_reset":
        cell_in = (r * h) @ gru_params.u_cell.T
    else:
        cell_in = h @ gru_params.u_cell.T
    c = np.tanh(x @ gru_params.w_cell.T + cell_in + gru_params.b_cell)
    h_new = i * c + (1.0 - i) * h
    if single:
        return h_new[0], GruGates(input_gate=i[0], reset_gate=r[0], cell=c[0])
    return h_new, GruGates(input_gate=i, reset_gate=r, cell=c)


@dataclass
class DirectionTape:
    """Per-position activations of one GRU direction (batch, steps, d)."""

    pre: np.ndarray  # state entering each position
    post: np.ndarray  # state after each position (used by the fusion layer)
    input_gate: np.ndarray
    reset_gate: np.ndarray
    cell: np.ndarray


@dataclass
class ForwardRecord:
    """Everything the forward pass computed, as needed for BPTT and metrics."""

    ids: np.ndarray  # (B, T) int
    mask: np.ndarray  # (B, T) bool
    x: np.ndarray  # (B, T, D) embeddings
    fwd: DirectionTape
    bwd: DirectionTape
    g: np.ndarray  # (B, T, l) fusion vectors
    word_logp: np.ndarray  # (B, T, V)
    vague_logp: np.ndarray  # (B, T, 2)

    @property
    def word_probs(self) -> np.ndarray:
        return np.exp(self.word_logp)

    @property
    def vague_probs(self) -> np.ndarray:
        return np.exp(self.vague_logp)


def _run_direction(
    gru: GruParams,
    x: np.ndarray,
    mask: np.ndarray,
    order: range,
    variant: str,
) -> DirectionTape:
    batch, steps, _ = x.shape
    d_h = gru.u_in.shape[0]
    dtype = x.dtype
    tape = DirectionTape(
        pre=np.zeros((batch, steps, d_h), dtype=dtype),
        post=np.zeros((batch, steps, d_h), dtype=dtype),
        input_gate=np.zeros((batch, steps, d_h), dtype=dtype),
        reset_gate=np.zeros((batch, steps, d_h), dtype=dtype),
        cell=np.zeros((batch, steps, d_h), dtype=dtype),
    )
    state = np.zeros((batch, d_h), dtype=dtype)
    for t in order:
        x_t = np.ascontiguousarray(x[:, t])
        m = mask[:, t][:, None]
        tape.pre[:, t] = state
        h_new, gates = gru_cell(gru, state, x_t, variant)
        state = np.where(m, h_new, state)
        tape.post[:, t] = state
        tape.input_gate[:, t] = gates.input_gate
        tape.reset_gate[:, t] = gates.reset_gate
        tape.cell[:, t] = gates.cell
    return tape


def heads(g_t: np.ndarray, params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Bias-free softmax heads over one (or a batch of) fusion vector(s)."""
    g_t = np.asarray(g_t)
    word_logits = g_t @ params.word_w.T
    vague_logits = g_t @ params.vague_w.T
    return (
        np.exp(log_softmax(word_logits, axis=-1)),
        np.exp(log_softmax(vague_logits, axis=-1)),
    )


def encode(
    sentence_ids: np.ndarray,
    params: ModelParams,
    config: ModelConfig,
    mask: np.ndarray | None = None,
) -> ForwardRecord:
    """Full forward pass over a padded id sequence (or batch of them).

    Initial hidden states are zero.  Padding positions are carried
    through both GRUs unchanged, so values at real positions are bitwise
    independent of how much padding follows.  Sequences longer than
    ``config.max_len`` are rejected (truncation is a batching concern).
    """
    ids = np.atleast_2d(np.asarray(sentence_ids))
    if ids.shape[1] > config.max_len:
        raise ModelError(
            f"sequence length {ids.shape[1]} exceeds max_len {config.max_len}"
        )
    if mask is None:
        mask = ids != PAD_ID
    else:
        mask = np.atleast_2d(np.asarray(mask)).astype(bool)
        if mask.shape != ids.shape:
            raise DimensionError(f"mask shape {mask.shape} != ids shape {ids.shape}")
    if ids.min() < 0 or ids.max() >= config.vocab_size:
        raise IndexError("vocab id out of range")

    x = params.embedding[ids]
    x[ids == PAD_ID] = 0.0
    batch, steps, _ = x.shape

    fwd = _run_direction(params.fwd, x, mask, range(steps), config.gru_variant)
    bwd = _run_direction(params.bwd, x, mask, range(steps - 1, -1, -1), config.gru_variant)

    d_f = config.fusion_dim
    g = np.zeros((batch, steps, d_f), dtype=x.dtype)
    word_logp = np.zeros((batch, steps, config.vocab_size), dtype=x.dtype)
    vague_logp = np.zeros((batch, steps, config.n_classes), dtype=x.dtype)
    for t in range(steps):
        concat = np.concatenate([fwd.post[:, t], bwd.post[:, t]], axis=1)
        g_t = np.tanh(concat @ params.fusion_w.T + params.fusion_b)
        g[:, t] = g_t
        word_logp[:, t] = log_softmax(g_t @ params.word_w.T, axis=-1)
        vague_logp[:, t] = log_softmax(g_t @ params.vague_w.T, axis=-1)
    return ForwardRecord(
        ids=ids, mask=mask, x=x, fwd=fwd, bwd=bwd,
        g=g, word_logp=word_logp, vague_logp=vague_logp,
    )


def joint_loss(
    record: ForwardRecord,
    word_target: np.ndarray,
    vague_target: np.ndarray,
    config: ModelConfig,
) -> float:
    """Weighted negative log likelihood over unmasked positions.

    Targets use -1 for positions that contribute no loss for that task.
    """
    word_target = np.atleast_2d(np.asarray(word_target))
    vague_target = np.atleast_2d(np.asarray(vague_target))
    total = 0.0
    wb, wt = np.nonzero(word_target >= 0)
    total -= config.word_weight * record.word_logp[wb, wt, word_target[wb, wt]].sum()
    vb, vt = np.nonzero(vague_target >= 0)
    total -= config.vague_weight * record.vague_logp[vb, vt, vague_target[vb, vt]].sum()
    return float(total)


def _direction_backward(
    gru: GruParams,
    tape: DirectionTape,
    x: np.ndarray,
    mask: np.ndarray,
    d_post: np.ndarray,
    order: range,
    variant: str,
    grads: dict[str, np.ndarray],
    prefix: str,
    dx: np.ndarray,
) -> None:
    batch, _, d_h = tape.post.shape
    ds = np.zeros((batch, d_h), dtype=x.dtype)
    for t in reversed(order):
        m = mask[:, t][:, None]
        dtotal = ds + d_post[:, t]
        dh_new = np.where(m, dtotal, 0.0)
        ds = np.where(m, 0.0, dtotal)

        x_t = np.ascontiguousarray(x[:, t])
        s_prev = tape.pre[:, t]
        i = tape.input_gate[:, t]
        r = tape.reset_gate[:, t]
        c = tape.cell[:, t]

        di = dh_new * (c - s_prev)
        dc = dh_new * i
        ds_prev = dh_new * (1.0 - i)

        da_c = dc * (1.0 - c * c)
        grads[f"{prefix}.w_cell"] += da_c.T @ x_t
        grads[f"{prefix}.b_cell"] += da_c.sum(axis=0)
        dx_t = da_c @ gru.w_cell
        if variant == "standard_reset":
            hr = r * s_prev
            grads[f"{prefix}.u_cell"] += da_c.T @ hr
            dhr = da_c @ gru.u_cell
            ds_prev += dhr * r
            dr = dhr * s_prev
            da_r = dr * r * (1.0 - r)
            grads[f"{prefix}.w_reset"] += da_r.T @ x_t
            grads[f"{prefix}.u_reset"] += da_r.T @ s_prev
            grads[f"{prefix}.b_reset"] += da_r.sum(axis=0)
            ds_prev += da_r @ gru.u_reset
            dx_t += da_r @ gru.w_reset
        else:
            grads[f"{prefix}.u_cell"] += da_c.T @ s_prev
            ds_prev += da_c @ gru.u_cell

        da_i = di * i * (1.0 - i)
        grads[f"{prefix}.w_in"] += da_i.T @ x_t
        grads[f"{prefix}.u_in"] += da_i.T @ s_prev
        grads[f"{prefix}.b_in"] += da_i.sum(axis=0)
        ds_prev += da_i @ gru.u_in
        dx_t += da_i @ gru.w_in

        dx[:, t] += dx_t
        ds = ds + ds_prev


def backward(
    record: ForwardRecord,
    params: ModelParams,
    config: ModelConfig,
    word_target: np.ndarray,
    vague_target: np.ndarray,
) -> dict[str, np.ndarray]:
    """Analytic gradients of the joint loss for every parameter tensor."""
    word_target = np.atleast_2d(np.asarray(word_target))
    vague_target = np.atleast_2d(np.asarray(vague_target))
    batch, steps, _ = record.x.shape
    d_h = config.hidden_dim
    grads = {name: np.zeros_like(arr) for name, arr in params.to_dict().items()}

    d_post_fwd = np.zeros((batch, steps, d_h), dtype=record.x.dtype)
    d_post_bwd = np.zeros((batch, steps, d_h), dtype=record.x.dtype)
    dx = np.zeros_like(record.x)

    for t in range(steps):
        g_t = record.g[:, t]
        dg = np.zeros_like(g_t)

        wt = word_target[:, t]
        rows = np.nonzero(wt >= 0)[0]
        if rows.size:
            dlogits = np.exp(record.word_logp[rows, t])
            dlogits[np.arange(rows.size), wt[rows]] -= 1.0
            dlogits *= config.word_weight
            grads["head.word_w"] += dlogits.T @ g_t[rows]
            dg[rows] += dlogits @ params.word_w

        vt = vague_target[:, t]
        rows = np.nonzero(vt >= 0)[0]
        if rows.size:
            dlogits = np.exp(record.vague_logp[rows, t])
            dlogits[np.arange(rows.size), vt[rows]] -= 1.0
            dlogits *= config.vague_weight
            grads["head.vague_w"] += dlogits.T @ g_t[rows]
            dg[rows] += dlogits @ params.vague_w

        da_g = dg * (1.0 - g_t * g_t)
        concat = np.concatenate([record.fwd.post[:, t], record.bwd.post[:, t]], axis=1)
        grads["fusion.w"] += da_g.T @ concat
        grads["fusion.b"] += da_g.sum(axis=0)
        dconcat = da_g @ params.fusion_w
        d_post_fwd[:, t] = dconcat[:, :d_h]
        d_post_bwd[:, t] = dconcat[:, d_h:]

    _direction_backward(
        params.fwd, record.fwd, record.x, record.mask, d_post_fwd,
        range(steps), config.gru_variant, grads, "fwd", dx,
    )
    _direction_backward(
        params.bwd, record.bwd, record.x, record.mask, d_post_bwd,
        range(steps - 1, -1, -1), config.gru_variant, grads, "bwd", dx,
    )

    np.add.at(grads["embedding"], record.ids.reshape(-1), dx.reshape(-1, dx.shape[-1]))
    grads["embedding"][PAD_ID, :] = 0.0  # PAD embeds to zero and never trains
    return grads


# ---------------------------------------------------------------------------
# VLMODEL1 checkpoint format
#
#   magic       8 bytes  b"VLMODEL1"
#   config      u32 x 7: emb_dim, hidden_dim, fusion_dim, vocab_size,
#                        max_len, n_classes, gru_variant (0=standard_reset,
#                        1=as_printed)
#   weights     f64 x 2: word_weight, vague_weight
#   tensors     float32 little-endian, row-major, in to_dict() order
# ---------------------------------------------------------------------------


def save_checkpoint(path: str | Path, params: ModelParams, config: ModelConfig) -> None:
    params.validate(config)
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(
            struct.pack(
                "<7I",
                config.emb_dim,
                config.hidden_dim,
                config.fusion_dim,
                config.vocab_size,
                config.max_len,
                config.n_classes,
                GRU_VARIANTS.index(config.gru_variant),
            )
        )
        fh.write(struct.pack("<2d", config.word_weight, config.vague_weight))
        for arr in params.to_dict().values():
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def load_checkpoint(path: str | Path, dtype=np.float64) -> tuple[ModelParams, ModelConfig]:
    """Read a checkpoint.  Stored float32 values upcast exactly to ``dtype``."""
    with open(path, "rb") as fh:
        magic = fh.read(len(CHECKPOINT_MAGIC))
        if magic != CHECKPOINT_MAGIC:
            raise CheckpointFormatError(
                f"{path}: bad magic {magic!r}, expected {CHECKPOINT_MAGIC!r}"
            )
        header = fh.read(28 + 16)
        if len(header) != 44:
            raise CheckpointFormatError(f"{path}: truncated header")
        emb_dim, hidden_dim, fusion_dim, vocab_size, max_len, n_classes, variant_code = (
            struct.unpack("<7I", header[:28])
        )
        word_weight, vague_weight = struct.unpack("<2d", header[28:])
        if variant_code >= len(GRU_VARIANTS):
            raise CheckpointFormatError(f"{path}: unknown gru variant code {variant_code}")
        try:
            config = ModelConfig(
                vocab_size=vocab_size,
                emb_dim=emb_dim,
                hidden_dim=hidden_dim,
                fusion_dim=fusion_dim,
                max_len=max_len,
                n_classes=n_classes,
                word_weight=word_weight,
                vague_weight=vague_weight,
                gru_variant=GRU_VARIANTS[variant_code],
            )
        except ModelError as exc:
            raise CheckpointFormatError(f"{path}: {exc}") from exc
        arrays: dict[str, np.ndarray] = {}
        for name, shape in expected_shapes(config).items():
            count = int(np.prod(shape))
            data = fh.read(4 * count)
            if len(data) != 4 * count:
                raise CheckpointFormatError(f"{path}: truncated tensor {name}")
            arrays[name] = np.frombuffer(data, dtype="<f4").reshape(shape).astype(dtype)
        if fh.read(1):
            raise CheckpointFormatError(f"{path}: trailing bytes after tensors")
    params = ModelParams.from_dict(arrays)
    params.validate(config)
    return params, config


def make_targets(
    ids_row: np.ndarray, vague_row: np.ndarray, mask_row: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Derive per-position targets for one padded sentence.

    Word task: each content position predicts the next token id; the last
    content position predicts EOS; the EOS position itself gets no word
    loss.  Vague task: every real position (content and EOS) is labeled;
    EOS counts as not vague.  -1 marks positions without loss.
    """
    steps = ids_row.shape[0]
    word_t = np.full(steps, -1, dtype=np.int64)
    vague_t = np.full(steps, -1, dtype=np.int64)
    real = np.nonzero(mask_row)[0]
    for pos in real:
        is_eos = ids_row[pos] == EOS_ID
        vague_t[pos] = VAGUE_CLASS if vague_row[pos] else NOT_VAGUE_CLASS
        if not is_eos and pos + 1 < steps and mask_row[pos + 1]:
            word_t[pos] = ids_row[pos + 1]
    return word_t, vague_t
