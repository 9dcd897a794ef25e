"""Hidden-state traces: the corpus-wide meta sequence of fusion vectors.

A trace pairs every token of the corpus (sentences concatenated in order,
each ending with its EOS mark) with the model's fusion vector for that
position.  Traces are stored in the ``VLTRACE1`` binary format and are
immutable once loaded; the explorer operates on them read-only.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import EOS_ID, Corpus
from .model import ModelConfig, ModelParams, encode
from .training import make_batches

TRACE_MAGIC = b"VLTRACE1"

# Largest float32 strictly below 1: fusion vectors are tanh outputs in the
# open interval (-1, 1); rounding to float32 could otherwise hit +-1.
_MAX_ABS = np.nextafter(np.float32(1.0), np.float32(0.0))


class TraceError(ValueError):
    """Trace construction or validation failure."""


class TraceFormatError(TraceError):
    """A trace file is malformed."""


class ExportError(TraceError):
    """Checkpoint and corpus disagree on model dimensions."""


@dataclass(frozen=True)
class TraceToken:
    surface: str
    is_vague: bool
    is_eos: bool


@dataclass(frozen=True)
class HiddenTrace:
    """Token records plus the (T, l) matrix of per-token fusion vectors."""

    tokens: tuple[TraceToken, ...]
    vectors: np.ndarray  # float32, shape (T, l)

    def __post_init__(self) -> None:
        if self.vectors.ndim != 2:
            raise TraceError(f"vectors must be 2-D, got shape {self.vectors.shape}")
        if len(self.tokens) != self.vectors.shape[0]:
            raise TraceError(
                f"{len(self.tokens)} tokens but {self.vectors.shape[0]} vectors"
            )
        if self.vectors.dtype != np.float32:
            raise TraceError(f"vectors must be float32, got {self.vectors.dtype}")
        if self.vectors.size and not np.isfinite(self.vectors).all():
            raise TraceError("vectors contain non-finite values")
        if self.vectors.size and np.abs(self.vectors).max() >= 1.0:
            raise TraceError("vectors must lie in the open interval (-1, 1)")

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def n_dims(self) -> int:
        return self.vectors.shape[1]

    @property
    def vague_count(self) -> int:
        return sum(1 for t in self.tokens if t.is_vague)

    @property
    def eos_mask(self) -> np.ndarray:
        return np.array([t.is_eos for t in self.tokens], dtype=bool)


def export_trace(
    params: ModelParams,
    config: ModelConfig,
    corpus: Corpus,
    out_path: str | Path | None = None,
    batch_size: int = 64,
) -> HiddenTrace:
    """Encode every corpus sentence and collect per-token fusion vectors.

    Sentences longer than the model's max length are truncated exactly as
    in training (EOS kept as the final token).  Deterministic: the same
    checkpoint and corpus always produce the same trace bytes.
    """
    if config.vocab_size != len(corpus.vocabulary):
        raise ExportError(
            f"checkpoint vocab_size {config.vocab_size} != corpus vocabulary "
            f"size {len(corpus.vocabulary)}"
        )
    params.validate(config)

    tokens: list[TraceToken] = []
    rows: list[np.ndarray] = []
    batches = make_batches(corpus, config, batch_size=batch_size, rng=None)
    sent_iter = iter(corpus.sentences)
    for batch in batches:
        record = encode(batch.ids, params, config, mask=batch.mask)
        for b in range(batch.ids.shape[0]):
            sentence = next(sent_iter)
            length = int(batch.mask[b].sum())
            toks = sentence.tokens
            if len(toks) > length:  # truncated to max_len during batching
                toks = toks[: length - 1] + (toks[-1],)
            for pos in range(length):
                tokens.append(
                    TraceToken(
                        surface=toks[pos].surface,
                        is_vague=toks[pos].is_vague,
                        is_eos=toks[pos].vocab_id == EOS_ID,
                    )
                )
            rows.append(record.g[b, :length])
    if rows:
        stacked = np.concatenate(rows, axis=0).astype(np.float32)
        vectors = np.clip(stacked, -_MAX_ABS, _MAX_ABS)
    else:
        vectors = np.zeros((0, config.fusion_dim), dtype=np.float32)
    trace = HiddenTrace(tokens=tuple(tokens), vectors=vectors)
    if out_path is not None:
        save_trace(trace, out_path)
    return trace


# ---------------------------------------------------------------------------
# VLTRACE1 format
#
#   magic       8 bytes  b"VLTRACE1"
#   n_dims      u32      vector dimensionality
#   n_tokens    u32
#   token table n_tokens x (u16 surface byte length + UTF-8 bytes + u8 flags)
#               flags: bit0 = vague, bit1 = end-of-sentence mark
#   vectors     n_tokens x n_dims float32 little-endian, row-major
# ---------------------------------------------------------------------------


def save_trace(trace: HiddenTrace, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(TRACE_MAGIC)
        fh.write(struct.pack("<II", trace.n_dims, len(trace)))
        for token in trace.tokens:
            data = token.surface.encode("utf-8")
            flags = (1 if token.is_vague else 0) | (2 if token.is_eos else 0)
            fh.write(struct.pack("<H", len(data)))
            fh.write(data)
            fh.write(struct.pack("<B", flags))
        fh.write(np.ascontiguousarray(trace.vectors, dtype="<f4").tobytes())


def load_trace(path: str | Path) -> HiddenTrace:
    with open(path, "rb") as fh:
        magic = fh.read(len(TRACE_MAGIC))
        if magic != TRACE_MAGIC:
            raise TraceFormatError(f"{path}: bad magic {magic!r}, expected {TRACE_MAGIC!r}")
        header = fh.read(8)
        if len(header) != 8:
            raise TraceFormatError(f"{path}: truncated header")
        n_dims, n_tokens = struct.unpack("<II", header)
        tokens: list[TraceToken] = []
        for _ in range(n_tokens):
            raw_len = fh.read(2)
            if len(raw_len) != 2:
                raise TraceFormatError(f"{path}: truncated token table")
            (length,) = struct.unpack("<H", raw_len)
            entry = fh.read(length + 1)
            if len(entry) != length + 1:
                raise TraceFormatError(f"{path}: truncated token table")
            surface = entry[:length].decode("utf-8")
            flags = entry[length]
            tokens.append(
                TraceToken(
                    surface=surface,
                    is_vague=bool(flags & 1),
                    is_eos=bool(flags & 2),
                )
            )
        expected = 4 * n_dims * n_tokens
        data = fh.read(expected)
        if len(data) != expected:
            raise TraceFormatError(
                f"{path}: vector block holds {len(data)} bytes, expected {expected}"
            )
        if fh.read(1):
            raise TraceFormatError(f"{path}: trailing bytes after vector block")
    vectors = np.frombuffer(data, dtype="<f4").reshape(n_tokens, n_dims).copy()
    try:
        return HiddenTrace(tokens=tuple(tokens), vectors=vectors)
    except TraceError as exc:
        raise TraceFormatError(f"{path}: {exc}") from exc


def trace_debug_json(trace: HiddenTrace) -> str:
    """Human-readable (lossy) JSON rendering of a trace."""
    payload = {
        "n_dims": trace.n_dims,
        "n_tokens": len(trace),
        "tokens": [
            {"surface": t.surface, "is_vague": t.is_vague, "is_eos": t.is_eos}
            for t in trace.tokens
        ],
        "vectors": [[float(v) for v in row] for row in trace.vectors],
    }
    return json.dumps(payload, indent=2)
