"""Batching, RMSProp optimization, and the epoch training loop."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .corpus import PAD_ID, Corpus, Sentence
from .model import (
    ForwardRecord,
    ModelConfig,
    ModelParams,
    backward,
    encode,
    init_params,
    joint_loss,
    load_embeddings,
    make_targets,
)

logger = logging.getLogger(__name__)


class TrainingError(ValueError):
    """Invalid training configuration or inputs."""


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 25
    batch_size: int = 32
    learning_rate: float = 1e-3
    rmsprop_decay: float = 0.9
    rmsprop_epsilon: float = 1e-8
    seed: int = 0
    shuffle: bool = True
    embeddings_path: str | None = None
    embeddings_seed: int = 0
    freeze_embeddings: bool = False
    holdout_fraction: float = 0.0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise TrainingError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise TrainingError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise TrainingError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0.0 < self.rmsprop_decay < 1.0:
            raise TrainingError(f"rmsprop_decay must be in (0, 1), got {self.rmsprop_decay}")
        if not 0.0 <= self.holdout_fraction < 1.0:
            raise TrainingError(f"holdout_fraction must be in [0, 1), got {self.holdout_fraction}")


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    mean_loss: float  # joint loss per real token position
    accuracy_word: float
    accuracy_vagueness: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.accuracy_word <= 1.0 or not 0.0 <= self.accuracy_vagueness <= 1.0:
            raise TrainingError("accuracies must lie in [0, 1]")


@dataclass(frozen=True)
class Batch:
    ids: np.ndarray  # (B, N) int64
    mask: np.ndarray  # (B, N) bool
    word_target: np.ndarray  # (B, N) int64, -1 where no word loss
    vague_target: np.ndarray  # (B, N) int64, -1 where no vagueness loss


def sentence_arrays(
    sentence: Sentence, max_len: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Pad or truncate one sentence to ``max_len`` and derive its targets.

    Truncation keeps the first ``max_len - 1`` tokens plus the EOS token.
    """
    ids = np.full(max_len, PAD_ID, dtype=np.int64)
    vague = np.zeros(max_len, dtype=bool)
    mask = np.zeros(max_len, dtype=bool)
    tokens = sentence.tokens
    if len(tokens) > max_len:
        tokens = tokens[: max_len - 1] + (tokens[-1],)
    for pos, token in enumerate(tokens):
        ids[pos] = token.vocab_id
        vague[pos] = token.is_vague
        mask[pos] = True
    word_t, vague_t = make_targets(ids, vague, mask)
    return ids, mask, word_t, vague_t


def make_batches(
    corpus_or_sentences: Corpus | Sequence[Sentence],
    model_config: ModelConfig,
    batch_size: int = 32,
    rng: np.random.Generator | None = None,
) -> list[Batch]:
    """Group sentences into padded batches; shuffle order when ``rng`` given."""
    if isinstance(corpus_or_sentences, Corpus):
        sentences: Sequence[Sentence] = corpus_or_sentences.sentences
    else:
        sentences = corpus_or_sentences
    order = np.arange(len(sentences))
    if rng is not None:
        rng.shuffle(order)
    batches: list[Batch] = []
    n = model_config.max_len
    for start in range(0, len(order), batch_size):
        chunk = order[start : start + batch_size]
        rows = [sentence_arrays(sentences[i], n) for i in chunk]
        batches.append(
            Batch(
                ids=np.stack([r[0] for r in rows]),
                mask=np.stack([r[1] for r in rows]),
                word_target=np.stack([r[2] for r in rows]),
                vague_target=np.stack([r[3] for r in rows]),
            )
        )
    return batches


def rmsprop_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: dict[str, np.ndarray],
    config: TrainConfig,
    skip: Sequence[str] = (),
) -> bool:
    """One RMSProp update, in place.

    v <- rho * v + (1 - rho) * grad^2
    p <- p - lr * grad / (sqrt(v) + eps)

    A non-finite gradient anywhere skips the whole step (logged) and
    returns False.  Parameter names in ``skip`` are left untouched.
    """
    for name, grad in grads.items():
        if not np.isfinite(grad).all():
            logger.warning("non-finite gradient in %s; step skipped", name)
            return False
    rho = config.rmsprop_decay
    lr = config.learning_rate
    eps = config.rmsprop_epsilon
    for name, grad in grads.items():
        if name in skip:
            continue
        v = state[name]
        v *= rho
        v += (1.0 - rho) * grad * grad
        params[name] -= lr * grad / (np.sqrt(v) + eps)
    return True


@dataclass
class TrainResult:
    params: ModelParams
    config: ModelConfig
    metrics: list[EpochMetrics] = field(default_factory=list)


def _batch_counts(
    record: ForwardRecord, batch: Batch
) -> tuple[int, int, int, int]:
    """(word correct, word total, vague correct, vague total) for one batch."""
    word_pred = record.word_logp.argmax(axis=-1)
    vague_pred = record.vague_logp.argmax(axis=-1)
    wsel = batch.word_target >= 0
    vsel = batch.vague_target >= 0
    return (
        int((word_pred[wsel] == batch.word_target[wsel]).sum()),
        int(wsel.sum()),
        int((vague_pred[vsel] == batch.vague_target[vsel]).sum()),
        int(vsel.sum()),
    )


def accuracy_word(record: ForwardRecord, word_target: np.ndarray) -> float:
    """Fraction of real positions whose argmax next-word prediction is right."""
    word_target = np.atleast_2d(np.asarray(word_target))
    sel = word_target >= 0
    if not sel.any():
        return 0.0
    pred = record.word_logp.argmax(axis=-1)
    return float((pred[sel] == word_target[sel]).mean())


def accuracy_vagueness(record: ForwardRecord, vague_target: np.ndarray) -> float:
    """Fraction of real positions whose argmax vagueness prediction is right."""
    vague_target = np.atleast_2d(np.asarray(vague_target))
    sel = vague_target >= 0
    if not sel.any():
        return 0.0
    pred = record.vague_logp.argmax(axis=-1)
    return float((pred[sel] == vague_target[sel]).mean())


def _evaluate(
    batches: list[Batch], params: ModelParams, config: ModelConfig
) -> tuple[float, float, float]:
    loss_sum = 0.0
    wc = wt = vc = vt = 0
    for batch in batches:
        record = encode(batch.ids, params, config, mask=batch.mask)
        loss_sum += joint_loss(record, batch.word_target, batch.vague_target, config)
        bw, bwt, bv, bvt = _batch_counts(record, batch)
        wc, wt, vc, vt = wc + bw, wt + bwt, vc + bv, vt + bvt
    positions = sum(int(b.mask.sum()) for b in batches)
    return (
        loss_sum / positions if positions else 0.0,
        wc / wt if wt else 0.0,
        vc / vt if vt else 0.0,
    )


def train(
    corpus: Corpus,
    model_config: ModelConfig,
    train_config: TrainConfig,
    epoch_callback: Callable[[int, ModelParams], None] | None = None,
) -> TrainResult:
    """Train the network with RMSProp for the configured number of epochs.

    Metrics are accumulated over the training batches as the epoch runs
    (a held-out split is used instead when ``holdout_fraction`` > 0).
    Deterministic for a fixed seed: same corpus + configs reproduce the
    same parameters and metrics bit for bit.
    """
    if not corpus.sentences:
        raise TrainingError("cannot train on an empty corpus")
    if model_config.vocab_size != len(corpus.vocabulary):
        raise TrainingError(
            f"model vocab_size {model_config.vocab_size} != corpus vocabulary "
            f"size {len(corpus.vocabulary)}"
        )

    rng = np.random.default_rng(train_config.seed)
    embedding_table = None
    if train_config.embeddings_path is not None:
        embedding_table, matched, unmatched = load_embeddings(
            train_config.embeddings_path,
            corpus.vocabulary,
            model_config.emb_dim,
            seed=train_config.embeddings_seed,
        )
        logger.info(
            "embeddings: %d matched, %d randomly initialized", matched, unmatched
        )
    params = init_params(model_config, rng, embedding_table=embedding_table)

    sentences = list(corpus.sentences)
    eval_batches: list[Batch] | None = None
    if train_config.holdout_fraction > 0.0:
        split_rng = np.random.default_rng(train_config.seed)
        order = np.arange(len(sentences))
        split_rng.shuffle(order)
        n_hold = max(1, int(len(sentences) * train_config.holdout_fraction))
        held = [sentences[i] for i in order[:n_hold]]
        sentences = [sentences[i] for i in order[n_hold:]]
        if not sentences:
            raise TrainingError("holdout fraction leaves no training sentences")
        eval_batches = make_batches(held, model_config, train_config.batch_size)

    param_dict = params.to_dict()
    opt_state = {name: np.zeros_like(arr) for name, arr in param_dict.items()}
    skip = ("embedding",) if train_config.freeze_embeddings else ()

    result = TrainResult(params=params, config=model_config)
    for epoch in range(1, train_config.epochs + 1):
        batches = make_batches(
            sentences,
            model_config,
            train_config.batch_size,
            rng=rng if train_config.shuffle else None,
        )
        loss_sum = 0.0
        positions = 0
        wc = wt = vc = vt = 0
        for batch in batches:
            record = encode(batch.ids, params, model_config, mask=batch.mask)
            loss_sum += joint_loss(record, batch.word_target, batch.vague_target, model_config)
            bw, bwt, bv, bvt = _batch_counts(record, batch)
            wc, wt, vc, vt = wc + bw, wt + bwt, vc + bv, vt + bvt
            positions += int(batch.mask.sum())
            grads = backward(record, params, model_config, batch.word_target, batch.vague_target)
            rmsprop_step(param_dict, grads, opt_state, train_config, skip=skip)
        if eval_batches is not None:
            mean_loss, acc_w, acc_v = _evaluate(eval_batches, params, model_config)
        else:
            mean_loss = loss_sum / positions if positions else 0.0
            acc_w = wc / wt if wt else 0.0
            acc_v = vc / vt if vt else 0.0
        metrics = EpochMetrics(
            epoch=epoch,
            mean_loss=mean_loss,
            accuracy_word=acc_w,
            accuracy_vagueness=acc_v,
        )
        result.metrics.append(metrics)
        logger.info(
            "epoch %d: loss %.4f, acc_word %.4f, acc_vague %.4f",
            epoch, mean_loss, acc_w, acc_v,
        )
        if epoch_callback is not None:
            epoch_callback(epoch, params)
    return result


def write_metrics_csv(metrics: Sequence[EpochMetrics], path: str | Path) -> None:
    """One CSV row per epoch: epoch,loss,acc_word,acc_vague."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss", "acc_word", "acc_vague"])
        for m in metrics:
            writer.writerow(
                [m.epoch, repr(m.mean_loss), repr(m.accuracy_word), repr(m.accuracy_vagueness)]
            )


def read_metrics_csv(path: str | Path) -> list[EpochMetrics]:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [
            EpochMetrics(
                epoch=int(row["epoch"]),
                mean_loss=float(row["loss"]),
                accuracy_word=float(row["acc_word"]),
                accuracy_vagueness=float(row["acc_vague"]),
            )
            for row in reader
        ]
