import logging

import numpy as np
import pytest

from vaguelens.corpus import EOS_ID, PAD_ID
from vaguelens.model import ModelConfig, encode, init_params
from vaguelens.training import (
    EpochMetrics,
    TrainConfig,
    TrainingError,
    accuracy_vagueness,
    accuracy_word,
    make_batches,
    read_metrics_csv,
    rmsprop_step,
    sentence_arrays,
    train,
    write_metrics_csv,
)

from helpers import synthetic_corpus


@pytest.fixture(scope="module")
def corpus():
    return synthetic_corpus(seed=21, n_sentences=30, vocab_capacity=200)


def small_config(corpus, **overrides):
    defaults = dict(
        vocab_size=len(corpus.vocabulary),
        emb_dim=6,
        hidden_dim=8,
        fusion_dim=6,
        max_len=20,
    )
    defaults.update(overrides)
    return ModelConfig(**defaults)


class TestTrainConfig:
    def test_defaults(self):
        cfg = TrainConfig()
        assert cfg.epochs == 25
        assert cfg.batch_size == 32
        assert cfg.learning_rate == 1e-3
        assert cfg.rmsprop_decay == 0.9
        assert cfg.rmsprop_epsilon == 1e-8
        assert cfg.shuffle is True

    def test_zero_epochs_forbidden(self):
        with pytest.raises(TrainingError, match="epochs"):
            TrainConfig(epochs=0)

    def test_decay_range(self):
        with pytest.raises(TrainingError):
            TrainConfig(rmsprop_decay=1.0)

    def test_learning_rate_positive(self):
        with pytest.raises(TrainingError):
            TrainConfig(learning_rate=0.0)

    def test_accuracy_range_enforced(self):
        with pytest.raises(TrainingError):
            EpochMetrics(epoch=1, mean_loss=0.0, accuracy_word=1.5, accuracy_vagueness=0.0)


class TestBatching:
    def test_long_sentence_truncated_keeping_eos(self, corpus):
        long_sentence = corpus.sentences[0]
        while len(long_sentence.tokens) <= 12:
            long_sentence = max(corpus.sentences, key=lambda s: len(s.tokens))
        ids, mask, _, _ = sentence_arrays(long_sentence, 8)
        assert mask.sum() == 8
        assert ids[7] == EOS_ID

    def test_sixty_token_sentence_to_fifty(self, corpus, lexicon):
        from vaguelens.corpus import tokenize

        sent = tokenize(" ".join(f"w{i}" for i in range(60)), lexicon)
        ids, mask, _, _ = sentence_arrays(sent, 50)
        assert mask.sum() == 50
        assert ids[49] == EOS_ID

    def test_short_sentence_padded_with_mask(self, corpus, lexicon):
        from vaguelens.corpus import tokenize

        sent = tokenize(" ".join(f"w{i}" for i in range(9)), lexicon)  # 9 + EOS
        ids, mask, _, _ = sentence_arrays(sent, 50)
        assert mask.sum() == 10
        assert (ids[10:] == PAD_ID).all()

    def test_same_seed_same_order(self, corpus):
        cfg = small_config(corpus)
        b1 = make_batches(corpus, cfg, batch_size=8, rng=np.random.default_rng(5))
        b2 = make_batches(corpus, cfg, batch_size=8, rng=np.random.default_rng(5))
        for x, y in zip(b1, b2):
            np.testing.assert_array_equal(x.ids, y.ids)

    def test_no_rng_keeps_corpus_order(self, corpus):
        cfg = small_config(corpus)
        batches = make_batches(corpus, cfg, batch_size=len(corpus.sentences))
        first = corpus.sentences[0]
        np.testing.assert_array_equal(
            batches[0].ids[0][: len(first.tokens)],
            [t.vocab_id for t in first.tokens],
        )

    def test_batch_count(self, corpus):
        cfg = small_config(corpus)
        batches = make_batches(corpus, cfg, batch_size=8)
        assert len(batches) == (len(corpus.sentences) + 7) // 8


class TestRmsprop:
    def test_zero_gradient_no_change(self):
        params = {"w": np.array([1.0, 2.0])}
        state = {"w": np.zeros(2)}
        grads = {"w": np.zeros(2)}
        applied = rmsprop_step(params, grads, state, TrainConfig())
        assert applied
        np.testing.assert_array_equal(params["w"], [1.0, 2.0])

    def test_first_step_closed_form(self):
        g = 2.0
        params = {"w": np.array([0.0])}
        state = {"w": np.zeros(1)}
        cfg = TrainConfig(learning_rate=1e-3, rmsprop_decay=0.9, rmsprop_epsilon=1e-8)
        rmsprop_step(params, {"w": np.array([g])}, state, cfg)
        expected_delta = -1e-3 * g / (np.sqrt(0.1 * g * g) + 1e-8)
        assert params["w"][0] == pytest.approx(expected_delta, rel=1e-12)
        assert expected_delta == pytest.approx(-0.003162, abs=1e-6)

    def test_two_identical_steps_accumulator(self):
        g = 3.0
        params = {"w": np.array([0.0])}
        state = {"w": np.zeros(1)}
        cfg = TrainConfig()
        rmsprop_step(params, {"w": np.array([g])}, state, cfg)
        rmsprop_step(params, {"w": np.array([g])}, state, cfg)
        assert state["w"][0] == pytest.approx(0.19 * g * g, rel=1e-12)

    def test_non_finite_gradient_skips_step(self, caplog):
        params = {"w": np.array([1.0])}
        state = {"w": np.zeros(1)}
        grads = {"w": np.array([np.nan])}
        with caplog.at_level(logging.WARNING):
            applied = rmsprop_step(params, grads, state, TrainConfig())
        assert not applied
        np.testing.assert_array_equal(params["w"], [1.0])
        np.testing.assert_array_equal(state["w"], [0.0])
        assert any("skipped" in r.message for r in caplog.records)

    def test_skip_list_respected(self):
        params = {"w": np.array([1.0]), "frozen": np.array([1.0])}
        state = {"w": np.zeros(1), "frozen": np.zeros(1)}
        grads = {"w": np.array([1.0]), "frozen": np.array([1.0])}
        rmsprop_step(params, grads, state, TrainConfig(), skip=("frozen",))
        assert params["w"][0] != 1.0
        assert params["frozen"][0] == 1.0


class TestAccuracies:
    def _record(self, corpus, seed=0):
        cfg = small_config(corpus)
        params = init_params(cfg, np.random.default_rng(seed))
        batches = make_batches(corpus, cfg, batch_size=len(corpus.sentences))
        batch = batches[0]
        return encode(batch.ids, params, cfg, mask=batch.mask), batch, params

    def test_perfect_predictor(self, corpus):
        record, batch, _ = self._record(corpus)
        # overwrite log-probs to put all mass on the target
        word_logp = np.full_like(record.word_logp, -50.0)
        vague_logp = np.full_like(record.vague_logp, -50.0)
        wb, wt = np.nonzero(batch.word_target >= 0)
        word_logp[wb, wt, batch.word_target[wb, wt]] = 0.0
        vb, vt = np.nonzero(batch.vague_target >= 0)
        vague_logp[vb, vt, batch.vague_target[vb, vt]] = 0.0
        record.word_logp = word_logp
        record.vague_logp = vague_logp
        assert accuracy_word(record, batch.word_target) == 1.0
        assert accuracy_vagueness(record, batch.vague_target) == 1.0

    def test_uniform_head_near_chance(self, corpus):
        record, batch, _ = self._record(corpus)
        rng = np.random.default_rng(9)
        v = record.word_logp.shape[-1]
        record.word_logp = np.full_like(record.word_logp, -np.log(v))
        # uniform logits argmax to index 0; random targets hit it ~1/V
        targets = np.where(
            batch.word_target >= 0, rng.integers(0, v, size=batch.word_target.shape), -1
        )
        acc = accuracy_word(record, targets)
        assert acc <= 5.0 / v + 0.05

    def test_all_vague_always_vague(self, corpus):
        record, batch, _ = self._record(corpus)
        vague_logp = np.zeros_like(record.vague_logp)
        vague_logp[:, :, 0] = 0.0
        vague_logp[:, :, 1] = -10.0
        record.vague_logp = vague_logp
        targets = np.where(batch.vague_target >= 0, 0, -1)
        assert accuracy_vagueness(record, targets) == 1.0

    def test_argmax_invariant_under_positive_scaling(self, corpus):
        cfg = small_config(corpus)
        params = init_params(cfg, np.random.default_rng(2))
        batch = make_batches(corpus, cfg, batch_size=len(corpus.sentences))[0]
        record = encode(batch.ids, params, cfg, mask=batch.mask)
        base = accuracy_vagueness(record, batch.vague_target)
        params.vague_w *= 7.5
        scaled = encode(batch.ids, params, cfg, mask=batch.mask)
        assert accuracy_vagueness(scaled, batch.vague_target) == base


class TestTrain:
    def test_empty_corpus_rejected(self, corpus):
        from dataclasses import replace

        empty = replace(corpus, sentences=())
        with pytest.raises(TrainingError, match="empty"):
            train(empty, small_config(corpus), TrainConfig(epochs=1))

    def test_vocab_mismatch_rejected(self, corpus):
        cfg = small_config(corpus, vocab_size=len(corpus.vocabulary) + 1)
        with pytest.raises(TrainingError, match="vocab"):
            train(corpus, cfg, TrainConfig(epochs=1))

    def test_deterministic_metrics_and_params(self, corpus):
        cfg = small_config(corpus)
        tcfg = TrainConfig(epochs=2, seed=13)
        r1 = train(corpus, cfg, tcfg)
        r2 = train(corpus, cfg, tcfg)
        assert r1.metrics == r2.metrics
        for name, arr in r1.params.to_dict().items():
            np.testing.assert_array_equal(arr, r2.params.to_dict()[name])

    def test_epoch_count_and_indices(self, corpus):
        cfg = small_config(corpus)
        result = train(corpus, cfg, TrainConfig(epochs=3, seed=1))
        assert [m.epoch for m in result.metrics] == [1, 2, 3]

    def test_params_stay_finite(self, corpus):
        cfg = small_config(corpus)
        result = train(corpus, cfg, TrainConfig(epochs=3, seed=1))
        for arr in result.params.to_dict().values():
            assert np.isfinite(arr).all()

    def test_epoch_callback_invoked(self, corpus):
        cfg = small_config(corpus)
        seen = []
        train(
            corpus, cfg, TrainConfig(epochs=2, seed=1),
            epoch_callback=lambda epoch, params: seen.append(epoch),
        )
        assert seen == [1, 2]

    def test_freeze_embeddings(self, corpus):
        cfg = small_config(corpus)
        tcfg = TrainConfig(epochs=1, seed=4, freeze_embeddings=True)
        result = train(corpus, cfg, tcfg)
        fresh = init_params(cfg, np.random.default_rng(4))
        np.testing.assert_array_equal(result.params.embedding, fresh.embedding)

    def test_holdout_metrics(self, corpus):
        cfg = small_config(corpus)
        result = train(corpus, cfg, TrainConfig(epochs=1, seed=2, holdout_fraction=0.25))
        assert len(result.metrics) == 1
        assert 0.0 <= result.metrics[0].accuracy_vagueness <= 1.0


class TestMetricsCsv:
    def test_round_trip(self, tmp_path):
        metrics = [
            EpochMetrics(epoch=1, mean_loss=5.25, accuracy_word=0.01, accuracy_vagueness=0.8),
            EpochMetrics(epoch=2, mean_loss=4.0, accuracy_word=0.11, accuracy_vagueness=0.93),
        ]
        path = tmp_path / "metrics.csv"
        write_metrics_csv(metrics, path)
        assert read_metrics_csv(path) == metrics

    def test_header(self, tmp_path):
        path = tmp_path / "metrics.csv"
        write_metrics_csv([], path)
        assert path.read_text().splitlines()[0] == "epoch,loss,acc_word,acc_vague"
