from __future__ import annotations

import pytest

from vaguelens.lexicon import default_lexicon
from vaguelens.model import ModelConfig, save_checkpoint
from vaguelens.trace import export_trace, save_trace
from vaguelens.training import TrainConfig, train

from helpers import synthetic_corpus


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon()


@pytest.fixture(scope="session")
def tiny_pipeline(tmp_path_factory):
    """A small end-to-end run shared by trace/server/CLI tests.

    Returns corpus, trained params/config, trace, and on-disk paths.
    """
    root = tmp_path_factory.mktemp("pipeline")
    corpus = synthetic_corpus(seed=7, n_sentences=40, vocab_capacity=200)
    model_config = ModelConfig(
        vocab_size=len(corpus.vocabulary),
        emb_dim=8,
        hidden_dim=12,
        fusion_dim=8,
        max_len=20,
    )
    result = train(corpus, model_config, TrainConfig(epochs=2, seed=3))
    model_path = root / "model.vlmodel"
    save_checkpoint(model_path, result.params, model_config)
    trace = export_trace(result.params, model_config, corpus)
    trace_path = root / "trace.vltrace"
    save_trace(trace, trace_path)
    return {
        "corpus": corpus,
        "model_config": model_config,
        "params": result.params,
        "metrics": result.metrics,
        "trace": trace,
        "model_path": model_path,
        "trace_path": trace_path,
    }
