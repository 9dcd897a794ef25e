"""Shared builders for synthetic corpora, traces, and brute-force oracles."""

from __future__ import annotations

import numpy as np

from vaguelens.corpus import Corpus, RawDocument, preprocess
from vaguelens.lexicon import VagueLexicon, default_lexicon
from vaguelens.trace import HiddenTrace, TraceToken

# Vague surfaces used when generating synthetic sentences; all are
# members of the default lexicon.
SYNTH_VAGUE = (
    "may",
    "generally",
    "as needed",
    "from time to time",
    "certain",
    "some",
    "usually",
    "possible",
    "among other things",
    "necessary",
)


def synthetic_sentences(
    rng: np.random.Generator,
    n_sentences: int,
    n_word_types: int = 240,
    min_vague: int = 1,
    max_vague: int = 3,
    min_len: int = 6,
    max_len: int = 14,
) -> list[str]:
    """Random sentences over a closed word inventory plus vague phrases."""
    base = [f"word{i:03d}" for i in range(n_word_types)]
    sentences = []
    for _ in range(n_sentences):
        n = int(rng.integers(min_len, max_len))
        words = list(rng.choice(base, size=n))
        for _ in range(int(rng.integers(min_vague, max_vague + 1))):
            pos = int(rng.integers(0, len(words)))
            words.insert(pos, SYNTH_VAGUE[int(rng.integers(0, len(SYNTH_VAGUE)))])
        sentences.append(" ".join(words) + ".")
    return sentences


def synthetic_corpus(
    seed: int = 42,
    n_sentences: int = 200,
    vocab_capacity: int = 300,
    n_docs: int = 10,
    lexicon: VagueLexicon | None = None,
    **kwargs,
) -> Corpus:
    """Fully preprocessed synthetic corpus; every vague surface is in-vocabulary."""
    rng = np.random.default_rng(seed)
    sentences = synthetic_sentences(rng, n_sentences, **kwargs)
    per_doc = max(1, n_sentences // n_docs)
    docs = [
        RawDocument(
            doc_id=f"doc{d}",
            text="\n".join(sentences[d * per_doc : (d + 1) * per_doc]),
        )
        for d in range(n_docs)
    ]
    docs = [d for d in docs if d.text]
    return preprocess(docs, lexicon or default_lexicon(), vocab_capacity=vocab_capacity)


def random_trace(
    seed: int,
    n_tokens: int,
    n_dims: int,
    eos_every: int = 8,
    scale: float = 0.95,
) -> HiddenTrace:
    """Random trace with values in (-scale, scale) and periodic EOS marks."""
    rng = np.random.default_rng(seed)
    vectors = (rng.uniform(-scale, scale, size=(n_tokens, n_dims))).astype(np.float32)
    tokens = tuple(
        TraceToken(
            surface="</s>" if (i + 1) % eos_every == 0 else f"tok{i}",
            is_vague=bool(rng.random() < 0.1),
            is_eos=(i + 1) % eos_every == 0,
        )
        for i in range(n_tokens)
    )
    return HiddenTrace(tokens=tokens, vectors=vectors)


def trace_from_matrix(values, eos_positions: set[int] | None = None) -> HiddenTrace:
    """Trace with hand-picked vector values for exact threshold tests."""
    vectors = np.asarray(values, dtype=np.float32)
    eos_positions = eos_positions or set()
    tokens = tuple(
        TraceToken(
            surface="</s>" if i in eos_positions else f"tok{i}",
            is_vague=False,
            is_eos=i in eos_positions,
        )
        for i in range(vectors.shape[0])
    )
    return HiddenTrace(tokens=tokens, vectors=vectors)


def brute_force_matches(
    trace: HiddenTrace,
    query: tuple[int, ...],
    tau: float,
    max_len: int,
    top_k: int,
    within_sentence: bool = False,
) -> list[tuple[int, int, int, bool]]:
    """Independent oracle: enumerate all O(T^2) spans, filter to maximal runs.

    Returns (start, end, extra_on_count, truncated) tuples in ranked order,
    computed with plain Python loops over the raw matrix.
    """
    g = trace.vectors
    total = len(trace)
    qset = set(query)

    def position_on(t: int) -> bool:
        for j in qset:
            if not g[t][j] > tau:
                return False
        if within_sentence and trace.tokens[t].is_eos:
            return False
        return True

    active = [position_on(t) for t in range(total)]
    # prefix sums make "span fully active" an O(1) check for the O(T^2) scan
    prefix = [0]
    for a in active:
        prefix.append(prefix[-1] + (1 if a else 0))

    def span_active(p: int, q: int) -> bool:
        return prefix[q + 1] - prefix[p] == q - p + 1

    maximal = []
    for p in range(total):
        for q in range(p, total):
            if not span_active(p, q):
                continue
            if p > 0 and active[p - 1]:
                continue
            if q < total - 1 and active[q + 1]:
                continue
            maximal.append((p, q))

    scored = []
    for p, q in maximal:
        truncated = (q - p + 1) > max_len
        end = p + max_len - 1 if truncated else q
        extra = 0
        for j in range(trace.n_dims):
            if j in qset:
                continue
            if all(g[t][j] > tau for t in range(p, end + 1)):
                extra += 1
        scored.append((extra, end - p + 1, p, end, truncated))
    scored.sort(key=lambda r: (r[0], r[1], r[2]))
    return [(p, end, extra, trunc) for extra, _, p, end, trunc in scored[:top_k]]
