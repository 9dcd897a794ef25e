"""Corpus preprocessing: ingestion, tokenization, vocabulary, statistics.

Pipeline: raw documents -> sentence split -> tokenization with greedy
longest-match merging of vague phrases -> short-sentence filter ->
frequency vocabulary -> indexed corpus.  The preprocessed corpus is
serialized in the ``VLCORP1`` container format.
"""

from __future__ import annotations

import io
import logging
import re
import struct
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path

from .lexicon import VagueLexicon

logger = logging.getLogger(__name__)

PAD_ID, UNK_ID, EOS_ID = 0, 1, 2
PAD_TOKEN, UNK_TOKEN, EOS_TOKEN = "<pad>", "<unk>", "</s>"
RESERVED_TOKENS = (PAD_TOKEN, UNK_TOKEN, EOS_TOKEN)

MIN_CONTENT_TOKENS = 4  # sentences with 3 content tokens or less are dropped

CORPUS_MAGIC = b"VLCORP1"

# Word characters: unicode letters and digits; underscores and all
# punctuation (including hyphens) are separators and are dropped.
_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)
_SENT_SPLIT_RE = re.compile(r"(?<=[.?!])\s+")


class CorpusError(ValueError):
    """Corpus construction or validation failure."""


class CorpusFormatError(CorpusError):
    """A corpus container file is malformed."""


@dataclass(frozen=True)
class Token:
    """One token of a preprocessed sentence.

    ``surface`` is lowercased; a multi-word vague phrase is joined with
    single spaces into one token.  ``position`` is the token's offset in
    the corpus-wide meta sequence (assigned during indexing, -1 before).
    """

    surface: str
    vocab_id: int = UNK_ID
    is_vague: bool = False
    position: int = -1


@dataclass(frozen=True)
class Sentence:
    """Ordered tokens ending with the end-of-sentence token."""

    tokens: tuple[Token, ...]
    doc_id: str

    @property
    def content_tokens(self) -> tuple[Token, ...]:
        return self.tokens[:-1]

    @property
    def content_len(self) -> int:
        return len(self.tokens) - 1

    def has_vague(self) -> bool:
        return any(t.is_vague for t in self.tokens)


@dataclass(frozen=True)
class Vocabulary:
    """Frequency-ranked vocabulary with reserved ids 0=PAD, 1=UNK, 2=EOS."""

    id_to_word: tuple[str, ...]
    capacity: int

    def __post_init__(self) -> None:
        if self.capacity < len(RESERVED_TOKENS) + 1:
            raise CorpusError(f"vocabulary capacity must be >= 4, got {self.capacity}")
        if len(self.id_to_word) > self.capacity:
            raise CorpusError(
                f"vocabulary holds {len(self.id_to_word)} words, exceeds capacity {self.capacity}"
            )
        if tuple(self.id_to_word[:3]) != RESERVED_TOKENS:
            raise CorpusError("vocabulary must start with the reserved PAD/UNK/EOS tokens")
        if len(set(self.id_to_word)) != len(self.id_to_word):
            raise CorpusError("vocabulary contains duplicate words")

    def __len__(self) -> int:
        return len(self.id_to_word)

    @property
    def word_to_id(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.id_to_word)}

    def lookup(self, surface: str) -> int:
        return self.word_to_id.get(surface, UNK_ID)


@dataclass(frozen=True)
class CorpusStats:
    n_policies: int
    n_sentences: int
    n_tokens: int
    n_vague_tokens: int
    pct_vague: float
    n_sentences_with_vague: int
    pct_sentences_with_vague: float


@dataclass(frozen=True)
class RawDocument:
    doc_id: str
    text: str


@dataclass(frozen=True)
class IngestResult:
    documents: tuple[RawDocument, ...]
    errors: tuple[str, ...]


@dataclass(frozen=True)
class Corpus:
    """Fully preprocessed corpus: indexed sentences plus the vocabulary."""

    vocabulary: Vocabulary
    sentences: tuple[Sentence, ...]
    doc_ids: tuple[str, ...]

    @property
    def n_meta_tokens(self) -> int:
        """Length of the meta word sequence (content tokens plus EOS marks)."""
        return sum(len(s.tokens) for s in self.sentences)


def ingest(manifest_path: str | Path) -> IngestResult:
    """Read raw documents listed in a ``doc_id<TAB>path`` manifest.

    Unreadable or non-UTF-8 documents are skipped; an error line is
    recorded per failure and ingestion continues.
    """
    manifest_path = Path(manifest_path)
    documents: list[RawDocument] = []
    errors: list[str] = []
    lines = manifest_path.read_text(encoding="utf-8").splitlines()
    rows = [ln for ln in lines if ln.strip()]
    if not rows:
        logger.warning("manifest %s lists no documents", manifest_path)
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            errors.append(f"{manifest_path}:{lineno}: expected 'doc_id<TAB>path', got {line!r}")
            continue
        doc_id, rel_path = parts[0].strip(), parts[1].strip()
        doc_path = Path(rel_path)
        if not doc_path.is_absolute():
            doc_path = manifest_path.parent / doc_path
        try:
            text = doc_path.read_text(encoding="utf-8")
        except FileNotFoundError:
            errors.append(f"{doc_id}: file not found: {doc_path}")
            continue
        except UnicodeDecodeError as exc:
            errors.append(f"{doc_id}: not valid UTF-8: {doc_path} ({exc.reason})")
            continue
        documents.append(RawDocument(doc_id=doc_id, text=text))
    if errors:
        logger.warning("ingestion skipped %d document(s)", len(errors))
    return IngestResult(documents=tuple(documents), errors=tuple(errors))


def split_sentences(text: str) -> list[str]:
    """Split text into whitespace-normalized raw sentences.

    Boundaries are newlines and sentence-final punctuation (., ?, !)
    followed by whitespace.  Deterministic and rule-based.
    """
    sentences: list[str] = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        for piece in _SENT_SPLIT_RE.split(line):
            piece = " ".join(piece.split())
            if piece:
                sentences.append(piece)
    return sentences


def split_words(sentence: str) -> list[str]:
    """Lowercase and split on whitespace/punctuation, dropping punctuation."""
    return _WORD_RE.findall(sentence.lower())


def merge_vague_phrases(words: list[str], lexicon: VagueLexicon) -> list[tuple[str, bool]]:
    """Greedy longest-match merge of lexicon phrases into single tokens.

    At each position the longest matching phrase wins; matched words are
    joined with single spaces and flagged vague.
    """
    phrases = lexicon.phrases
    max_len = lexicon.max_phrase_len
    out: list[tuple[str, bool]] = []
    i = 0
    n = len(words)
    while i < n:
        matched = False
        for k in range(min(max_len, n - i), 0, -1):
            candidate = tuple(words[i : i + k])
            if candidate in phrases:
                out.append((" ".join(candidate), True))
                i += k
                matched = True
                break
        if not matched:
            out.append((words[i], False))
            i += 1
    return out


def tokenize(sentence: str, lexicon: VagueLexicon, doc_id: str = "") -> Sentence:
    """Tokenize one raw sentence and append the end-of-sentence token."""
    tokens = [
        Token(surface=surface, is_vague=vague)
        for surface, vague in merge_vague_phrases(split_words(sentence), lexicon)
    ]
    tokens.append(Token(surface=EOS_TOKEN, vocab_id=EOS_ID, is_vague=False))
    return Sentence(tokens=tuple(tokens), doc_id=doc_id)


def filter_short(sentences: list[Sentence]) -> list[Sentence]:
    """Keep only sentences with more than 3 content tokens."""
    return [s for s in sentences if s.content_len >= MIN_CONTENT_TOKENS]


def build_vocabulary(sentences: list[Sentence], capacity: int) -> Vocabulary:
    """Frequency vocabulary: reserved ids, then top words by count.

    Ties break lexicographically.  Merged multi-word vague tokens compete
    for slots like any other token.
    """
    if capacity < len(RESERVED_TOKENS) + 1:
        raise CorpusError(f"vocabulary capacity must be >= 4, got {capacity}")
    counts: Counter[str] = Counter()
    for sent in sentences:
        for token in sent.content_tokens:
            counts[token.surface] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = [w for w, _ in ranked[: capacity - len(RESERVED_TOKENS)]]
    return Vocabulary(id_to_word=RESERVED_TOKENS + tuple(kept), capacity=capacity)


def index_corpus(
    sentences: list[Sentence], vocabulary: Vocabulary, doc_ids: tuple[str, ...]
) -> Corpus:
    """Assign vocabulary ids and meta-sequence positions to every token."""
    word_to_id = vocabulary.word_to_id
    indexed: list[Sentence] = []
    position = 0
    for sent in sentences:
        toks = []
        for token in sent.tokens:
            toks.append(
                replace(
                    token,
                    vocab_id=word_to_id.get(token.surface, UNK_ID),
                    position=position,
                )
            )
            position += 1
        indexed.append(Sentence(tokens=tuple(toks), doc_id=sent.doc_id))
    return Corpus(vocabulary=vocabulary, sentences=tuple(indexed), doc_ids=doc_ids)


def preprocess(
    documents: list[RawDocument] | tuple[RawDocument, ...],
    lexicon: VagueLexicon,
    vocab_capacity: int = 5000,
) -> Corpus:
    """Run the full preprocessing pipeline over raw documents."""
    tokenized: list[Sentence] = []
    for doc in documents:
        for raw in split_sentences(doc.text):
            tokenized.append(tokenize(raw, lexicon, doc_id=doc.doc_id))
    kept = filter_short(tokenized)
    vocabulary = build_vocabulary(kept, vocab_capacity)
    return index_corpus(kept, vocabulary, tuple(d.doc_id for d in documents))


def corpus_stats(corpus: Corpus) -> CorpusStats:
    """Dataset statistics.  EOS tokens do not count as word tokens."""
    n_tokens = 0
    n_vague = 0
    n_sent_vague = 0
    for sent in corpus.sentences:
        n_tokens += sent.content_len
        n_vague += sum(1 for t in sent.content_tokens if t.is_vague)
        if sent.has_vague():
            n_sent_vague += 1
    n_sentences = len(corpus.sentences)
    return CorpusStats(
        n_policies=len(corpus.doc_ids),
        n_sentences=n_sentences,
        n_tokens=n_tokens,
        n_vague_tokens=n_vague,
        pct_vague=round(100.0 * n_vague / n_tokens, 1) if n_tokens else 0.0,
        n_sentences_with_vague=n_sent_vague,
        pct_sentences_with_vague=(
            round(100.0 * n_sent_vague / n_sentences, 1) if n_sentences else 0.0
        ),
    )


def format_stats_table(stats: CorpusStats) -> str:
    """Plain-text statistics table."""
    rows = [
        ("total # of web privacy policies", f"{stats.n_policies:,}"),
        ("total # of sentences", f"{stats.n_sentences:,}"),
        ("total # of word tokens", f"{stats.n_tokens:,}"),
        (
            "total # and % of vague tokens",
            f"{stats.n_vague_tokens:,} ({stats.pct_vague:.1f}%)",
        ),
        (
            "total # and % of sentences that contain at least one vague token",
            f"{stats.n_sentences_with_vague:,} ({stats.pct_sentences_with_vague:.1f}%)",
        ),
    ]
    width = max(len(label) for label, _ in rows)
    return "\n".join(f"{label:<{width}}  {value}" for label, value in rows)


# ---------------------------------------------------------------------------
# VLCORP1 container format
#
#   magic            7 bytes  b"VLCORP1"
#   vocab capacity   u32
#   vocab size       u32, then per word: u16 byte length + UTF-8 bytes
#   surface count    u32, then per surface: u16 byte length + UTF-8 bytes
#   doc count        u32, then per doc id: u16 byte length + UTF-8 bytes
#   sentence count   u32, then per sentence:
#       doc index    u32
#       token count  u32  (includes the trailing EOS token)
#       per token:   u32 surface index + u8 flags (bit0 = vague)
#
# Tokens reference a shared surface table so out-of-vocabulary surfaces
# survive the round trip; vocab ids are recomputed on load.
# ---------------------------------------------------------------------------


def _write_str(buf: io.BufferedIOBase, s: str) -> None:
    data = s.encode("utf-8")
    if len(data) > 0xFFFF:
        raise CorpusError(f"string too long to serialize ({len(data)} bytes)")
    buf.write(struct.pack("<H", len(data)))
    buf.write(data)


def _read_exact(buf: io.BufferedIOBase, n: int) -> bytes:
    data = buf.read(n)
    if len(data) != n:
        raise CorpusFormatError(f"truncated corpus file: wanted {n} bytes, got {len(data)}")
    return data


def _read_str(buf: io.BufferedIOBase) -> str:
    (length,) = struct.unpack("<H", _read_exact(buf, 2))
    return _read_exact(buf, length).decode("utf-8")


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write the corpus in the VLCORP1 container format."""
    surfaces: list[str] = []
    surface_index: dict[str, int] = {}
    for sent in corpus.sentences:
        for token in sent.tokens:
            if token.surface not in surface_index:
                surface_index[token.surface] = len(surfaces)
                surfaces.append(token.surface)
    doc_index = {d: i for i, d in enumerate(corpus.doc_ids)}
    with open(path, "wb") as fh:
        fh.write(CORPUS_MAGIC)
        fh.write(struct.pack("<I", corpus.vocabulary.capacity))
        fh.write(struct.pack("<I", len(corpus.vocabulary)))
        for word in corpus.vocabulary.id_to_word:
            _write_str(fh, word)
        fh.write(struct.pack("<I", len(surfaces)))
        for surface in surfaces:
            _write_str(fh, surface)
        fh.write(struct.pack("<I", len(corpus.doc_ids)))
        for doc_id in corpus.doc_ids:
            _write_str(fh, doc_id)
        fh.write(struct.pack("<I", len(corpus.sentences)))
        for sent in corpus.sentences:
            fh.write(struct.pack("<II", doc_index[sent.doc_id], len(sent.tokens)))
            for token in sent.tokens:
                flags = 1 if token.is_vague else 0
                fh.write(struct.pack("<IB", surface_index[token.surface], flags))


def load_corpus(path: str | Path) -> Corpus:
    """Read a VLCORP1 corpus container."""
    with open(path, "rb") as fh:
        magic = fh.read(len(CORPUS_MAGIC))
        if magic != CORPUS_MAGIC:
            raise CorpusFormatError(f"{path}: bad magic {magic!r}, expected {CORPUS_MAGIC!r}")
        (capacity,) = struct.unpack("<I", _read_exact(fh, 4))
        (vocab_size,) = struct.unpack("<I", _read_exact(fh, 4))
        id_to_word = tuple(_read_str(fh) for _ in range(vocab_size))
        (n_surfaces,) = struct.unpack("<I", _read_exact(fh, 4))
        surfaces = [_read_str(fh) for _ in range(n_surfaces)]
        (n_docs,) = struct.unpack("<I", _read_exact(fh, 4))
        doc_ids = tuple(_read_str(fh) for _ in range(n_docs))
        (n_sentences,) = struct.unpack("<I", _read_exact(fh, 4))
        try:
            vocabulary = Vocabulary(id_to_word=id_to_word, capacity=capacity)
        except CorpusError as exc:
            raise CorpusFormatError(f"{path}: {exc}") from exc
        word_to_id = vocabulary.word_to_id
        sentences: list[Sentence] = []
        position = 0
        for _ in range(n_sentences):
            doc_idx, n_tokens = struct.unpack("<II", _read_exact(fh, 8))
            if doc_idx >= n_docs:
                raise CorpusFormatError(f"{path}: document index {doc_idx} out of range")
            tokens = []
            for _ in range(n_tokens):
                surface_idx, flags = struct.unpack("<IB", _read_exact(fh, 5))
                if surface_idx >= n_surfaces:
                    raise CorpusFormatError(f"{path}: surface index {surface_idx} out of range")
                surface = surfaces[surface_idx]
                tokens.append(
                    Token(
                        surface=surface,
                        vocab_id=word_to_id.get(surface, UNK_ID),
                        is_vague=bool(flags & 1),
                        position=position,
                    )
                )
                position += 1
            sentences.append(Sentence(tokens=tuple(tokens), doc_id=doc_ids[doc_idx]))
        trailing = fh.read(1)
        if trailing:
            raise CorpusFormatError(f"{path}: trailing bytes after sentence records")
    return Corpus(vocabulary=vocabulary, sentences=tuple(sentences), doc_ids=doc_ids)
