"""Vague-term lexicon: the expert-curated phrase list and its file loader.

A lexicon entry is a phrase of one or more lowercase words plus a category.
Multi-word phrases ("among other things") are matched as units by the
tokenizer and become single tokens.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

CATEGORIES = ("Condition", "Generalization", "Modality", "NumericQuantifier")

# Expert-curated vague terms in four categories.  Category sizes are
# 9 / 12 / 8 / 11 for a total of 40 entries.
_DEFAULT_ENTRIES: dict[str, tuple[str, ...]] = {
    "Condition": (
        "depending",
        "necessary",
        "appropriate",
        "inappropriate",
        "as needed",
        "as applicable",
        "otherwise reasonably",
        "sometimes",
        "from time to time",
    ),
    "Generalization": (
        "generally",
        "mostly",
        "widely",
        "general",
        "commonly",
        "usually",
        "normally",
        "typically",
        "largely",
        "often",
        "primarily",
        "among other things",
    ),
    "Modality": (
        "may",
        "might",
        "can",
        "could",
        "would",
        "likely",
        "possible",
        "possibly",
    ),
    "NumericQuantifier": (
        "anyone",
        "certain",
        "everyone",
        "numerous",
        "some",
        "most",
        "few",
        "much",
        "many",
        "various",
        "including but not limited to",
    ),
}


class LexiconError(ValueError):
    """A lexicon file or entry is malformed."""


@dataclass(frozen=True)
class LexiconEntry:
    """One vague phrase (a tuple of lowercase words) and its category."""

    phrase: tuple[str, ...]
    category: str


@dataclass(frozen=True)
class VagueLexicon:
    """Validated collection of vague-term entries.

    Invariants: no duplicate phrases, every phrase nonempty, all words
    lowercase, every category one of ``CATEGORIES``.
    """

    entries: tuple[LexiconEntry, ...]

    def __post_init__(self) -> None:
        seen: set[tuple[str, ...]] = set()
        for entry in self.entries:
            if not entry.phrase or any(not w for w in entry.phrase):
                raise LexiconError(f"empty phrase in category {entry.category!r}")
            if entry.category not in CATEGORIES:
                raise LexiconError(
                    f"unknown category {entry.category!r} for phrase "
                    f"{' '.join(entry.phrase)!r}"
                )
            if any(w != w.lower() for w in entry.phrase):
                raise LexiconError(f"phrase not lowercase: {' '.join(entry.phrase)!r}")
            if entry.phrase in seen:
                raise LexiconError(f"duplicate phrase: {' '.join(entry.phrase)!r}")
            seen.add(entry.phrase)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def phrases(self) -> frozenset[tuple[str, ...]]:
        return frozenset(e.phrase for e in self.entries)

    @property
    def surfaces(self) -> frozenset[str]:
        """Phrase surfaces with words joined by single spaces."""
        return frozenset(" ".join(e.phrase) for e in self.entries)

    @property
    def max_phrase_len(self) -> int:
        return max(len(e.phrase) for e in self.entries) if self.entries else 0

    def category_counts(self) -> dict[str, int]:
        counts = {c: 0 for c in CATEGORIES}
        for entry in self.entries:
            counts[entry.category] += 1
        return counts


def default_lexicon() -> VagueLexicon:
    """The built-in 40-term lexicon."""
    entries = tuple(
        LexiconEntry(phrase=tuple(phrase.split()), category=category)
        for category, phrases in _DEFAULT_ENTRIES.items()
        for phrase in phrases
    )
    return VagueLexicon(entries=entries)


def load_lexicon(path: str | Path | None = None) -> VagueLexicon:
    """Load a lexicon from a category-header text file, or the default.

    File format: ``[Category]`` header lines introduce a category; every
    following nonblank, non-comment line is one phrase.  Phrases are
    lowercased on load (matching is case-insensitive by design).
    """
    if path is None:
        return default_lexicon()
    path = Path(path)
    entries: list[LexiconEntry] = []
    category: str | None = None
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            category = line[1:-1].strip()
            if category not in CATEGORIES:
                raise LexiconError(
                    f"{path}:{lineno}: unknown category {category!r} "
                    f"(expected one of {', '.join(CATEGORIES)})"
                )
            continue
        if category is None:
            raise LexiconError(f"{path}:{lineno}: phrase {line!r} before any [Category] header")
        words = tuple(line.lower().split())
        entries.append(LexiconEntry(phrase=words, category=category))
    try:
        return VagueLexicon(entries=tuple(entries))
    except LexiconError as exc:
        raise LexiconError(f"{path}: {exc}") from exc
