import pytest

from vaguelens.lexicon import (
    CATEGORIES,
    LexiconEntry,
    LexiconError,
    VagueLexicon,
    default_lexicon,
    load_lexicon,
)


class TestDefaultLexicon:
    def test_total_size(self):
        assert len(default_lexicon()) == 40

    def test_category_sizes(self):
        counts = default_lexicon().category_counts()
        assert counts == {
            "Condition": 9,
            "Generalization": 12,
            "Modality": 8,
            "NumericQuantifier": 11,
        }

    def test_no_duplicates_and_lowercase(self):
        lex = default_lexicon()
        assert len(lex.phrases) == 40
        for entry in lex.entries:
            assert all(w == w.lower() and w for w in entry.phrase)

    def test_multi_word_entries_present(self):
        surfaces = default_lexicon().surfaces
        assert "among other things" in surfaces
        assert "including but not limited to" in surfaces
        assert "from time to time" in surfaces

    def test_max_phrase_len(self):
        # "including but not limited to" is the longest entry
        assert default_lexicon().max_phrase_len == 5

    def test_none_path_gives_default(self):
        assert load_lexicon(None).phrases == default_lexicon().phrases


class TestLexiconFile:
    def test_single_entry(self, tmp_path):
        path = tmp_path / "lex.txt"
        path.write_text("[Modality]\nmay\n", encoding="utf-8")
        lex = load_lexicon(path)
        assert len(lex) == 1
        assert lex.entries[0] == LexiconEntry(phrase=("may",), category="Modality")

    def test_duplicate_phrase_rejected(self, tmp_path):
        path = tmp_path / "lex.txt"
        path.write_text("[Modality]\nmay\nmay\n", encoding="utf-8")
        with pytest.raises(LexiconError, match="duplicate.*may"):
            load_lexicon(path)

    def test_unknown_category_rejected(self, tmp_path):
        path = tmp_path / "lex.txt"
        path.write_text("[Sarcasm]\nmaybe\n", encoding="utf-8")
        with pytest.raises(LexiconError, match="Sarcasm"):
            load_lexicon(path)

    def test_phrase_before_header_rejected(self, tmp_path):
        path = tmp_path / "lex.txt"
        path.write_text("may\n[Modality]\n", encoding="utf-8")
        with pytest.raises(LexiconError, match="before any"):
            load_lexicon(path)

    def test_comments_and_blanks_ignored(self, tmp_path):
        path = tmp_path / "lex.txt"
        path.write_text(
            "# vague terms\n\n[Condition]\nas needed\n\n# more\n[Modality]\nmay\n",
            encoding="utf-8",
        )
        lex = load_lexicon(path)
        assert lex.surfaces == {"as needed", "may"}

    def test_input_lowercased(self, tmp_path):
        path = tmp_path / "lex.txt"
        path.write_text("[Modality]\nMAY\n", encoding="utf-8")
        assert load_lexicon(path).surfaces == {"may"}


class TestValidation:
    def test_empty_phrase_rejected(self):
        with pytest.raises(LexiconError):
            VagueLexicon(entries=(LexiconEntry(phrase=(), category="Modality"),))

    def test_categories_fixed(self):
        assert set(CATEGORIES) == {
            "Condition",
            "Generalization",
            "Modality",
            "NumericQuantifier",
        }
