import json

import pytest
from hypothesis import given, strategies as st

from phonemlm.corpus import (RawDocument, Sentence, corpus_stats, dedup_filter, ingest, read_sentences,
                             split_locales, split_sentences, write_sentences)
from phonemlm.errors import ConfigError, UnknownLanguageError
from phonemlm.normalize import english_number, normalize_english
from phonemlm.text import simple_lower


def words(doc_text, lang="eng-us"):
    return [list(s.words) for s in split_sentences(RawDocument("d", lang, doc_text), None)]


def sent(raw, lang="eng-us", doc="d"):
    return Sentence(doc, lang, tuple(raw.split()))


class TestSplitSentences:
    def test_boundary_rule(self):
        assert words("Hello world. Bye!") == [["hello", "world", "."], ["bye", "!"]]

    def test_empty(self):
        assert words("") == []

    def test_end_of_text_closes_sentence(self):
        assert words("No terminal punct") == [["no", "terminal", "punct"]]

    def test_terminal_must_be_followed_by_space(self):
        assert words("e.g.x and 3.5 more") == [["e.g.x", "and", "3.5", "more"]]

    def test_cjk_terminals_and_leading_punct(self):
        assert words("«Ça va?» Oui… 好。") == [["«", "ça", "va", "?", "»", "oui", "…"], ["好", "。"]]

    def test_unknown_language(self):
        with pytest.raises(UnknownLanguageError, match="xx-yy"):
            split_sentences(RawDocument("d", "xx-yy", "text"))

    def test_nfc_then_lowercase(self):
        decomposed = "Café ÉTÉ"
        (s,) = split_sentences(RawDocument("d", "fra", decomposed), None)
        assert s.words == ("café", "été")

    def test_normalizer_applied(self):
        (s,) = split_sentences(RawDocument("d", "eng", "We train for 2 days."))
        assert s.raw == "we train for two days ."

    @given(st.text(max_size=80))
    def test_lowercase_and_nonempty(self, text):
        for s in split_sentences(RawDocument("d", "eng-us", text), None):
            assert s.words
            assert simple_lower(s.raw) == s.raw
            assert all(w and not any(c.isspace() for c in w) for w in s.words)

    @given(st.text(alphabet=st.sampled_from("ab .!?,"), max_size=60))
    def test_partition_of_content(self, text):
        got = "".join(w for s in split_sentences(RawDocument("d", "eng-us", text), None) for w in s.words)
        assert got == "".join(text.lower().split())


class TestDedup:
    def test_duplicates_and_single_words(self):
        out = list(dedup_filter([sent("hello world"), sent("hello world"), sent("hi")]))
        assert [s.raw for s in out] == ["hello world"]

    def test_empty(self):
        assert list(dedup_filter([])) == []

    def test_per_locale(self):
        out = list(dedup_filter([sent("a b .", "eng-uk"), sent("a b .", "eng-us")]))
        assert len(out) == 2

    def test_punctuation_does_not_count_as_word(self):
        assert list(dedup_filter([sent("hi ."), sent("hi , !")])) == []

    @given(st.lists(st.sampled_from(["a b", "a b .", "c", "c d", "b a"]), max_size=20))
    def test_idempotent(self, raws):
        once = list(dedup_filter(sent(r) for r in raws))
        assert list(dedup_filter(once)) == once


class TestSplitLocales:
    def test_equal_parts(self):
        parts = split_locales(list(range(10)), ["eng-uk", "eng-us"], seed=1)
        assert [len(p) for p in parts] == [5, 5]

    def test_remainder_to_earliest(self):
        parts = split_locales(list(range(7)), ["a", "b", "c"], seed=7)
        assert [len(p) for p in parts] == [3, 2, 2]

    def test_single_locale_identity(self):
        assert split_locales(list("xyz"), ["spa"], seed=3) == [list("xyz")]

    def test_no_locales(self):
        with pytest.raises(ConfigError):
            split_locales([1, 2], [], seed=0)

    def test_deterministic(self):
        a = split_locales(list(range(50)), ["a", "b", "c"], seed=5)
        assert a == split_locales(list(range(50)), ["a", "b", "c"], seed=5)
        assert a != split_locales(list(range(50)), ["a", "b", "c"], seed=6)

    @given(st.integers(0, 60), st.integers(1, 5), st.integers(0, 2 ** 32 - 1))
    def test_partition_property(self, n, k, seed):
        parts = split_locales(list(range(n)), [str(i) for i in range(k)], seed)
        flat = [x for p in parts for x in p]
        assert sorted(flat) == list(range(n))
        sizes = [len(p) for p in parts]
        assert max(sizes) - min(sizes) <= 1 and sizes == sorted(sizes, reverse=True)


class TestStats:
    def test_counts(self):
        stats = corpus_stats([sent("x y", "eng-us")] * 3 + [sent("x y", "vie-n")] * 2)
        assert stats.counts == {"eng-us": 3, "vie-n": 2}
        assert stats.to_json() == '{"eng-us": 3, "vie-n": 2}'

    def test_empty(self):
        assert corpus_stats([]).counts == {}

    def test_single_locale_total(self):
        stats = corpus_stats([sent("x y", "tha")] * 4)
        assert stats.counts == {"tha": 4} and stats.total == 4

    def test_table_in_thousands(self):
        assert corpus_stats([sent("x y", "ady")] * 2000).table().splitlines()[1] == "ady\t2"


def test_ingest_splits_shared_language_and_dedups_before_splitting():
    docs = [RawDocument("1", "eng", "One two. One two. Three four! Five six. Seven eight.")]
    out = ingest(docs, seed=1)
    assert sorted(s.raw for s in out) == ["five six .", "one two .", "seven eight .", "three four !"]
    assert corpus_stats(out).counts == {"eng-uk": 2, "eng-us": 2}


def test_sentence_jsonl_roundtrip(tmp_path):
    items = [sent("ˈa b", "eng-us"), sent("x , y", "vie-n", "7")]
    write_sentences(items, tmp_path / "s.jsonl")
    assert list(read_sentences(tmp_path / "s.jsonl")) == items
    first = json.loads((tmp_path / "s.jsonl").read_text(encoding="utf-8").splitlines()[0])
    assert set(first) == {"doc_id", "lang", "words"}


@pytest.mark.parametrize("n,expected", [(0, "zero"), (13, "thirteen"), (42, "forty two"),
                                        (100, "one hundred"), (2023, "two thousand twenty three"),
                                        (1000001, "one million one")])
def test_english_number(n, expected):
    assert english_number(n) == expected


def test_leading_zero_read_as_digits():
    assert normalize_english("room 007") == "room zero zero seven"
