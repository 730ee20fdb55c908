"""Sentence segmentation, filtering and bookkeeping for raw text corpora."""
import json
import logging
from collections import Counter
from dataclasses import dataclass, replace
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence

import numpy as np

from . import locales
from .errors import ConfigError, FormatError
from .normalize import normalize as default_normalize
from .text import TERMINALS, is_punct, is_punct_char, nfc, simple_lower

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RawDocument:
    id: str
    lang: str
    text: str


@dataclass(frozen=True)
class Sentence:
    doc_id: str
    lang: str
    words: tuple

    @property
    def raw(self) -> str:
        return " ".join(self.words)

    def to_json(self) -> dict:
        return {"doc_id": self.doc_id, "lang": self.lang, "words": list(self.words)}


@dataclass(frozen=True)
class CorpusStats:
    counts: Dict[str, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def to_json(self) -> str:
        return json.dumps(self.counts, sort_keys=True, ensure_ascii=False)

    def table(self) -> str:
        """Per-locale counts in thousands, one ``code<TAB>count`` row per locale."""
        rows = ["LCode\t#s (K)"]
        rows += [f"{code}\t{n / 1000:g}" for code, n in sorted(self.counts.items())]
        return "\n".join(rows)


def _tokenize(chunk: str) -> List[str]:
    """Detach leading and trailing punctuation characters as their own tokens."""
    start, end = 0, len(chunk)
    while start < end and is_punct_char(chunk[start]):
        start += 1
    while end > start and is_punct_char(chunk[end - 1]):
        end -= 1
    tokens = list(chunk[:start])
    if start < end:
        tokens.append(chunk[start:end])
    tokens += list(chunk[end:])
    return tokens


def split_sentences(
    doc: RawDocument, normalizer: Optional[Callable[[str, str], str]] = default_normalize
) -> List[Sentence]:
    """Split a document into lowercased word-level sentences.

    A sentence ends at a terminal punctuation mark that is followed by
    whitespace or by the end of the text.
    """
    locales.check_code(doc.lang)
    text = nfc(doc.text)
    if normalizer is not None:
        text = normalizer(text, doc.lang)
    text = nfc(simple_lower(text))

    sentences, words = [], []
    for chunk in text.split():
        words += _tokenize(chunk)
        if chunk[-1] in TERMINALS:
            sentences.append(Sentence(doc.id, doc.lang, tuple(words)))
            words = []
    if words:
        sentences.append(Sentence(doc.id, doc.lang, tuple(words)))
    return sentences


def n_words(sentence: Sentence) -> int:
    return sum(1 for w in sentence.words if not is_punct(w))


def dedup_filter(sentences: Iterable[Sentence]) -> Iterator[Sentence]:
    """Drop repeated sentences (per locale) and sentences with fewer than two words.

    Keeps one hash set of surface strings per locale, so memory grows with the
    number of distinct retained sentences.
    """
    seen: Dict[str, set] = {}
    for s in sentences:
        if n_words(s) < 2:
            continue
        bucket = seen.setdefault(s.lang, set())
        key = s.raw
        if key in bucket:
            continue
        bucket.add(key)
        yield s


def split_locales(sentences: Sequence, locale_codes: Sequence[str], seed: int) -> List[list]:
    """Randomly divide ``sentences`` into ``len(locale_codes)`` near-equal parts.

    Part sizes differ by at most one, with the remainder going to the earliest
    locales.  Within a part the input order is kept.
    """
    k = len(locale_codes)
    if k == 0:
        raise ConfigError("split_locales needs at least one locale")
    n = len(sentences)
    order = np.random.default_rng(seed).permutation(n)
    base, extra = divmod(n, k)
    parts, start = [], 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        idx = np.sort(order[start:start + size])
        parts.append([sentences[j] for j in idx])
        start += size
    return parts


def corpus_stats(sentences: Iterable) -> CorpusStats:
    """Count sentences per locale.  Accepts objects with a ``lang`` attribute."""
    counts = Counter(s.lang for s in sentences)
    return CorpusStats(dict(sorted(counts.items())))


def ingest(docs: Iterable[RawDocument], seed: int, normalizer=default_normalize) -> List[Sentence]:
    """Full first-phase pipeline: segment, dedup per language, then assign locales."""
    by_lang: Dict[str, List[Sentence]] = {}
    stream = (s for d in docs for s in split_sentences(d, normalizer))
    for s in dedup_filter(stream):
        by_lang.setdefault(s.lang, []).append(s)

    out = []
    for lang in sorted(by_lang):
        codes = locales.locales_for(lang)
        if len(codes) == 1:
            out += [replace(s, lang=codes[0]) for s in by_lang[lang]]
            continue
        for code, part in zip(codes, split_locales(by_lang[lang], codes, seed)):
            out += [replace(s, lang=code) for s in part]
            log.info("%s -> %s: %d sentences", lang, code, len(part))
    return out


def read_documents(path) -> Iterator[RawDocument]:
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                doc = RawDocument(str(obj["id"]), obj["lang"], obj["text"])
            except (ValueError, KeyError, TypeError) as e:
                raise FormatError(f"{path}:{lineno}: bad document record ({e})") from None
            if not doc.id:
                raise FormatError(f"{path}:{lineno}: empty document id")
            yield doc


def write_sentences(sentences: Iterable[Sentence], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for s in sentences:
            f.write(json.dumps(s.to_json(), ensure_ascii=False) + "\n")


def read_sentences(path) -> Iterator[Sentence]:
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                yield Sentence(obj["doc_id"], obj["lang"], tuple(obj["words"]))
            except (ValueError, KeyError, TypeError) as e:
                raise FormatError(f"{path}:{lineno}: bad sentence record ({e})") from None
