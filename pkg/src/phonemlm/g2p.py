"""Word-level grapheme-to-phoneme conversion.

Pronunciations come from a per-locale dictionary first.  Words missing from
the dictionary go through an ordered list of rewrite rules, applied
longest-match-first from left to right.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import FormatError
from .text import is_punct, nfc, simple_lower

log = logging.getLogger(__name__)

WORD, PUNCT, OOV = "word", "punct", "oov"


@dataclass(frozen=True)
class PronDict:
    lang: str
    entries: Dict[str, str]

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class G2PRuleSet:
    lang: str
    rules: Tuple[Tuple[str, str], ...]

    def __post_init__(self):
        table: Dict[str, str] = {}
        for lhs, rhs in self.rules:
            if not lhs:
                raise FormatError(f"{self.lang}: rule with empty left-hand side")
            table.setdefault(lhs, rhs)  # earlier rules win over later duplicates
        object.__setattr__(self, "_table", table)
        object.__setattr__(self, "_max_len", max((len(k) for k in table), default=0))


@dataclass(frozen=True)
class WordPhonemes:
    surface: str
    phonemes: str
    kind: str


def _tsv_rows(path):
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError(f"{path}:{lineno}: expected two tab-separated fields")
            yield lineno, parts[0], parts[1]


def load_dict(path, lang: str) -> PronDict:
    entries: Dict[str, str] = {}
    for lineno, word, phon in _tsv_rows(path):
        word = nfc(simple_lower(word.strip()))
        phon = nfc(phon.strip())
        if not word or any(c.isspace() for c in word):
            raise FormatError(f"{path}:{lineno}: dictionary key must be a single word")
        if not phon or any(c.isspace() for c in phon):
            raise FormatError(f"{path}:{lineno}: pronunciation must be non-empty with no spaces")
        if word in entries:
            log.warning("%s:%d: duplicate entry for %r ignored", path, lineno, word)
            continue
        entries[word] = phon
    return PronDict(lang, entries)


def load_rules(path, lang: str) -> G2PRuleSet:
    # Right-hand sides may be empty (silent letters); keep them verbatim.
    rules = [(nfc(g), nfc(p.strip())) for _, g, p in _tsv_rows(path)]
    return G2PRuleSet(lang, tuple(rules))


def lookup(word: str, pron: PronDict) -> Optional[str]:
    return pron.entries.get(word)


def fallback_g2p(word: str, rules: G2PRuleSet) -> str:
    if not word:
        raise ValueError("fallback_g2p: empty word")
    table, longest = rules._table, rules._max_len
    out: List[str] = []
    i = 0
    while i < len(word):
        for n in range(min(longest, len(word) - i), 0, -1):
            rhs = table.get(word[i:i + n])
            if rhs is not None:
                out.append(rhs)
                i += n
                break
        else:
            out.append(word[i])
            i += 1
    result = "".join(out)
    # A word made only of silent letters would vanish; keep its spelling instead.
    return result or word


def phonemize_word(word: str, pron: PronDict, rules: G2PRuleSet) -> WordPhonemes:
    if is_punct(word):
        return WordPhonemes(word, word, PUNCT)
    hit = lookup(word, pron)
    if hit is not None:
        return WordPhonemes(word, hit, WORD)
    return WordPhonemes(word, fallback_g2p(word, rules), OOV)


def phonemize_sentence(sentence, pron: PronDict, rules: G2PRuleSet) -> List[WordPhonemes]:
    """Convert every token of ``sentence`` (a Sentence or a word list), keeping punctuation."""
    words: Sequence[str] = getattr(sentence, "words", sentence)
    return [phonemize_word(w, pron, rules) for w in words]
