"""Whitespace phoneme tokenizer and vocabulary."""
import hashlib
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from .errors import FormatError
from .text import WORD_BOUNDARY, is_punct

BOS, PAD, EOS, UNK, MASK = "<s>", "<pad>", "</s>", "<unk>", "<mask>"
SPECIALS = (BOS, PAD, EOS, UNK, MASK)
BOS_ID, PAD_ID, EOS_ID, UNK_ID, MASK_ID = range(5)
N_SPECIAL = len(SPECIALS)


@dataclass(frozen=True)
class Vocabulary:
    tokens: Tuple[str, ...]
    counts: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.tokens[:N_SPECIAL] != SPECIALS:
            raise FormatError("vocabulary must start with the five special tokens")
        ids = {t: i for i, t in enumerate(self.tokens)}
        if len(ids) != len(self.tokens):
            raise FormatError("vocabulary contains duplicate tokens")
        object.__setattr__(self, "ids", ids)

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.ids

    def id(self, token: str) -> int:
        return self.ids.get(token, UNK_ID)

    def breakdown(self) -> Dict[str, int]:
        """How many non-special types are phonemes, boundary markers, or punctuation."""
        kinds = Counter()
        for t in self.tokens[N_SPECIAL:]:
            kinds["boundary" if t == WORD_BOUNDARY else "punct" if is_punct(t) else "phoneme"] += 1
        return {k: kinds.get(k, 0) for k in ("phoneme", "boundary", "punct")}

    def digest(self) -> str:
        return hashlib.sha256("\n".join(self.tokens).encode("utf-8")).hexdigest()

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for t in self.tokens:
                f.write(f"{t}\t{self.counts.get(t, 0)}\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        tokens, counts = [], {}
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                parts = line.rstrip("\n").split("\t")
                if len(parts) != 2 or not parts[0]:
                    raise FormatError(f"{path}:{lineno}: expected token<TAB>count")
                try:
                    counts[parts[0]] = int(parts[1])
                except ValueError:
                    raise FormatError(f"{path}:{lineno}: count is not an integer") from None
                tokens.append(parts[0])
        return cls(tuple(tokens), counts)


def build_vocab(corpus: Iterable, min_count: int = 1) -> Vocabulary:
    """Collect unit types with frequency >= ``min_count``.

    Order: specials, then descending frequency, ties by codepoint order.
    ``corpus`` yields PhonemeSentence objects (or None separators, skipped).
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    freq = Counter()
    for s in corpus:
        if s is not None:
            freq.update(s.units)
    kept = sorted((t for t, n in freq.items() if n >= min_count and t not in SPECIALS),
                  key=lambda t: (-freq[t], t))
    counts = {t: 0 for t in SPECIALS}
    counts.update((t, freq[t]) for t in kept)
    return Vocabulary(SPECIALS + tuple(kept), counts)


def encode(sentence, vocab: Vocabulary) -> List[int]:
    units = sentence.units if hasattr(sentence, "units") else str(sentence).split()
    return [BOS_ID] + [vocab.id(u) for u in units] + [EOS_ID]


def decode(ids: Iterable[int], vocab: Vocabulary) -> str:
    out = []
    for i in ids:
        if not 0 <= i < len(vocab):
            raise IndexError(f"token id {i} outside vocabulary of size {len(vocab)}")
        if i >= N_SPECIAL:
            out.append(vocab.tokens[i])
    return " ".join(out)
