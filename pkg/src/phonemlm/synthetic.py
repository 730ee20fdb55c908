"""Synthetic phoneme corpora with fully predictable structure.

Each phoneme has exactly one successor inside a word (the successor map is a
single cycle over the alphabet), and a word's length is fixed by its first
phoneme.  Any masked token is therefore recoverable from its left neighbour,
which makes the corpus a clean convergence test for masked-LM training.
"""
from typing import Dict, List

import numpy as np

from .segment import PhonemeSentence
from .text import WORD_BOUNDARY

ALPHABET = "a e i o u p t k b d g m n s z f v l r j".split()


class BigramGrammar:
    def __init__(self, n_symbols: int = 20, seed: int = 0, min_len: int = 2, max_len: int = 6):
        if n_symbols > len(ALPHABET):
            raise ValueError(f"at most {len(ALPHABET)} symbols available")
        rng = np.random.default_rng(seed)
        self.symbols = ALPHABET[:n_symbols]
        cycle = [self.symbols[i] for i in rng.permutation(n_symbols)]
        self.successor: Dict[str, str] = {a: cycle[(i + 1) % n_symbols] for i, a in enumerate(cycle)}
        lengths = rng.integers(min_len, max_len + 1, size=n_symbols)
        self.length: Dict[str, int] = dict(zip(self.symbols, map(int, lengths)))

    def word(self, first: str) -> List[str]:
        out = [first]
        while len(out) < self.length[first]:
            out.append(self.successor[out[-1]])
        return out

    def corpus(self, n_sentences: int, seed: int = 0, min_words: int = 2, max_words: int = 6) -> List[PhonemeSentence]:
        rng = np.random.default_rng(seed)
        out = []
        for _ in range(n_sentences):
            units: List[str] = []
            for w in range(int(rng.integers(min_words, max_words + 1))):
                if w:
                    units.append(WORD_BOUNDARY)
                units += self.word(self.symbols[int(rng.integers(len(self.symbols)))])
            out.append(PhonemeSentence(tuple(units)))
        return out
