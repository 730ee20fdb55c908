"""Phoneme-level masked-LM pretraining toolkit.

Text side: corpus ingest, dictionary + rule grapheme-to-phoneme conversion,
profile-based phoneme segmentation, vocabulary and block packing.  Model side:
a numpy transformer encoder with masked-LM head and Adam training.  Speech
side: mel-cepstral distortion and F0 error between WAV files.
"""
from .segment import PhonemeSentence, segment_word, text2phonemesequence
from .vocab import Vocabulary, build_vocab, decode, encode

__version__ = "0.1.0"
