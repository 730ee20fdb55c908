"""Phoneme segmentation driven by an orthography profile.

Works on NFD text, one codepoint at a time:

* a profile's multi-codepoint units (affricates and the like) match greedily,
  longest first;
* stress marks and other ``attach_next`` codepoints bind to the unit after them;
* combining marks, modifier letters and other ``attach_prev`` codepoints bind
  to the unit before them; a double diacritic (tie bar) also pulls in the
  following base codepoint;
* anything else starts a new unit.
"""
import unicodedata
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .errors import FormatError, SegmentationError
from .g2p import PUNCT
from .text import WORD_BOUNDARY, nfd

STRESS_MARKS = frozenset({"ˈ", "ˌ"})
ATTACH_PREV_CATEGORIES = frozenset({"Mn", "Mc", "Me", "Lm"})
TIE_BARS = frozenset({"͡", "͜"})


@dataclass(frozen=True)
class OrthographyProfile:
    lang: str = "default"
    attach_next: FrozenSet[str] = STRESS_MARKS
    attach_prev: FrozenSet[str] = TIE_BARS
    multi_units: Tuple[str, ...] = ()
    # When set, every Mn/Mc/Me/Lm codepoint not in attach_next also binds backwards.
    prev_by_category: bool = True

    def __post_init__(self):
        overlap = set(self.attach_next) & set(self.attach_prev)
        if overlap:
            raise FormatError(f"{self.lang}: codepoints both attach_next and attach_prev: {sorted(overlap)}")
        units = tuple(nfd(u) for u in self.multi_units)
        for u in units:
            if len(u) < 2:
                raise FormatError(f"{self.lang}: multi-unit {u!r} shorter than two codepoints")
        # Longest first; the stable sort keeps file order among equal lengths.
        object.__setattr__(self, "_multi", tuple(sorted(units, key=len, reverse=True)))

    def binds_prev(self, ch: str) -> bool:
        if ch in self.attach_next:
            return False
        if ch in self.attach_prev:
            return True
        return self.prev_by_category and unicodedata.category(ch) in ATTACH_PREV_CATEGORIES


DEFAULT_PROFILE = OrthographyProfile()


@dataclass(frozen=True)
class PhonemeSentence:
    units: Tuple[str, ...] = ()

    def __str__(self):
        return " ".join(self.units)

    def __len__(self):
        return len(self.units)

    @classmethod
    def parse(cls, line: str) -> "PhonemeSentence":
        return cls(tuple(line.split()))


def well_formed(sentence: PhonemeSentence) -> bool:
    """True if every boundary marker sits between two non-marker units."""
    u = sentence.units
    for i, unit in enumerate(u):
        if not unit or any(c.isspace() for c in unit):
            return False
        if unit == WORD_BOUNDARY and (i == 0 or i == len(u) - 1 or u[i - 1] == WORD_BOUNDARY):
            return False
    return True


def segment_word(phonemes: str, profile: OrthographyProfile = DEFAULT_PROFILE) -> List[str]:
    s = nfd(phonemes)
    if not s or any(c.isspace() for c in s):
        raise SegmentationError(f"cannot segment {phonemes!r}: empty or contains whitespace")
    units: List[str] = []
    pending = ""      # attach_next codepoints waiting for their unit
    glue = False      # previous codepoint was a tie bar
    i = 0
    while i < len(s):
        for m in profile._multi:
            if s.startswith(m, i):
                base, i = m, i + len(m)
                break
        else:
            ch = s[i]
            i += 1
            if ch in profile.attach_next:
                pending += ch
                continue
            if profile.binds_prev(ch):
                if pending:
                    pending += ch
                    continue
                if not units:
                    raise SegmentationError(f"dangling combining mark at start of {phonemes!r}")
                units[-1] += ch
                glue = glue or unicodedata.combining(ch) in (233, 234)
                continue
            base = ch
        if glue and not pending:
            units[-1] += base
        else:
            units.append(pending + base)
            pending = ""
        glue = False
    if pending:
        raise SegmentationError(f"dangling stress mark at end of {phonemes!r}")
    return units


def join_sentence(words: Iterable, profile: OrthographyProfile = DEFAULT_PROFILE) -> PhonemeSentence:
    """Segment each word and separate word and punctuation groups with ``▁``."""
    units: List[str] = []
    for w in words:
        if units:
            units.append(WORD_BOUNDARY)
        if w.kind == PUNCT:
            units.append(w.phonemes)
        else:
            units += segment_word(w.phonemes, profile)
    return PhonemeSentence(tuple(units))


def text2phonemesequence(sentence, pron, rules, profile: OrthographyProfile = DEFAULT_PROFILE) -> PhonemeSentence:
    from .g2p import phonemize_sentence

    return join_sentence(phonemize_sentence(sentence, pron, rules), profile)


def _codepoint(entry: str, path, lineno) -> str:
    entry = entry.strip()
    if entry.upper().startswith("U+"):
        return chr(int(entry[2:], 16))
    entry = nfd(entry)
    if len(entry) != 1:
        raise FormatError(f"{path}:{lineno}: expected a single codepoint, got {entry!r}")
    return entry


def load_profile(path, lang: str) -> OrthographyProfile:
    """Read a profile file with ``[attach_next]``, ``[attach_prev]`` and ``[multi_units]`` sections.

    Codepoints may be written literally or as ``U+XXXX``.  Listed sections
    extend the defaults; a line ``!replace`` right after a section header
    discards that section's defaults instead.
    """
    sections = {"attach_next": set(STRESS_MARKS), "attach_prev": set(TIE_BARS), "multi_units": []}
    prev_by_category = True
    current: Optional[str] = None
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\r\n").split("\t", 1)[0]
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            key = line.strip()
            if key.startswith("[") and key.endswith("]"):
                current = key[1:-1]
                if current not in sections:
                    raise FormatError(f"{path}:{lineno}: unknown section {key}")
                continue
            if current is None:
                raise FormatError(f"{path}:{lineno}: entry outside any section")
            if key == "!replace":
                sections[current] = [] if current == "multi_units" else set()
                if current == "attach_prev":
                    prev_by_category = False
                continue
            if current == "multi_units":
                sections[current].append(key)
            else:
                sections[current].add(_codepoint(key, path, lineno))
    return OrthographyProfile(
        lang,
        frozenset(sections["attach_next"]),
        frozenset(sections["attach_prev"]),
        tuple(sections["multi_units"]),
        prev_by_category,
    )


def read_phoneme_corpus(path) -> List[Optional[PhonemeSentence]]:
    """Read a phoneme corpus; blank lines become ``None`` document separators."""
    out: List[Optional[PhonemeSentence]] = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            out.append(PhonemeSentence.parse(line) if line.strip() else None)
    return out


def write_phoneme_corpus(items: Sequence[Optional[PhonemeSentence]], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for s in items:
            f.write("" if s is None else str(s))
            f.write("\n")
