"""Unicode helpers shared by the text-side stages."""
import unicodedata

PUNCT_CATEGORIES = frozenset({"Po", "Ps", "Pe", "Pd", "Pi", "Pf"})
TERMINALS = frozenset(".!?…。！？")
WORD_BOUNDARY = "▁"

# Characters whose full lowercase mapping is longer than one codepoint.
_SIMPLE_LOWER = {"İ": "i"}


def is_punct_char(ch: str) -> bool:
    return unicodedata.category(ch) in PUNCT_CATEGORIES


def is_punct(token: str) -> bool:
    return bool(token) and all(is_punct_char(c) for c in token)


def simple_lower(text: str) -> str:
    """Per-codepoint lowercasing (no context-sensitive final sigma, no expansions)."""
    out = []
    for ch in text:
        low = ch.lower()
        out.append(low if len(low) == 1 else _SIMPLE_LOWER.get(ch, ch))
    return "".join(out)


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def nfd(text: str) -> str:
    return unicodedata.normalize("NFD", text)
