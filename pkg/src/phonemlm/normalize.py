"""Minimal written-to-spoken normalization.

Only English digit runs are verbalized; any other language passes through.
Further normalizers can be registered per base language.
"""
import re
from typing import Callable, Dict

_ONES = ["zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
         "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
         "sixteen", "seventeen", "eighteen", "nineteen"]
_TENS = ["", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy",
         "eighty", "ninety"]
_SCALES = [(10 ** 9, "billion"), (10 ** 6, "million"), (1000, "thousand")]
_DIGITS = re.compile(r"\d+")


def _below_thousand(n):
    words = []
    if n >= 100:
        words += [_ONES[n // 100], "hundred"]
        n %= 100
    if n >= 20:
        words.append(_TENS[n // 10])
        n %= 10
        if n:
            words.append(_ONES[n])
    elif n or not words:
        words.append(_ONES[n])
    return words


def english_number(n: int) -> str:
    """Spell out a non-negative integer, e.g. ``42 -> "forty two"``."""
    if n < 1000:
        return " ".join(_below_thousand(n))
    words = []
    for scale, name in _SCALES:
        if n >= scale:
            words += _below_thousand(n // scale) + [name]
            n %= scale
    if n:
        words += _below_thousand(n)
    return " ".join(words)


def normalize_english(text: str) -> str:
    def verbalize(m):
        digits = m.group(0)
        # Long runs (phone numbers, ids) are read digit by digit.
        if len(digits) > 12 or (len(digits) > 1 and digits[0] == "0"):
            return " ".join(_ONES[int(d)] for d in digits)
        return english_number(int(digits))

    return _DIGITS.sub(verbalize, text)


NORMALIZERS: Dict[str, Callable[[str], str]] = {"eng": normalize_english}


def normalize(text: str, lang: str) -> str:
    fn = NORMALIZERS.get(lang.split("-", 1)[0])
    return fn(text) if fn else text
