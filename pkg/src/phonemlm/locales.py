"""Registry of supported languages and locales.

Documents may be tagged either with a locale code directly (``eng-us``) or with
the code of a language whose text is shared by several locales (``eng``).  The
latter are divided evenly between their locales during ingest.
"""
from typing import Dict, Tuple

from .errors import UnknownLanguageError

LOCALES: Tuple[str, ...] = (
    "ady", "afr", "amh", "ara", "arg", "arm-e", "arm-w", "aze", "bak", "bel",
    "ben", "bos", "bul", "bur", "cat", "cze", "dan", "dut", "egy", "eng-uk",
    "eng-us", "epo", "est", "eus", "fas", "fin", "fra", "fra-qu", "geo", "ger",
    "gla", "gle", "glg", "grc", "gre", "grn", "guj", "hbs-cyrl", "hbs-latn",
    "hin", "hun", "ice", "ido", "ina", "ind", "ita", "jam", "jpn", "kaz", "khm",
    "kor", "kur", "lat-clas", "lat-eccl", "lit", "ltz", "mac", "min", "mlt",
    "ori", "pap", "pol", "por-bz", "por-po", "ron", "rus", "san", "slo", "slv",
    "sme", "snd", "spa", "spa-latin", "spa-me", "sqi", "srp", "swa", "swe",
    "tam", "tat", "tgl", "tha", "tts", "tuk", "tur", "ukr", "vie-c", "vie-n",
    "vie-s", "wel-nw", "wel-sw", "yue", "zho-s", "zho-t",
)

# Languages without per-locale source text; order fixes who gets the remainder.
SHARED_LANGUAGES: Dict[str, Tuple[str, ...]] = {
    "eng": ("eng-uk", "eng-us"),
    "fra": ("fra", "fra-qu"),
    "ell": ("grc", "gre"),
    "lat": ("lat-clas", "lat-eccl"),
    "por": ("por-po", "por-bz"),
    "hbs": ("hbs-latn", "hbs-cyrl"),
    "spa": ("spa", "spa-latin", "spa-me"),
    "tha": ("tha", "tts"),
    "vie": ("vie-n", "vie-c", "vie-s"),
    "wel": ("wel-nw", "wel-sw"),
}



def is_known(code: str) -> bool:
    return code in SHARED_LANGUAGES or code in LOCALES


def check_code(code: str) -> str:
    if not is_known(code):
        raise UnknownLanguageError(f"unknown language code {code!r}")
    return code


def locales_for(code: str) -> Tuple[str, ...]:
    """Locales that text tagged ``code`` is distributed over."""
    check_code(code)
    return SHARED_LANGUAGES.get(code, (code,))


def language_of(locale: str) -> str:
    """Base language (the part before the first hyphen) used to pick normalizers."""
    return locale.split("-", 1)[0]
