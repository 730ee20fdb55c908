"""Locate per-locale dictionaries, rule files and profiles.

A resource directory holds ``<code>.dict.tsv``, ``<code>.rules.tsv`` and
``<code>.profile.tsv`` files, where ``<code>`` is a locale (``eng-us``) or its
base language (``eng``); the locale-specific file wins.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import locales
from .g2p import G2PRuleSet, PronDict, load_dict, load_rules
from .segment import DEFAULT_PROFILE, OrthographyProfile, load_profile

log = logging.getLogger(__name__)

BUNDLED = Path(__file__).parent / "data"


@dataclass(frozen=True)
class LocaleResources:
    lang: str
    pron: PronDict
    rules: G2PRuleSet
    profile: OrthographyProfile


def find(directory, locale: str, kind: str) -> Optional[Path]:
    for code in (locale, locales.language_of(locale)):
        path = Path(directory) / f"{code}.{kind}.tsv"
        if path.exists():
            return path
    return None


def load_locale(locale: str, directory=BUNDLED, dict_path=None, rules_path=None, profile_path=None) -> LocaleResources:
    """Load resources for ``locale``; explicit paths override directory lookup."""
    locales.check_code(locale)
    dict_path = dict_path or find(directory, locale, "dict")
    rules_path = rules_path or find(directory, locale, "rules")
    profile_path = profile_path or find(directory, locale, "profile")
    if dict_path is None:
        log.warning("%s: no pronunciation dictionary, every word goes through the fallback rules", locale)
    if rules_path is None:
        log.warning("%s: no fallback rules, out-of-dictionary words pass through unchanged", locale)
    pron = load_dict(dict_path, locale) if dict_path else PronDict(locale, {})
    rules = load_rules(rules_path, locale) if rules_path else G2PRuleSet(locale, ())
    profile = load_profile(profile_path, locale) if profile_path else DEFAULT_PROFILE
    return LocaleResources(locale, pron, rules, profile)
