"""Tokenization shared by the lexical scorer and the heuristic reasoner."""

from __future__ import annotations

import re
from dataclasses import dataclass

# Versioned with the repository; changing it changes every similarity score.
STOPWORDS = frozenset({"the", "a", "an", "to", "of", "on", "in", "and", "or"})
STOPWORDS_VERSION = 1

_SPLIT = re.compile(r"[^a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric runs with stopwords removed (order kept)."""
    return [t for t in _SPLIT.split(text.lower()) if t and t not in STOPWORDS]


def token_set(text: str) -> frozenset[str]:
    return frozenset(tokenize(text))


@dataclass(frozen=True)
class Described:
    """An event description parsed back into its parts."""

    action: str
    label: str | None = None
    value: str | None = None
    direction: str | None = None


_PATTERNS = [
    (re.compile(r"^press back$"), lambda m: Described("back")),
    (re.compile(r"^long click '(.*)'$", re.S), lambda m: Described("long_click", m[1])),
    (re.compile(r"^click '(.*)'$", re.S), lambda m: Described("click", m[1])),
    (re.compile(r"^type into '(.*)'$", re.S), lambda m: Described("input", m[1])),
    (re.compile(r"^type '(.*)' into '(.*)'$", re.S), lambda m: Described("input", m[2], m[1])),
    (re.compile(r"^swipe(?: (up|down|left|right))?(?: on '(.*)')?$", re.S),
     lambda m: Described("swipe", m[2], direction=m[1])),
]


def parse_description(text: str) -> Described:
    """Invert :func:`sail.ui_model.render_event`.

    Anything that does not follow the event templates is treated as a bare
    label with an unknown action.
    """
    text = text.strip()
    for pattern, build in _PATTERNS:
        m = pattern.match(text)
        if m:
            return build(m)
    return Described("", text)
