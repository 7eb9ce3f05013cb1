"""Attendee-count normalization for crowd-size phrases.

Numeric literals parse directly; vague phrases map through a small
conservative lexicon ("a dozen" means 10, "hundreds" means 100). Ranges
record the low bound. The lexicon ships as a data file so new phrases
can be added without code changes.
"""

from __future__ import annotations

import json
import re
from functools import lru_cache
from importlib import resources

_NUMBER_RE = re.compile(r"\d[\d,]*")
_RANGE_RE = re.compile(r"(\d[\d,]*)\s*(?:[-–—]|to)\s*(\d[\d,]*)")


@lru_cache(maxsize=1)
def _lexicon() -> list[tuple[re.Pattern, int]]:
    raw = resources.files("protest_pipeline").joinpath("data/attendee_lexicon.json").read_text()
    entries: dict[str, int] = json.loads(raw)
    # Longest phrases first so "tens of thousands" wins over "thousands".
    ordered = sorted(entries.items(), key=lambda kv: (-len(kv[0].split()), -len(kv[0])))
    return [
        (re.compile(r"\b" + re.escape(phrase) + r"\b"), count) for phrase, count in ordered
    ]


def parse_attendee_phrase(phrase: str) -> int | None:
    """Most specific conservative count in the phrase, or None."""
    text = phrase.lower()
    range_match = _RANGE_RE.search(text)
    if range_match:
        low, high = (int(g.replace(",", "")) for g in range_match.groups())
        return min(low, high)
    number = _NUMBER_RE.search(text)
    if number:
        return int(number.group(0).replace(",", ""))
    for pattern, count in _lexicon():
        if pattern.search(text):
            return count
    return None
