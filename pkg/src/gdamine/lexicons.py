"""Trigger lexicons: loading, validation, and phrase matching.

A lexicon is a set of lowercase phrases (1-4 words), one file per category
in a lexicon directory (``<category>.txt``, one phrase per line, ``#``
comments).  Matching is token-based: a phrase occurs in a token sequence
when each of its words equals a token's lemma or lowercased surface form
at consecutive positions.  Hyphenated phrases also match their split
forms, so ``down-regulated`` covers ``down regulated`` and
``down - regulated``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import DependencySentence, Token

CATEGORIES = (
    "sentence_filter",
    "expression",
    "disease_sample",
    "level_high",
    "level_low",
    "generic_disease",
    "investigation",
    "analyzed",
)


class LexiconError(ValueError):
    pass


class Level(Enum):
    HIGH = "High"
    LOW = "Low"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Lexicon:
    category: str
    entries: frozenset[str]

    def __post_init__(self):
        if not self.entries:
            raise LexiconError(f"lexicon {self.category!r} has no entries")
        for phrase in self.entries:
            if phrase != " ".join(phrase.lower().split()):
                raise LexiconError(f"lexicon {self.category!r}: phrase {phrase!r} not normalized")
            if not 1 <= len(phrase.split()) <= 4:
                raise LexiconError(f"lexicon {self.category!r}: phrase {phrase!r} must have 1-4 words")

    def __or__(self, other: "Lexicon") -> "Lexicon":
        return Lexicon(category=f"{self.category}|{other.category}", entries=self.entries | other.entries)


def phrase_variants(phrase: str) -> set[tuple[str, ...]]:
    """Token-sequence spellings a phrase may take in parsed text."""
    words = tuple(phrase.split())
    variants = {words}
    if "-" in phrase:
        variants.add(tuple(phrase.replace("-", " ").split()))
        split_hyphens: list[str] = []
        for word in words:
            if "-" in word:
                for i, piece in enumerate(word.split("-")):
                    if i:
                        split_hyphens.append("-")
                    if piece:
                        split_hyphens.append(piece)
            else:
                split_hyphens.append(word)
        variants.add(tuple(split_hyphens))
    return variants


def token_keys(token: Token) -> frozenset[str]:
    return frozenset((token.lemma.lower(), token.form.lower()))


def _scan(keysets: Sequence[frozenset[str] | set[str]], lexicon: Lexicon) -> bool:
    return _scan_phrases(keysets, lexicon) != ()


def _scan_phrases(
    keysets: Sequence[frozenset[str] | set[str]], lexicon: Lexicon
) -> tuple[str, ...]:
    """All lexicon phrases occurring in the key sequence, unordered-dedup."""
    hits: list[str] = []
    for phrase in lexicon.entries:
        for variant in phrase_variants(phrase):
            width = len(variant)
            if width > len(keysets):
                continue
            for start in range(len(keysets) - width + 1):
                if all(variant[i] in keysets[start + i] for i in range(width)):
                    hits.append(phrase)
                    break
            else:
                continue
            break
    return tuple(sorted(set(hits)))


def contains_trigger(sentence: DependencySentence, lexicon: Lexicon) -> bool:
    """True when some lexicon phrase occurs in the sentence's token stream."""
    return tokens_contain_trigger(sentence.tokens, lexicon)


def tokens_contain_trigger(tokens: Sequence[Token], lexicon: Lexicon) -> bool:
    return _scan([token_keys(t) for t in tokens], lexicon)


def matching_phrases(tokens: Sequence[Token], lexicon: Lexicon) -> tuple[str, ...]:
    return _scan_phrases([token_keys(t) for t in tokens], lexicon)


def normalize_level(scale_phrase: str, lexicons: Mapping[str, Lexicon]) -> Level:
    """Map a scale-indicator phrase to High/Low via the level lexicons.

    When both level lexicons fire, the longest matching phrase wins (word
    count, then character length); an exact tie is Unknown.
    """
    words = scale_phrase.lower().split()
    keysets = [{w} for w in words]
    high = _scan_phrases(keysets, lexicons["level_high"]) if words else ()
    low = _scan_phrases(keysets, lexicons["level_low"]) if words else ()
    if high and not low:
        return Level.HIGH
    if low and not high:
        return Level.LOW
    if not high and not low:
        return Level.UNKNOWN
    weight = lambda p: (len(p.split()), len(p))
    best_high = max(weight(p) for p in high)
    best_low = max(weight(p) for p in low)
    if best_high > best_low:
        return Level.HIGH
    if best_low > best_high:
        return Level.LOW
    return Level.UNKNOWN


def load_lexicons(directory: str | Path) -> dict[str, Lexicon]:
    """Load all category files from a lexicon directory.

    Missing files are reported together; a phrase present in both
    ``level_high`` and ``level_low`` is an error naming the phrase.
    """
    directory = Path(directory)
    missing = [c for c in CATEGORIES if not (directory / f"{c}.txt").is_file()]
    if missing:
        raise LexiconError(f"missing lexicon files in {directory}: {', '.join(missing)}")
    out: dict[str, Lexicon] = {}
    for category in CATEGORIES:
        entries: set[str] = set()
        path = directory / f"{category}.txt"
        with open(path, encoding="utf-8") as handle:
            for line_no, raw in enumerate(handle, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                phrase = " ".join(line.lower().split())
                if not 1 <= len(phrase.split()) <= 4:
                    raise LexiconError(f"{path.name}:{line_no}: phrase {phrase!r} must have 1-4 words")
                entries.add(phrase)
        if not entries:
            raise LexiconError(f"{path.name}: no entries")
        out[category] = Lexicon(category=category, entries=frozenset(entries))
    overlap = _variant_overlap(out["level_high"], out["level_low"])
    if overlap:
        raise LexiconError(f"phrase {overlap!r} appears in both level_high and level_low")
    return out


def _variant_overlap(high: Lexicon, low: Lexicon) -> str | None:
    low_variants = {v for p in low.entries for v in phrase_variants(p)}
    for phrase in sorted(high.entries):
        if any(v in low_variants for v in phrase_variants(phrase)):
            return phrase
    return None
