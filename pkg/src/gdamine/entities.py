"""Entity mentions: annotation-store ingestion, miRNA detection, phrase typing.

Gene and disease mentions come from a precomputed annotation file in the
PubTator abstract format.  Mention offsets index the document text (title,
one space, abstract) and are validated against it at load.  Stored
annotations are pooled across documents so a surface form recognized in
one abstract can be recovered in another whose own annotations are
missing.  miRNA mentions are matched directly from text with a regular
expression following the standard naming convention (species prefix, core,
number, letter suffix, paralog digit, arm).
"""

from __future__ import annotations

import logging
import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable, Mapping, Sequence

from .corpus import DependencySentence, byte_slice
from .lexicons import Lexicon, matching_phrases, token_keys, tokens_contain_trigger

logger = logging.getLogger(__name__)


class EntityType(Enum):
    GENE = "Gene"
    MIRNA = "MiRNA"
    DISEASE = "Disease"


class MentionSource(Enum):
    PUBTATOR = "pubtator"
    REGEX = "regex"
    POOLED = "pooled"


class AnnotationFormatError(ValueError):
    pass


@dataclass(frozen=True)
class EntityMention:
    pmid: str
    char_start: int
    char_end: int
    surface: str
    etype: EntityType
    norm_id: str | None
    source: MentionSource

    def __post_init__(self):
        if self.char_start >= self.char_end:
            raise ValueError(f"mention {self.surface!r}: empty or inverted span")
        if self.etype is EntityType.GENE and self.source is MentionSource.PUBTATOR and not self.norm_id:
            raise ValueError(f"gene mention {self.surface!r} from the annotation store must carry an id")

    def overlaps(self, start: int, end: int) -> bool:
        return self.char_start < end and self.char_end > start

    def within(self, start: int, end: int) -> bool:
        return self.char_start >= start and self.char_end <= end


MIRNA_RE = re.compile(
    r"(?<![A-Za-z0-9])"
    r"(?:[a-z]{3}-)?"
    r"(?:miRNA|miR|mir|let)"
    r"-\d+[a-z]?"
    r"(?:-\d)?"
    r"(?:-[35]p)?"
    r"(?![A-Za-z0-9])"
)


def canonical_mirna(surface: str) -> str:
    return surface.lower().replace("mirna-", "mir-")


def detect_mirna(text: str, origin: int = 0, pmid: str = "") -> list[EntityMention]:
    """Leftmost-longest, non-overlapping miRNA name matches in ``text``.

    ``origin`` shifts the reported byte offsets into document space.
    """
    out = []
    for m in MIRNA_RE.finditer(text):
        start = origin + len(text[: m.start()].encode("utf-8"))
        end = start + len(m.group().encode("utf-8"))
        out.append(
            EntityMention(
                pmid=pmid,
                char_start=start,
                char_end=end,
                surface=m.group(),
                etype=EntityType.MIRNA,
                norm_id=canonical_mirna(m.group()),
                source=MentionSource.REGEX,
            )
        )
    return out


def load_pubtator(stream: IO[str] | Iterable[str]) -> list[EntityMention]:
    """Read gene/disease mentions from PubTator abstract blocks.

    Every mention's offsets are validated against the block's document text
    (mismatch is an error naming the pmid and line).  Rows of other entity
    types are skipped with a warning count; gene rows lacking an id are
    likewise skipped.  Gene rows whose surface is a miRNA name are typed
    MiRNA and normalized to the canonical lowercase name.
    """
    mentions: list[EntityMention] = []
    titles: dict[str, str] = {}
    abstracts: dict[str, str] = {}
    skipped = 0
    for line_no, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        if "|" in line and "\t" not in line:
            parts = line.split("|", 2)
            if len(parts) != 3 or parts[1] not in ("t", "a"):
                raise AnnotationFormatError(f"line {line_no}: malformed title/abstract line")
            pmid, kind, text = parts
            if kind == "t":
                titles[pmid] = text
            else:
                abstracts[pmid] = text
            continue
        cols = line.split("\t")
        if len(cols) not in (5, 6):
            raise AnnotationFormatError(f"line {line_no}: expected 5 or 6 tab-separated columns")
        pmid, start_s, end_s, surface, etype_s = cols[:5]
        norm_id = cols[5].strip() if len(cols) == 6 and cols[5].strip() not in ("", "-") else None
        if pmid not in titles:
            raise AnnotationFormatError(f"line {line_no}: mention for pmid {pmid} before its title line")
        try:
            start, end = int(start_s), int(end_s)
        except ValueError:
            raise AnnotationFormatError(f"line {line_no}: non-numeric offsets") from None
        doc_text = titles[pmid]
        if pmid in abstracts:
            doc_text = f"{titles[pmid]} {abstracts[pmid]}"
        try:
            actual = byte_slice(doc_text, start, end)
        except ValueError as exc:
            raise AnnotationFormatError(f"line {line_no} (pmid {pmid}): {exc}") from None
        if actual != surface:
            raise AnnotationFormatError(
                f"line {line_no} (pmid {pmid}): offsets {start}..{end} slice {actual!r}, not {surface!r}"
            )
        if etype_s == "Gene":
            if MIRNA_RE.fullmatch(surface.strip()):
                mentions.append(
                    EntityMention(pmid, start, end, surface, EntityType.MIRNA,
                                  canonical_mirna(surface.strip()), MentionSource.PUBTATOR)
                )
            elif norm_id is None:
                skipped += 1
            else:
                mentions.append(
                    EntityMention(pmid, start, end, surface, EntityType.GENE, norm_id, MentionSource.PUBTATOR)
                )
        elif etype_s == "Disease":
            mentions.append(
                EntityMention(pmid, start, end, surface, EntityType.DISEASE, norm_id, MentionSource.PUBTATOR)
            )
        else:
            skipped += 1
    if skipped:
        logger.warning("skipped %d annotation rows (unsupported type or missing id)", skipped)
    return mentions


@dataclass(frozen=True)
class SurfaceEntry:
    etype: EntityType
    norm_id: str | None
    ambiguous: bool


class AnnotationPool:
    """All loaded mentions, indexed by pmid and by lowercased surface.

    A surface entry exists only when every pooled occurrence agrees on the
    entity type; its id is the majority id, ties resolved toward the most
    recently loaded and flagged ambiguous.
    """

    def __init__(self, mentions: Iterable[EntityMention]):
        self._by_pmid: dict[str, list[EntityMention]] = {}
        by_surface: dict[str, list[EntityMention]] = {}
        for mention in mentions:
            self._by_pmid.setdefault(mention.pmid, []).append(mention)
            by_surface.setdefault(mention.surface.lower(), []).append(mention)
        self._by_surface: dict[str, SurfaceEntry] = {}
        for surface, occurrences in by_surface.items():
            etypes = {m.etype for m in occurrences}
            if len(etypes) > 1:
                continue
            counts = Counter(m.norm_id for m in occurrences if m.norm_id is not None)
            if not counts:
                entry = SurfaceEntry(occurrences[0].etype, None, False)
            else:
                top = counts.most_common()
                best = top[0][1]
                tied = [norm_id for norm_id, count in top if count == best]
                if len(tied) == 1:
                    entry = SurfaceEntry(occurrences[0].etype, tied[0], False)
                else:
                    latest = next(m.norm_id for m in reversed(occurrences) if m.norm_id in tied)
                    entry = SurfaceEntry(occurrences[0].etype, latest, True)
            self._by_surface[surface] = entry

    @property
    def by_pmid(self) -> Mapping[str, list[EntityMention]]:
        return self._by_pmid

    @property
    def by_surface(self) -> Mapping[str, SurfaceEntry]:
        return self._by_surface

    def mentions_for(self, pmid: str) -> list[EntityMention]:
        return list(self._by_pmid.get(pmid, ()))

    def scan_text(
        self, pmid: str, text: str, origin: int = 0, etypes: Iterable[EntityType] | None = None
    ) -> list[EntityMention]:
        """Recover mentions in ``text`` by case-insensitive surface lookup.

        Matches are bounded by non-alphanumeric characters; offsets are
        byte offsets shifted by ``origin``.  Emitted mentions carry
        source=pooled.
        """
        wanted = set(etypes) if etypes is not None else set(EntityType)
        lowered = text.lower()
        out: list[EntityMention] = []
        for surface, entry in self._by_surface.items():
            if entry.etype not in wanted:
                continue
            at = 0
            while True:
                at = lowered.find(surface, at)
                if at < 0:
                    break
                end = at + len(surface)
                before_ok = at == 0 or not lowered[at - 1].isalnum()
                after_ok = end == len(lowered) or not lowered[end].isalnum()
                if before_ok and after_ok:
                    start_b = origin + len(text[:at].encode("utf-8"))
                    end_b = origin + len(text[:end].encode("utf-8"))
                    out.append(
                        EntityMention(pmid, start_b, end_b, text[at:end], entry.etype,
                                      entry.norm_id, MentionSource.POOLED)
                    )
                at = end
        return sorted(out, key=lambda m: (m.char_start, m.char_end))


_SOURCE_RANK = {MentionSource.PUBTATOR: 0, MentionSource.REGEX: 1, MentionSource.POOLED: 2}


def resolve_overlaps(mentions: Iterable[EntityMention]) -> list[EntityMention]:
    """Drop overlapping mentions: longest span wins, ties prefer the store."""
    ordered = sorted(
        mentions,
        key=lambda m: (-(m.char_end - m.char_start), _SOURCE_RANK[m.source], m.char_start, m.char_end),
    )
    kept: list[EntityMention] = []
    for mention in ordered:
        if any(mention.overlaps(k.char_start, k.char_end) for k in kept):
            continue
        kept.append(mention)
    return sorted(kept, key=lambda m: (m.char_start, m.char_end))


# -- entity expansion and phrase typing ---------------------------------------


_MODIFIER_DEPRELS = {"amod", "compound", "nn", "nummod"}


def expand_entity(
    sentence: DependencySentence,
    span: tuple[int, int],
    lexicons: Mapping[str, Lexicon],
) -> tuple[int, int]:
    """Grow a mention span to the noun phrase it participates in.

    The span is first aligned to the tokens it touches, then extended right
    over sample-type head nouns it modifies (``OSCC`` -> ``OSCC patients``)
    and left over adjectival/compound modifiers attached to it.  Returns a
    token-aligned byte range containing the input; unrecognized spans come
    back unchanged.
    """
    covered = [t for t in sentence.tokens if t.char_start < span[1] and t.char_end > span[0]]
    if not covered:
        return span
    lo = covered[0].index
    hi = covered[-1].index
    sample = lexicons["disease_sample"]

    def in_range(index: int) -> bool:
        return lo <= index <= hi

    grew = True
    while grew:
        grew = False
        if hi < len(sentence):
            nxt = sentence.token(hi + 1)
            linked = in_range(nxt.head) or any(
                t.head == nxt.index for t in sentence.tokens[lo - 1 : hi]
            )
            if (
                nxt.pos.startswith("NN")
                and linked
                and tokens_contain_trigger([nxt], sample)
            ):
                hi += 1
                grew = True
        if lo > 1:
            prev = sentence.token(lo - 1)
            if prev.deprel in _MODIFIER_DEPRELS and in_range(prev.head):
                lo -= 1
                grew = True
    return (sentence.token(lo).char_start, sentence.token(hi).char_end)


class PhraseKind(Enum):
    EXPRESSION = "Expression"
    DISEASE_SAMPLE = "DiseaseSample"
    DISEASE = "Disease"
    GENERIC_DISEASE = "GenericDisease"
    OTHER = "Other"


@dataclass(frozen=True)
class PhraseType:
    """Typing verdict for a token range, with the evidence that produced it."""

    value: PhraseKind
    generic: bool = False
    disease: EntityMention | None = None
    gene: EntityMention | None = None


def phrase_type(
    sentence: DependencySentence,
    token_range: tuple[int, int],
    lexicons: Mapping[str, Lexicon],
    mentions: Sequence[EntityMention],
) -> PhraseType:
    """Classify a token range as expression / disease / disease-sample.

    Disease-sample triggers dominate (a sample phrase may carry a disease
    modifier); a specific disease mention without a sample word types
    Disease; generic disease vocabulary alone types GenericDisease; a range
    is Expression when it holds an expression trigger, is headed by a
    gene/miRNA mention, or contains one governed by an expression trigger.
    """
    first, last = token_range
    tokens = [sentence.token(i) for i in range(first, last + 1)]
    start, end = tokens[0].char_start, tokens[-1].char_end
    contained = [m for m in mentions if m.within(start, end)]
    specific = next((m for m in contained if m.etype is EntityType.DISEASE and m.norm_id), None)
    gene = next((m for m in contained if m.etype in (EntityType.GENE, EntityType.MIRNA)), None)
    has_sample = tokens_contain_trigger(tokens, lexicons["disease_sample"])
    has_generic = bool(matching_phrases(tokens, lexicons["generic_disease"]))
    has_expression = tokens_contain_trigger(tokens, lexicons["expression"])

    if has_sample:
        return PhraseType(
            PhraseKind.DISEASE_SAMPLE,
            generic=specific is None and has_generic,
            disease=specific,
            gene=gene,
        )
    if specific is not None:
        return PhraseType(PhraseKind.DISEASE, disease=specific, gene=gene)
    if has_generic:
        return PhraseType(PhraseKind.GENERIC_DISEASE, generic=True, gene=gene)
    if has_expression:
        return PhraseType(PhraseKind.EXPRESSION, gene=gene)
    if gene is not None and _gene_supports_expression(sentence, (first, last), gene, lexicons):
        return PhraseType(PhraseKind.EXPRESSION, gene=gene)
    return PhraseType(PhraseKind.OTHER, gene=gene)


def _range_head(sentence: DependencySentence, first: int, last: int) -> int:
    for i in range(first, last + 1):
        head = sentence.token(i).head
        if head == 0 or not first <= head <= last:
            return i
    return first


def _gene_supports_expression(
    sentence: DependencySentence,
    token_range: tuple[int, int],
    gene: EntityMention,
    lexicons: Mapping[str, Lexicon],
) -> bool:
    first, last = token_range
    head_index = _range_head(sentence, first, last)
    head = sentence.token(head_index)
    # the range is headed by the mention itself
    if head.char_start >= gene.char_start and head.char_end <= gene.char_end:
        return True
    covering = [t for t in sentence.tokens if t.char_start < gene.char_end and t.char_end > gene.char_start]
    expression = lexicons["expression"]
    for tok in covering:
        for ancestor in sentence.ancestors(tok.index):
            if tokens_contain_trigger([ancestor], expression):
                return True
    return False
