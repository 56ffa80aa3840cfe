"""Relation extraction over parsed abstracts.

Each body sentence runs through: trigger prefilter, comparison-pattern
matching (patterns with an ``entity2`` capture describe explicit two-entity
comparisons and are tried first, single-entity patterns second),
conjunction expansion, argument typing, gene extraction, scale-indicator
normalization, and disease inference.  Survivors become
:class:`GdaRecord` rows; everything dropped on the way is accounted for in
a diagnostics stream keyed by stage, so candidates are conserved:
``emitted + dropped == pattern matches``.

Extraction patterns must bind ``scale``, ``aspect`` and ``entity1``;
two-entity patterns additionally bind ``entity2``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

from .corpus import AbstractDoc, DependencySentence, retokenize_mirna, span_covers_whole_tokens
from .entities import (
    AnnotationPool,
    EntityMention,
    EntityType,
    MentionSource,
    PhraseKind,
    PhraseType,
    detect_mirna,
    phrase_type,
    resolve_overlaps,
)
from .lexicons import Level, Lexicon, contains_trigger, normalize_level
from .patterns import DepPattern, match_first

logger = logging.getLogger(__name__)

REQUIRED_CAPTURES = ("scale", "aspect", "entity1")

# modifiers that locate a sample relative to another rather than naming it;
# they stay out of the reported entity component
_RELATIVE_MODIFIERS = frozenset({"adjacent"})

_NP_DEPRELS = {"det", "amod", "compound", "nn", "nummod", "poss"}


class SentenceType(Enum):
    TYPE_A = "TypeA"
    TYPE_B = "TypeB"


class Stage:
    PREFILTER = "prefilter"
    PATTERN = "pattern"
    TYPING = "typing"
    GENE = "gene"
    LEVEL = "level"
    DISEASE = "disease"
    DEDUP = "dedup"


@dataclass(frozen=True)
class Diagnostic:
    pmid: str
    sent_id: int
    stage: str
    reason: str
    pattern_id: str | None = None

    def to_json_dict(self) -> dict:
        out = {"pmid": self.pmid, "sent_id": self.sent_id, "stage": self.stage, "reason": self.reason}
        if self.pattern_id is not None:
            out["pattern_id"] = self.pattern_id
        return out


@dataclass(frozen=True)
class TokenRange:
    """Inclusive range of 1-based token indices within one sentence."""

    first: int
    last: int

    def __post_init__(self):
        if self.first > self.last or self.first < 1:
            raise ValueError(f"bad token range {self.first}..{self.last}")

    def indices(self) -> range:
        return range(self.first, self.last + 1)

    def tokens(self, sentence: DependencySentence):
        return [sentence.token(i) for i in self.indices()]

    def char_span(self, sentence: DependencySentence) -> tuple[int, int]:
        return (sentence.token(self.first).char_start, sentence.token(self.last).char_end)

    def text(self, sentence: DependencySentence) -> str:
        start, end = self.char_span(sentence)
        return sentence.slice_text(start, end)

    def head_index(self, sentence: DependencySentence) -> int:
        for i in self.indices():
            head = sentence.token(i).head
            if head == 0 or not self.first <= head <= self.last:
                return i
        return self.first


@dataclass(frozen=True)
class ComparisonStructure:
    """Pattern-level result: what is compared, where, and how it scales."""

    sentence_type: SentenceType
    scale_indicator: TokenRange
    compared_aspect: TokenRange
    entity1: TokenRange
    entity2: TokenRange | None
    pattern_id: str

    def __post_init__(self):
        if (self.sentence_type is SentenceType.TYPE_A) != (self.entity2 is not None):
            raise ValueError("two-entity structures and only they carry entity2")

    def entity_ranges(self) -> list[TokenRange]:
        return [self.entity1] + ([self.entity2] if self.entity2 else [])


@dataclass(frozen=True)
class DiseaseResult:
    name: str
    norm_id: str | None
    id_system: str
    inferred_from: str


@dataclass(frozen=True)
class GdaRecord:
    pmid: str
    sent_id: int
    sentence_type: str
    gene_symbol: str
    gene_id: str | None
    gene_kind: str
    level: str
    disease_name: str
    disease_id: str | None
    disease_id_system: str
    disease_inferred_from: str
    pattern_id: str
    components: Mapping[str, str] = field(default_factory=dict, compare=False)
    spans: Mapping[str, tuple[int, int]] = field(default_factory=dict, compare=False)

    JSON_FIELDS = (
        "pmid", "sent_id", "sentence_type", "gene_symbol", "gene_id", "gene_kind",
        "level", "disease_name", "disease_id", "disease_id_system",
        "disease_inferred_from", "pattern_id",
    )

    def to_json_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.JSON_FIELDS}

    @property
    def dedup_key(self) -> tuple:
        return (self.pmid, self.gene_id, self.level, self.disease_id, self.sent_id)


# -- pattern application -------------------------------------------------------


def validate_extraction_patterns(patterns: Sequence[DepPattern]) -> None:
    for pattern in patterns:
        missing = [c for c in REQUIRED_CAPTURES if c not in pattern.capture_names]
        if missing:
            raise ValueError(
                f"pattern {pattern.pattern_id!r} lacks required captures: {', '.join(missing)}"
            )


def split_patterns_by_type(patterns: Sequence[DepPattern]) -> tuple[list[DepPattern], list[DepPattern]]:
    two_entity = [p for p in patterns if "entity2" in p.capture_names]
    one_entity = [p for p in patterns if "entity2" not in p.capture_names]
    return two_entity, one_entity


def np_closure(sentence: DependencySentence, index: int, include_of: bool = False) -> TokenRange:
    """The noun-phrase span projected by a token.

    Follows determiner/adjective/compound/numeric children recursively and,
    when ``include_of`` is set, an attached ``of``-prepositional phrase so
    aspect phrases like "the expression of X" stay in one range.
    """
    members = {index}
    stack = [index]
    while stack:
        cur = stack.pop()
        for child in sentence.children(cur):
            if child.deprel in _NP_DEPRELS:
                members.add(child.index)
                stack.append(child.index)
            elif include_of and child.deprel == "prep" and child.lemma == "of":
                members.add(child.index)
                for obj in sentence.children(child.index):
                    if obj.deprel == "pobj":
                        inner = np_closure(sentence, obj.index, include_of=False)
                        members.update(inner.indices())
    return TokenRange(min(members), max(members))


def prefilter(sentence: DependencySentence, lexicons: Mapping[str, Lexicon]) -> bool:
    """Skip sentences without any sentence-filter trigger."""
    return contains_trigger(sentence, lexicons["sentence_filter"])


def classify_and_extract(
    sentence: DependencySentence, patterns: Sequence[DepPattern]
) -> ComparisonStructure | None:
    """First matching comparison pattern, converted to token ranges.

    Two-entity patterns are tried at every priority before any
    single-entity pattern, so an explicit comparison never degrades to a
    one-entity reading.  Sentences matching nothing yield None.
    """
    two_entity, one_entity = split_patterns_by_type(patterns)
    hit = match_first(two_entity, sentence)
    sentence_type = SentenceType.TYPE_A
    if hit is None:
        hit = match_first(one_entity, sentence)
        sentence_type = SentenceType.TYPE_B
    if hit is None:
        return None
    pattern, result = hit
    b = result.bindings
    scale = TokenRange(b["scale"], b["scale"])
    aspect = np_closure(sentence, b["aspect"], include_of=True)
    entity1 = np_closure(sentence, b["entity1"], include_of=False)
    entity2 = None
    if sentence_type is SentenceType.TYPE_A:
        entity2 = np_closure(sentence, b["entity2"], include_of=False)
    return ComparisonStructure(
        sentence_type=sentence_type,
        scale_indicator=scale,
        compared_aspect=aspect,
        entity1=entity1,
        entity2=entity2,
        pattern_id=pattern.pattern_id,
    )


def expand_conjuncts(
    cs: ComparisonStructure,
    sentence: DependencySentence,
    mentions: Sequence[EntityMention],
) -> list[ComparisonStructure]:
    """One structure per coordinated aspect gene and per coordinated entity.

    The input structure always comes first.  Aspect conjuncts count only
    when they are themselves gene/miRNA mentions; entity1 conjuncts always
    spawn a structure sharing scale and aspect.
    """

    def conj_children(head_index: int):
        return [t for t in sentence.children(head_index) if t.deprel.startswith("conj")]

    def is_gene_token(token) -> bool:
        return any(
            m.etype in (EntityType.GENE, EntityType.MIRNA)
            and m.char_start <= token.char_start
            and m.char_end >= token.char_end
            for m in mentions
        )

    with_aspects = [cs]
    aspect_head = cs.compared_aspect.head_index(sentence)
    for conj in conj_children(aspect_head):
        if is_gene_token(conj):
            with_aspects.append(
                ComparisonStructure(
                    sentence_type=cs.sentence_type,
                    scale_indicator=cs.scale_indicator,
                    compared_aspect=np_closure(sentence, conj.index, include_of=True),
                    entity1=cs.entity1,
                    entity2=cs.entity2,
                    pattern_id=cs.pattern_id,
                )
            )
    out = []
    for structure in with_aspects:
        out.append(structure)
        entity_head = structure.entity1.head_index(sentence)
        for conj in conj_children(entity_head):
            out.append(
                ComparisonStructure(
                    sentence_type=structure.sentence_type,
                    scale_indicator=structure.scale_indicator,
                    compared_aspect=structure.compared_aspect,
                    entity1=np_closure(sentence, conj.index, include_of=False),
                    entity2=structure.entity2,
                    pattern_id=structure.pattern_id,
                )
            )
    return out


def filter_arguments(
    cs: ComparisonStructure,
    aspect_type: PhraseType,
    entity_types: Sequence[PhraseType],
) -> bool:
    """Argument check: expression aspect, disease/disease-sample entities."""
    entity_ok = {PhraseKind.DISEASE, PhraseKind.DISEASE_SAMPLE, PhraseKind.GENERIC_DISEASE}
    if aspect_type.value is not PhraseKind.EXPRESSION:
        return False
    if len(entity_types) != len(cs.entity_ranges()):
        raise ValueError("one typing result required per entity range")
    return all(t.value in entity_ok for t in entity_types)


def scale_text(cs: ComparisonStructure, sentence: DependencySentence) -> str:
    """Scale-indicator wording used for level normalization, advmods stripped."""
    words = [t.form for t in cs.scale_indicator.tokens(sentence) if t.deprel != "advmod"]
    return " ".join(words).lower()


def entity_component_text(sentence: DependencySentence, rng: TokenRange) -> str:
    """Reported surface of an entity range.

    Leading determiners and purely relative modifiers ("adjacent") are not
    part of the entity name.
    """
    first, last = rng.first, rng.last
    while first < last:
        token = sentence.token(first)
        if token.deprel == "det" or token.lemma in _RELATIVE_MODIFIERS:
            first += 1
        else:
            break
    trimmed = TokenRange(first, last)
    return trimmed.text(sentence)


def gene_from_aspect(
    cs: ComparisonStructure,
    sentence: DependencySentence,
    mentions: Sequence[EntityMention],
) -> EntityMention | None:
    """The gene/miRNA mention inside the aspect range.

    With several distinct candidates the one closest to the aspect head
    token wins and the ambiguity is logged.
    """
    start, end = cs.compared_aspect.char_span(sentence)
    candidates = [
        m for m in mentions
        if m.etype in (EntityType.GENE, EntityType.MIRNA) and m.within(start, end)
    ]
    if not candidates:
        return None
    distinct = {m.norm_id for m in candidates}
    if len(distinct) == 1:
        return candidates[0]
    head = sentence.token(cs.compared_aspect.head_index(sentence))

    def distance(m: EntityMention) -> tuple[int, int]:
        mid = (m.char_start + m.char_end) // 2
        head_mid = (head.char_start + head.char_end) // 2
        return (abs(mid - head_mid), m.char_start)

    winner = min(candidates, key=distance)
    logger.info(
        "pmid %s sent %d: %d distinct genes in aspect, keeping %r",
        winner.pmid, sentence.sent_id, len(distinct), winner.surface,
    )
    return winner


def infer_disease(
    cs: ComparisonStructure,
    doc: AbstractDoc,
    sentence: DependencySentence,
    mentions_by_sent: Mapping[int, Sequence[EntityMention]],
    lexicons: Mapping[str, Lexicon],
) -> DiseaseResult | None:
    """Resolve the disease for a structure.

    A specific disease mention inside an entity range wins.  Otherwise the
    title, then the first body sentence, is searched; as a last resort,
    body sentences carrying an investigation/analyzed trigger are scanned
    in document order (the abstract's methods part).
    """
    sentence_mentions = mentions_by_sent.get(sentence.sent_id, ())
    for rng in cs.entity_ranges():
        start, end = rng.char_span(sentence)
        for mention in sentence_mentions:
            if mention.etype is EntityType.DISEASE and mention.norm_id and mention.within(start, end):
                return DiseaseResult(mention.surface, mention.norm_id, "MEDIC", "sentence")

    def first_disease(sent_id: int) -> EntityMention | None:
        for mention in mentions_by_sent.get(sent_id, ()):
            if mention.etype is EntityType.DISEASE and mention.norm_id:
                return mention
        return None

    hit = first_disease(0)
    if hit is not None:
        return DiseaseResult(hit.surface, hit.norm_id, "MEDIC", "title")
    if doc.sentences:
        hit = first_disease(1)
        if hit is not None:
            return DiseaseResult(hit.surface, hit.norm_id, "MEDIC", "first_sentence")
    investigation = lexicons["investigation"]
    analyzed = lexicons["analyzed"]
    for body in doc.sentences:
        if contains_trigger(body, investigation) or contains_trigger(body, analyzed):
            hit = first_disease(body.sent_id)
            if hit is not None:
                return DiseaseResult(hit.surface, hit.norm_id, "MEDIC", "methods")
    return None


# -- document pipeline ---------------------------------------------------------


def collect_mentions(
    doc: AbstractDoc,
    sentence: DependencySentence,
    pool: AnnotationPool,
) -> list[EntityMention]:
    """Mentions relevant to one sentence, overlaps resolved.

    Store mentions overlapping the sentence come first; miRNA names are
    matched from the text; pooled surface recovery fills in a type only
    when the sentence has no store mention of that type.
    """
    start, end = sentence.char_span
    store = [m for m in pool.mentions_for(doc.pmid) if m.overlaps(start, end)]
    regex = detect_mirna(sentence.text, origin=sentence.origin, pmid=doc.pmid)
    pooled: list[EntityMention] = []
    gene_like = (EntityType.GENE, EntityType.MIRNA)
    if not any(m.etype in gene_like for m in store):
        pooled.extend(pool.scan_text(doc.pmid, sentence.text, sentence.origin, gene_like))
    if not any(m.etype is EntityType.DISEASE for m in store):
        pooled.extend(pool.scan_text(doc.pmid, sentence.text, sentence.origin, (EntityType.DISEASE,)))
    return resolve_overlaps(store + regex + pooled)


def _retokenized(sentence: DependencySentence, mentions: Sequence[EntityMention]) -> DependencySentence:
    spans = [
        (m.char_start, m.char_end)
        for m in mentions
        if m.etype is EntityType.MIRNA and span_covers_whole_tokens(sentence, (m.char_start, m.char_end))
    ]
    if not spans:
        return sentence
    return retokenize_mirna(sentence, spans)


def load_medic_doid(path: str | Path) -> dict[str, str]:
    """Two-column TSV mapping disease ids between vocabularies."""
    mapping: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise ValueError(f"{path}:{line_no}: expected two tab-separated columns")
            mapping[cols[0].strip()] = cols[1].strip()
    return mapping


def extract_gda(
    doc: AbstractDoc,
    patterns: Sequence[DepPattern],
    lexicons: Mapping[str, Lexicon],
    pool: AnnotationPool,
    mapping: Mapping[str, str] | None = None,
    diagnostics: list[Diagnostic] | None = None,
) -> list[GdaRecord]:
    """Run the full pipeline over one document's body sentences."""
    validate_extraction_patterns(patterns)
    diag = diagnostics if diagnostics is not None else []
    records: list[GdaRecord] = []
    seen: set[tuple] = set()

    mentions_by_sent: dict[int, list[EntityMention]] = {}
    sentences: dict[int, DependencySentence] = {}
    for raw_sentence in doc.all_sentences():
        mentions = collect_mentions(doc, raw_sentence, pool)
        sentence = _retokenized(raw_sentence, mentions)
        mentions_by_sent[sentence.sent_id] = mentions
        sentences[sentence.sent_id] = sentence

    for sent_id in sorted(sentences):
        if sent_id == 0:
            continue  # the title feeds disease inference, not extraction
        sentence = sentences[sent_id]
        mentions = mentions_by_sent[sent_id]
        if not prefilter(sentence, lexicons):
            diag.append(Diagnostic(doc.pmid, sent_id, Stage.PREFILTER, "no sentence-filter trigger"))
            continue
        structure = classify_and_extract(sentence, patterns)
        if structure is None:
            diag.append(Diagnostic(doc.pmid, sent_id, Stage.PATTERN, "no comparison pattern matched"))
            continue
        for cs in expand_conjuncts(structure, sentence, mentions):
            record = _finish_candidate(
                cs, doc, sentence, mentions, mentions_by_sent, lexicons, mapping, seen, diag
            )
            if record is not None:
                records.append(record)
    return records


def _finish_candidate(
    cs: ComparisonStructure,
    doc: AbstractDoc,
    sentence: DependencySentence,
    mentions: Sequence[EntityMention],
    mentions_by_sent: Mapping[int, Sequence[EntityMention]],
    lexicons: Mapping[str, Lexicon],
    mapping: Mapping[str, str] | None,
    seen: set[tuple],
    diag: list[Diagnostic],
) -> GdaRecord | None:
    sent_id = sentence.sent_id
    aspect_type = phrase_type(
        sentence, (cs.compared_aspect.first, cs.compared_aspect.last), lexicons, mentions
    )
    entity_types = [
        phrase_type(sentence, (rng.first, rng.last), lexicons, mentions)
        for rng in cs.entity_ranges()
    ]
    if not filter_arguments(cs, aspect_type, entity_types):
        got = [aspect_type.value.value] + [t.value.value for t in entity_types]
        diag.append(
            Diagnostic(doc.pmid, sent_id, Stage.TYPING, f"argument types {got}", cs.pattern_id)
        )
        return None
    gene = gene_from_aspect(cs, sentence, mentions)
    if gene is None:
        diag.append(Diagnostic(doc.pmid, sent_id, Stage.GENE, "no gene/miRNA mention in aspect", cs.pattern_id))
        return None
    level = normalize_level(scale_text(cs, sentence), lexicons)
    if level is Level.UNKNOWN:
        diag.append(
            Diagnostic(doc.pmid, sent_id, Stage.LEVEL,
                       f"scale {scale_text(cs, sentence)!r} not normalizable", cs.pattern_id)
        )
        return None
    disease = infer_disease(cs, doc, sentence, mentions_by_sent, lexicons)
    if disease is None:
        diag.append(Diagnostic(doc.pmid, sent_id, Stage.DISEASE, "no disease found", cs.pattern_id))
        return None
    disease_id = disease.norm_id
    id_system = disease.id_system
    if mapping and disease_id is not None and disease_id in mapping:
        disease_id = mapping[disease_id]
        id_system = "DOID"

    components = {
        "scale": cs.scale_indicator.text(sentence),
        "aspect": gene.surface,
        "entity1": entity_component_text(sentence, cs.entity1),
    }
    spans = {
        "scale": cs.scale_indicator.char_span(sentence),
        "aspect": cs.compared_aspect.char_span(sentence),
        "entity1": cs.entity1.char_span(sentence),
        "gene": (gene.char_start, gene.char_end),
    }
    if cs.entity2 is not None:
        components["entity2"] = entity_component_text(sentence, cs.entity2)
        spans["entity2"] = cs.entity2.char_span(sentence)

    record = GdaRecord(
        pmid=doc.pmid,
        sent_id=sent_id,
        sentence_type=cs.sentence_type.value,
        gene_symbol=gene.surface,
        gene_id=gene.norm_id,
        gene_kind=gene.etype.value,
        level=level.value,
        disease_name=disease.name,
        disease_id=disease_id,
        disease_id_system=id_system,
        disease_inferred_from=disease.inferred_from,
        pattern_id=cs.pattern_id,
        components=components,
        spans=spans,
    )
    if record.dedup_key in seen:
        diag.append(Diagnostic(doc.pmid, sent_id, Stage.DEDUP, "duplicate record", cs.pattern_id))
        return None
    seen.add(record.dedup_key)
    return record


def extract_corpus(
    docs: Sequence[AbstractDoc],
    patterns: Sequence[DepPattern],
    lexicons: Mapping[str, Lexicon],
    pool: AnnotationPool,
    mapping: Mapping[str, str] | None = None,
) -> tuple[list[GdaRecord], list[Diagnostic]]:
    records: list[GdaRecord] = []
    diagnostics: list[Diagnostic] = []
    for doc in docs:
        records.extend(extract_gda(doc, patterns, lexicons, pool, mapping, diagnostics))
    return records, diagnostics


# -- serialization --------------------------------------------------------------


def write_jsonl(records: Iterable[GdaRecord], handle: IO[str]) -> None:
    for record in records:
        handle.write(json.dumps(record.to_json_dict(), ensure_ascii=False) + "\n")


def write_tsv(records: Iterable[GdaRecord], handle: IO[str]) -> None:
    handle.write("\t".join(GdaRecord.JSON_FIELDS) + "\n")
    for record in records:
        row = record.to_json_dict()
        handle.write("\t".join("" if row[k] is None else str(row[k]) for k in GdaRecord.JSON_FIELDS) + "\n")


def write_diagnostics(diagnostics: Iterable[Diagnostic], handle: IO[str]) -> None:
    for item in diagnostics:
        handle.write(json.dumps(item.to_json_dict(), ensure_ascii=False) + "\n")
