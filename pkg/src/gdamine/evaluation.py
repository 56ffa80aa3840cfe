"""Scoring extracted records against ground truth.

Truth arrives as a TSV (header: pmid, sent_id, sentence_text, gene_id,
gene_symbol, level, sentence_type, optional mentions_json).  Records align
to truth rows on (pmid, sent_id, gene_id); metrics are then computed per
dimension (expression level, sentence type) over the aligned pairs, both
micro (instances pooled) and macro (classes averaged).  The share of truth
rows that produced any extraction is reported separately as
``parsed_fraction``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .entities import EntityMention, EntityType, MentionSource
from .extraction import GdaRecord

LEVELS = ("High", "Low")
SENTENCE_TYPES = ("TypeA", "TypeB")


class TruthFormatError(ValueError):
    pass


@dataclass(frozen=True)
class GroundTruthRow:
    pmid: str
    sent_id: int
    sentence_text: str | None
    gene_id: str
    gene_symbol: str
    level: str
    sentence_type: str
    mentions: tuple[EntityMention, ...] = ()

    def __post_init__(self):
        if self.level not in LEVELS:
            raise TruthFormatError(f"bad level {self.level!r}")
        if self.sentence_type not in SENTENCE_TYPES:
            raise TruthFormatError(f"bad sentence type {self.sentence_type!r}")

    @property
    def key(self) -> tuple[str, int, str]:
        return (self.pmid, self.sent_id, self.gene_id)


REQUIRED_COLUMNS = ("pmid", "sent_id", "sentence_text", "gene_id", "gene_symbol", "level", "sentence_type")


def load_truth(path: str | Path) -> list[GroundTruthRow]:
    path = Path(path)
    rows: list[GroundTruthRow] = []
    with open(path, encoding="utf-8") as handle:
        header_line = handle.readline().rstrip("\n")
        if not header_line:
            raise TruthFormatError(f"{path}: empty truth file")
        header = header_line.split("\t")
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise TruthFormatError(f"{path}: missing columns {', '.join(missing)}")
        for line_no, raw in enumerate(handle, start=2):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            cols = dict(zip(header, line.split("\t")))
            mentions: tuple[EntityMention, ...] = ()
            if cols.get("mentions_json"):
                mentions = tuple(
                    EntityMention(
                        pmid=cols["pmid"],
                        char_start=m["start"],
                        char_end=m["end"],
                        surface=m["text"],
                        etype=EntityType(m["type"]),
                        norm_id=m.get("id"),
                        source=MentionSource.PUBTATOR,
                    )
                    for m in json.loads(cols["mentions_json"])
                )
            try:
                rows.append(
                    GroundTruthRow(
                        pmid=cols["pmid"],
                        sent_id=int(cols["sent_id"]),
                        sentence_text=cols.get("sentence_text") or None,
                        gene_id=cols["gene_id"],
                        gene_symbol=cols["gene_symbol"],
                        level=cols["level"],
                        sentence_type=cols["sentence_type"],
                        mentions=mentions,
                    )
                )
            except (KeyError, ValueError) as exc:
                raise TruthFormatError(f"{path}:{line_no}: {exc}") from None
    return rows


@dataclass(frozen=True)
class Alignment:
    pairs: tuple[tuple[GroundTruthRow, GdaRecord | None], ...]
    unmatched_records: tuple[GdaRecord, ...]

    @property
    def parsed_fraction(self) -> float:
        if not self.pairs:
            return 0.0
        matched = sum(1 for _, record in self.pairs if record is not None)
        return matched / len(self.pairs)


def align(records: Sequence[GdaRecord], truth: Sequence[GroundTruthRow]) -> Alignment:
    """Pair each truth row with at most one record on (pmid, sent_id, gene_id)."""
    seen: set[tuple] = set()
    for row in truth:
        if row.key in seen:
            raise TruthFormatError(f"duplicate truth key {row.key}")
        seen.add(row.key)
    by_key: dict[tuple, GdaRecord] = {}
    for record in records:
        key = (record.pmid, record.sent_id, record.gene_id)
        by_key.setdefault(key, record)
    pairs = tuple((row, by_key.pop(row.key, None)) for row in truth)
    matched_ids = {id(rec) for _, rec in pairs if rec is not None}
    unmatched = tuple(r for r in records if id(r) not in matched_ids)
    return Alignment(pairs=pairs, unmatched_records=unmatched)


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float

    def to_json_dict(self) -> dict:
        return {"accuracy": self.accuracy, "precision": self.precision, "recall": self.recall, "f1": self.f1}


@dataclass(frozen=True)
class DimensionScores:
    micro: Metrics
    macro: Metrics

    def to_json_dict(self) -> dict:
        return {"micro": self.micro.to_json_dict(), "macro": self.macro.to_json_dict()}


@dataclass(frozen=True)
class EvalReport:
    level: DimensionScores
    sentence_type: DimensionScores
    parsed_fraction: float

    def to_json_dict(self) -> dict:
        return {
            "level": self.level.to_json_dict(),
            "sentence_type": self.sentence_type.to_json_dict(),
            "parsed_fraction": self.parsed_fraction,
        }


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def _score_dimension(instances: Sequence[tuple[str, str]]) -> DimensionScores:
    classes = sorted({truth for truth, _ in instances})
    correct = sum(1 for truth, predicted in instances if truth == predicted)
    micro_value = _safe_div(correct, len(instances))
    micro = Metrics(micro_value, micro_value, micro_value, micro_value)

    precisions, recalls, f1s = [], [], []
    for cls in classes:
        tp = sum(1 for truth, predicted in instances if truth == cls and predicted == cls)
        predicted_n = sum(1 for _, predicted in instances if predicted == cls)
        truth_n = sum(1 for truth, _ in instances if truth == cls)
        p = _safe_div(tp, predicted_n)
        r = _safe_div(tp, truth_n)
        precisions.append(p)
        recalls.append(r)
        f1s.append(_safe_div(2 * p * r, p + r))
    macro = Metrics(
        accuracy=_safe_div(sum(recalls), len(classes)),
        precision=_safe_div(sum(precisions), len(classes)),
        recall=_safe_div(sum(recalls), len(classes)),
        f1=_safe_div(sum(f1s), len(classes)),
    )
    return DimensionScores(micro=micro, macro=macro)


def score(alignment: Alignment) -> EvalReport:
    """Metrics over the aligned pairs that carry a prediction.

    Micro accuracy, precision and recall coincide for this single-label
    setting; macro averages per-class values (macro accuracy is balanced
    accuracy, the mean of per-class recall).
    """
    paired = [(row, record) for row, record in alignment.pairs if record is not None]
    if not paired:
        raise ValueError("nothing to score: no aligned pairs carry a prediction")
    level_instances = [(row.level, record.level) for row, record in paired]
    type_instances = [(row.sentence_type, record.sentence_type) for row, record in paired]
    return EvalReport(
        level=_score_dimension(level_instances),
        sentence_type=_score_dimension(type_instances),
        parsed_fraction=alignment.parsed_fraction,
    )


def format_report_table(reports: Mapping[str, EvalReport], averaging: str = "micro") -> str:
    """Aligned text table: one metric per row, level/type columns per condition."""
    conditions = list(reports)
    headers = ["metric"]
    for condition in conditions:
        headers.append(f"{condition}:level")
        headers.append(f"{condition}:type")
    rows = []
    for metric in ("accuracy", "precision", "recall", "f1"):
        row = [metric]
        for condition in conditions:
            report = reports[condition]
            level_scores = getattr(report.level, averaging)
            type_scores = getattr(report.sentence_type, averaging)
            row.append(f"{getattr(level_scores, metric):.4f}")
            row.append(f"{getattr(type_scores, metric):.4f}")
        rows.append(row)
    rows.append(
        ["parsed_fraction"]
        + [cell for condition in conditions for cell in (f"{reports[condition].parsed_fraction:.4f}", "")]
    )
    widths = [max(len(r[i]) for r in [headers] + rows) for i in range(len(headers))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)
