"""Command-line entry point.

Subcommands: ``extract`` (corpus -> JSONL/TSV records), ``evaluate``
(extract + score against a truth TSV), ``check`` (validate pattern,
lexicon, corpus and annotation files), ``inspect`` (dump one sentence's
tree, mentions and pattern trace).  Exit codes: 0 success, 1 processing
failure, 2 usage/configuration error.  Set ``GDA_LOG`` to a logging level
name for verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import corpus as corpus_mod
from . import evaluation as eval_mod
from . import extraction as extract_mod
from . import lexicons as lexicons_mod
from . import patterns as patterns_mod
from .entities import AnnotationPool, load_pubtator

EXIT_OK = 0
EXIT_PROCESSING = 1
EXIT_CONFIG = 2

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    corpus: Path | None = None
    pubtator: list[Path] = field(default_factory=list)
    patterns: list[Path] = field(default_factory=list)
    lexicons: Path | None = None
    medic_doid: Path | None = None
    truth: Path | None = None
    use_truth_mentions: bool = False
    output_format: str = "jsonl"
    out: Path | None = None
    diagnostics: Path | None = None

    def require(self, *names: str) -> None:
        for name in names:
            value = getattr(self, name)
            if value is None or value == []:
                raise ConfigError(f"--{name.replace('_', '-')} is required")
        for name in ("corpus", "lexicons", "medic_doid", "truth"):
            value = getattr(self, name)
            if value is not None and not Path(value).exists():
                raise ConfigError(f"--{name.replace('_', '-')}: {value} does not exist")
        for path in list(self.pubtator) + list(self.patterns):
            if not Path(path).exists():
                raise ConfigError(f"{path} does not exist")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        corpus=getattr(args, "corpus", None),
        pubtator=list(getattr(args, "pubtator", []) or []),
        patterns=list(getattr(args, "patterns", []) or []),
        lexicons=getattr(args, "lexicons", None),
        medic_doid=getattr(args, "medic_doid", None),
        truth=getattr(args, "truth", None),
        use_truth_mentions=getattr(args, "use_truth_mentions", False),
        output_format=getattr(args, "format", "jsonl"),
        out=getattr(args, "out", None),
        diagnostics=getattr(args, "diagnostics", None),
    )


def _load_inputs(config: RunConfig):
    with open(config.corpus, encoding="utf-8") as handle:
        docs = corpus_mod.load_conllu(handle)
    mentions = []
    for path in config.pubtator:
        with open(path, encoding="utf-8") as handle:
            mentions.extend(load_pubtator(handle))
    pool = AnnotationPool(mentions)
    patterns = patterns_mod.load_patterns(config.patterns)
    extract_mod.validate_extraction_patterns(patterns)
    lexicons = lexicons_mod.load_lexicons(config.lexicons)
    mapping = extract_mod.load_medic_doid(config.medic_doid) if config.medic_doid else None
    return docs, pool, patterns, lexicons, mapping


def _write_records(records, config: RunConfig) -> None:
    def emit(handle):
        if config.output_format == "tsv":
            extract_mod.write_tsv(records, handle)
        else:
            extract_mod.write_jsonl(records, handle)

    if config.out is None:
        emit(sys.stdout)
    else:
        with open(config.out, "w", encoding="utf-8") as handle:
            emit(handle)


def cmd_extract(config: RunConfig) -> int:
    config.require("corpus", "patterns", "lexicons")
    docs, pool, patterns, lexicons, mapping = _load_inputs(config)
    records, diagnostics = extract_mod.extract_corpus(docs, patterns, lexicons, pool, mapping)
    _write_records(records, config)
    if config.diagnostics is not None:
        with open(config.diagnostics, "w", encoding="utf-8") as handle:
            extract_mod.write_diagnostics(diagnostics, handle)
    logger.info("extracted %d records, %d diagnostics", len(records), len(diagnostics))
    return EXIT_OK


def _truth_pool(truth_rows) -> AnnotationPool:
    mentions = [m for row in truth_rows for m in row.mentions]
    return AnnotationPool(mentions)


def cmd_evaluate(config: RunConfig, report_json: Path | None = None) -> int:
    config.require("corpus", "patterns", "lexicons", "truth")
    docs, pool, patterns, lexicons, mapping = _load_inputs(config)
    truth = eval_mod.load_truth(config.truth)
    if not truth:
        raise ConfigError(f"truth file {config.truth} has no rows")

    reports: dict[str, eval_mod.EvalReport] = {}
    records, _ = extract_mod.extract_corpus(docs, patterns, lexicons, pool, mapping)
    reports["full_pipeline"] = eval_mod.score(eval_mod.align(records, truth))
    if config.use_truth_mentions:
        alt_records, _ = extract_mod.extract_corpus(
            docs, patterns, lexicons, _truth_pool(truth), mapping
        )
        reports["truth_mentions"] = eval_mod.score(eval_mod.align(alt_records, truth))

    for averaging in ("micro", "macro"):
        print(f"[{averaging}]")
        print(eval_mod.format_report_table(reports, averaging=averaging))
        print()
    if report_json is not None:
        payload = {name: report.to_json_dict() for name, report in reports.items()}
        with open(report_json, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2)
            handle.write("\n")
    return EXIT_OK


def cmd_check(config: RunConfig) -> int:
    """Validate whichever inputs were given; print a summary."""
    if not (config.patterns or config.lexicons or config.corpus or config.pubtator):
        raise ConfigError("nothing to check: pass --patterns, --lexicons, --corpus and/or --pubtator")
    config.require()
    if config.patterns:
        patterns = patterns_mod.load_patterns(config.patterns)
        print(f"patterns: {len(patterns)} ok")
        for pattern in patterns:
            captures = ", ".join(pattern.capture_names)
            print(f"  {pattern.pattern_id} (priority {pattern.priority}): captures {captures}")
    if config.lexicons:
        lexicons = lexicons_mod.load_lexicons(config.lexicons)
        print(f"lexicons: {len(lexicons)} ok")
        for category in lexicons_mod.CATEGORIES:
            print(f"  {category}: {len(lexicons[category].entries)} phrases")
    if config.corpus:
        with open(config.corpus, encoding="utf-8") as handle:
            docs = corpus_mod.load_conllu(handle)
        n_sentences = sum(1 + len(d.sentences) for d in docs)
        print(f"corpus: {len(docs)} documents, {n_sentences} sentences ok")
    for path in config.pubtator:
        with open(path, encoding="utf-8") as handle:
            mentions = load_pubtator(handle)
        print(f"annotations {path}: {len(mentions)} mentions ok")
    return EXIT_OK


def cmd_inspect(config: RunConfig, pmid: str, sent_id: int) -> int:
    config.require("corpus")
    with open(config.corpus, encoding="utf-8") as handle:
        docs = corpus_mod.load_conllu(handle)
    doc = next((d for d in docs if d.pmid == pmid), None)
    if doc is None:
        raise ConfigError(f"pmid {pmid} not in corpus")
    try:
        sentence = doc.sentence(sent_id)
    except IndexError:
        raise ConfigError(f"pmid {pmid} has no sentence {sent_id}") from None

    mentions = []
    if config.pubtator:
        raw = []
        for path in config.pubtator:
            with open(path, encoding="utf-8") as handle:
                raw.extend(load_pubtator(handle))
        pool = AnnotationPool(raw)
        mentions = extract_mod.collect_mentions(doc, sentence, pool)
        sentence = extract_mod._retokenized(sentence, mentions)

    print(f"# pmid {pmid} sent {sent_id}: {sentence.text}")
    print(f"{'idx':>4} {'form':<18} {'lemma':<18} {'pos':<5} {'head':>4} {'deprel':<10} span")
    for tok in sentence.tokens:
        print(
            f"{tok.index:>4} {tok.form:<18} {tok.lemma:<18} {tok.pos:<5} "
            f"{tok.head:>4} {tok.deprel:<10} {tok.char_start}..{tok.char_end}"
        )
    if mentions:
        print("mentions:")
        for m in mentions:
            print(f"  {m.etype.value:<8} {m.surface!r} id={m.norm_id} source={m.source.value} {m.char_start}..{m.char_end}")
    if config.patterns:
        patterns = patterns_mod.load_patterns(config.patterns)
        print("pattern trace:")
        for pattern in sorted(patterns, key=lambda p: p.priority):
            results = patterns_mod.match(pattern, sentence)
            if results:
                bindings = ", ".join(f"{k}={v}" for k, v in sorted(results[0].bindings.items()))
                print(f"  {pattern.pattern_id}: MATCH ({bindings})" + (f" +{len(results) - 1} more" if len(results) > 1 else ""))
            else:
                print(f"  {pattern.pattern_id}: no match")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gdamine", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, *, corpus=False, data=False):
        if corpus:
            p.add_argument("--corpus", type=Path, help="CoNLL-U corpus file")
            p.add_argument("--pubtator", type=Path, action="append", default=[],
                           help="annotation file (repeatable)")
        if data:
            p.add_argument("--patterns", type=Path, nargs="+", default=[], help="pattern files")
            p.add_argument("--lexicons", type=Path, help="lexicon directory")

    p_extract = sub.add_parser("extract", help="extract records from a corpus")
    add_common(p_extract, corpus=True, data=True)
    p_extract.add_argument("--medic-doid", type=Path, dest="medic_doid",
                           help="two-column TSV mapping disease ids to DOIDs")
    p_extract.add_argument("--format", choices=("jsonl", "tsv"), default="jsonl")
    p_extract.add_argument("--out", type=Path, help="output path (default stdout)")
    p_extract.add_argument("--diagnostics", type=Path, help="write per-sentence drop reasons (JSONL)")

    p_eval = sub.add_parser("evaluate", help="extract and score against a truth TSV")
    add_common(p_eval, corpus=True, data=True)
    p_eval.add_argument("--medic-doid", type=Path, dest="medic_doid")
    p_eval.add_argument("--truth", type=Path, help="ground-truth TSV")
    p_eval.add_argument("--use-truth-mentions", action="store_true",
                        help="also score with truth-supplied mentions replacing the annotation store")
    p_eval.add_argument("--report-json", type=Path, dest="report_json", help="write metrics as JSON")

    p_check = sub.add_parser("check", help="validate patterns, lexicons, corpus, annotations")
    add_common(p_check, corpus=True, data=True)

    p_inspect = sub.add_parser("inspect", help="print one sentence's tree, mentions and pattern trace")
    add_common(p_inspect, corpus=True, data=True)
    p_inspect.add_argument("pmid")
    p_inspect.add_argument("sent_id", type=int)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("GDA_LOG", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    config = _config_from_args(args)
    try:
        if args.command == "extract":
            return cmd_extract(config)
        if args.command == "evaluate":
            return cmd_evaluate(config, report_json=getattr(args, "report_json", None))
        if args.command == "check":
            return cmd_check(config)
        if args.command == "inspect":
            return cmd_inspect(config, args.pmid, args.sent_id)
        parser.error(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROCESSING
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
