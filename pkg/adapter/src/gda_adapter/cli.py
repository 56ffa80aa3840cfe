"""Adapter command line: ``parse`` (abstracts -> CoNLL-U) and ``fetch``
(PMID list -> PubTator-format annotations)."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .parsing import get_parser, parse_abstract, read_abstracts, to_conllu
from .pubtator import fetch_pubtator, read_pmid_list


def cmd_parse(args) -> int:
    try:
        abstracts = read_abstracts(args.infile)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    parser = get_parser(args.backend)
    parsed = []
    failures = 0
    for abstract in abstracts:
        try:
            sentences = parse_abstract(abstract, parser)
            if not sentences:
                raise ValueError("no parseable sentences")
            parsed.append((abstract, sentences))
        except Exception as exc:  # noqa: BLE001 - skip and report per document
            failures += 1
            print(f"skipping pmid {abstract.pmid}: {exc}", file=sys.stderr)
    Path(args.out).write_text(to_conllu(parsed), encoding="utf-8")
    if abstracts and failures == len(abstracts):
        print("error: every document failed to parse", file=sys.stderr)
        return 1
    return 0


def cmd_fetch(args) -> int:
    try:
        pmids = read_pmid_list(args.pmids)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    result = fetch_pubtator(pmids)
    Path(args.out).write_text(result.text, encoding="utf-8")
    report_lines = [f"missing: {p}" for p in result.missing]
    report_lines += [f"failed: {p}: {reason}" for p, reason in sorted(result.failed.items())]
    if args.missing:
        Path(args.missing).write_text("".join(line + "\n" for line in report_lines), encoding="utf-8")
    for line in report_lines:
        print(line, file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gda-adapter", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_parse = sub.add_parser("parse", help="convert raw abstracts to the corpus CoNLL-U dialect")
    p_parse.add_argument("--in", dest="infile", required=True, help="TSV (pmid/title/abstract) or JSONL")
    p_parse.add_argument("--out", required=True, help="CoNLL-U output path")
    p_parse.add_argument("--backend", choices=("auto", "heuristic", "spacy"), default="auto")

    p_fetch = sub.add_parser("fetch", help="download annotations for a PMID list")
    p_fetch.add_argument("--pmids", required=True, help="file with one PMID per line")
    p_fetch.add_argument("--out", required=True, help="PubTator-format output path")
    p_fetch.add_argument("--missing", help="write the missing/failed report here")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "parse":
        return cmd_parse(args)
    if args.command == "fetch":
        return cmd_fetch(args)
    return 2


if __name__ == "__main__":
    sys.exit(main())
