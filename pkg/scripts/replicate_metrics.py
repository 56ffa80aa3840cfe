#!/usr/bin/env python3
"""Run the corpus-scale evaluation against user-supplied data.

Thin wrapper over `gdamine evaluate` that runs both conditions (full
pipeline and truth-supplied mentions) and leaves the metric table on
stdout plus a JSON report next to the truth file.

    python scripts/replicate_metrics.py \
        --corpus abstracts.conllu --pubtator annotations.pubtator \
        --truth truth.tsv [--medic-doid map.tsv]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from gdamine.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--pubtator", action="append", required=True)
    parser.add_argument("--truth", required=True)
    parser.add_argument("--medic-doid")
    args = parser.parse_args()

    report_json = str(Path(args.truth).with_suffix(".report.json"))
    argv = [
        "evaluate",
        "--corpus", args.corpus,
        "--patterns", str(ROOT / "patterns" / "typeA.dp"), str(ROOT / "patterns" / "typeB.dp"),
        "--lexicons", str(ROOT / "lexicons"),
        "--truth", args.truth,
        "--use-truth-mentions",
        "--report-json", report_json,
    ]
    for path in args.pubtator:
        argv += ["--pubtator", path]
    if args.medic_doid:
        argv += ["--medic-doid", args.medic_doid]
    code = cli_main(argv)
    if code == 0:
        print(f"report written to {report_json}")
    return code


if __name__ == "__main__":
    sys.exit(main())
