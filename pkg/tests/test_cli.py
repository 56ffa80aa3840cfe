import json
import subprocess
import sys

import pytest

from gdamine.cli import main

from conftest import FIXTURES, LEXICON_DIR, PATTERN_FILES


def run_cli(*args):
    return main([str(a) for a in args])


def extract_args(name, **extra):
    args = [
        "extract",
        "--corpus", FIXTURES / f"{name}.conllu",
        "--pubtator", FIXTURES / f"{name}.pubtator",
        "--patterns", *PATTERN_FILES,
        "--lexicons", LEXICON_DIR,
    ]
    for key, value in extra.items():
        args += [f"--{key}", value]
    return args


def test_missing_lexicon_dir_is_config_error(capsys):
    code = run_cli(
        "extract",
        "--corpus", FIXTURES / "table1.conllu",
        "--patterns", *PATTERN_FILES,
        "--lexicons", "/nonexistent/lexicons",
    )
    assert code == 2
    assert "does not exist" in capsys.readouterr().err


def test_extract_matches_golden_jsonl(tmp_path, capsys):
    out = tmp_path / "records.jsonl"
    code = run_cli(*extract_args("table1", out=out))
    assert code == 0
    got = [json.loads(line) for line in out.read_text(encoding="utf-8").splitlines()]
    golden = [
        json.loads(line)
        for line in (FIXTURES / "golden_table1.jsonl").read_text(encoding="utf-8").splitlines()
    ]
    assert got == golden


def test_extract_tsv_has_same_records(tmp_path):
    out = tmp_path / "records.tsv"
    code = run_cli(*extract_args("table1", out=out, format="tsv"))
    assert code == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    header = lines[0].split("\t")
    rows = [dict(zip(header, line.split("\t"))) for line in lines[1:]]
    golden = [
        json.loads(line)
        for line in (FIXTURES / "golden_table1.jsonl").read_text(encoding="utf-8").splitlines()
    ]
    assert len(rows) == len(golden) == 4
    for row, expected in zip(rows, golden):
        assert row["pmid"] == expected["pmid"]
        assert row["level"] == expected["level"]
        assert row["gene_id"] == expected["gene_id"]


def test_extract_is_byte_deterministic(tmp_path):
    out1, out2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert run_cli(*extract_args("table1", out=out1)) == 0
    assert run_cli(*extract_args("table1", out=out2)) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_diagnostics_written(tmp_path):
    diag = tmp_path / "diag.jsonl"
    code = run_cli(*extract_args("typedisc", diagnostics=diag, out=tmp_path / "r.jsonl"))
    assert code == 0
    entries = [json.loads(line) for line in diag.read_text(encoding="utf-8").splitlines()]
    assert any(e["stage"] == "pattern" and e["pmid"] == "90000003" for e in entries)


def test_evaluate_perfect_truth(tmp_path, capsys):
    code = run_cli(
        "evaluate",
        "--corpus", FIXTURES / "table1.conllu",
        "--pubtator", FIXTURES / "table1.pubtator",
        "--patterns", *PATTERN_FILES,
        "--lexicons", LEXICON_DIR,
        "--truth", FIXTURES / "table1_truth.tsv",
        "--report-json", tmp_path / "report.json",
    )
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    assert report["full_pipeline"]["level"]["micro"]["accuracy"] == 1.0
    assert report["full_pipeline"]["sentence_type"]["macro"]["f1"] == 1.0
    assert report["full_pipeline"]["parsed_fraction"] == 1.0
    table = capsys.readouterr().out
    assert "full_pipeline:level" in table


def test_evaluate_flipped_level(tmp_path):
    truth = (FIXTURES / "table1_truth.tsv").read_text(encoding="utf-8").splitlines()
    # flip the level of the first data row
    row = truth[1].split("\t")
    row[5] = "Low" if row[5] == "High" else "High"
    truth[1] = "\t".join(row)
    flipped = tmp_path / "truth.tsv"
    flipped.write_text("\n".join(truth) + "\n", encoding="utf-8")
    code = run_cli(
        "evaluate",
        "--corpus", FIXTURES / "table1.conllu",
        "--pubtator", FIXTURES / "table1.pubtator",
        "--patterns", *PATTERN_FILES,
        "--lexicons", LEXICON_DIR,
        "--truth", flipped,
        "--report-json", tmp_path / "report.json",
    )
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    assert report["full_pipeline"]["level"]["micro"]["accuracy"] == pytest.approx(3 / 4)
    assert report["full_pipeline"]["sentence_type"]["micro"]["accuracy"] == 1.0


def test_evaluate_with_truth_mentions(tmp_path, capsys):
    code = run_cli(
        "evaluate",
        "--corpus", FIXTURES / "table1.conllu",
        "--pubtator", FIXTURES / "table1.pubtator",
        "--patterns", *PATTERN_FILES,
        "--lexicons", LEXICON_DIR,
        "--truth", FIXTURES / "table1_truth.tsv",
        "--use-truth-mentions",
        "--report-json", tmp_path / "report.json",
    )
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    assert set(report) == {"full_pipeline", "truth_mentions"}
    assert report["truth_mentions"]["level"]["micro"]["accuracy"] == 1.0
    out = capsys.readouterr().out
    assert "truth_mentions:level" in out


def test_evaluate_empty_truth_is_config_error(tmp_path, capsys):
    empty = tmp_path / "truth.tsv"
    empty.write_text(
        "pmid\tsent_id\tsentence_text\tgene_id\tgene_symbol\tlevel\tsentence_type\n",
        encoding="utf-8",
    )
    code = run_cli(
        "evaluate",
        "--corpus", FIXTURES / "table1.conllu",
        "--patterns", *PATTERN_FILES,
        "--lexicons", LEXICON_DIR,
        "--truth", empty,
    )
    assert code == 2


def test_check_shipped_files(capsys):
    code = run_cli(
        "check",
        "--patterns", *PATTERN_FILES,
        "--lexicons", LEXICON_DIR,
        "--corpus", FIXTURES / "table1.conllu",
        "--pubtator", FIXTURES / "table1.pubtator",
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "patterns: 8 ok" in out
    assert "lexicons: 8 ok" in out
    assert "corpus: 4 documents" in out


def test_check_syntax_error_reports_location(tmp_path, capsys):
    bad = tmp_path / "bad.dp"
    bad.write_text("id: x\npattern: {lemma:/foo/\n", encoding="utf-8")
    code = run_cli("check", "--patterns", bad)
    assert code == 1
    assert "bad.dp" in capsys.readouterr().err


def test_check_duplicate_level_trigger(tmp_path, capsys):
    import shutil

    lex = tmp_path / "lexicons"
    shutil.copytree(LEXICON_DIR, lex)
    with open(lex / "level_low.txt", "a", encoding="utf-8") as handle:
        handle.write("elevated\n")
    code = run_cli("check", "--lexicons", lex)
    assert code == 1
    assert "elevated" in capsys.readouterr().err


def test_check_nothing_given(capsys):
    assert run_cli("check") == 2


def test_inspect_prints_tree_and_trace(capsys):
    code = run_cli(
        "inspect",
        "--corpus", FIXTURES / "table1.conllu",
        "--pubtator", FIXTURES / "table1.pubtator",
        "--patterns", *PATTERN_FILES,
        "--lexicons", LEXICON_DIR,
        "20360610", "1",
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "increased" in out
    assert "B-vbn-passive: MATCH" in out
    assert "mentions:" in out


def test_inspect_unknown_pmid(capsys):
    code = run_cli("inspect", "--corpus", FIXTURES / "table1.conllu", "999", "0")
    assert code == 2


def test_console_entry_point_runs():
    result = subprocess.run(
        [sys.executable, "-m", "gdamine.cli", "check", "--lexicons", str(LEXICON_DIR)],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert "lexicons: 8 ok" in result.stdout
