import random
import subprocess
import sys
from pathlib import Path

import pytest

from gda_adapter.parsing import (
    HeuristicParser,
    RawAbstract,
    get_parser,
    parse_abstract,
    read_abstracts,
    split_sentences,
    to_conllu,
    tokenize,
)

DATA = Path(__file__).resolve().parent / "data"


def load_examples():
    return read_abstracts(DATA / "abstracts.tsv")


def primary_check(corpus_path) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "gdamine.cli", "check", "--corpus", str(corpus_path)],
        capture_output=True,
        text=True,
    )


def test_read_abstracts_tsv():
    abstracts = load_examples()
    assert len(abstracts) == 5
    assert abstracts[0].pmid == "90000001"
    assert abstracts[0].title.startswith("Nucleolin")


def test_read_abstracts_jsonl(tmp_path):
    path = tmp_path / "in.jsonl"
    path.write_text(
        '{"pmid": "7", "title": "A title.", "abstract": "A body."}\n', encoding="utf-8"
    )
    abstracts = read_abstracts(path)
    assert abstracts == [RawAbstract("7", "A title.", "A body.")]


def test_tokenize_peels_punctuation():
    tokens = [t for t, _, _ in tokenize("growth, migration (in vivo).")]
    assert tokens == ["growth", ",", "migration", "(", "in", "vivo", ")", "."]
    # hyphenated names stay whole
    tokens = [t for t, _, _ in tokenize("miR-630 was down-regulated.")]
    assert tokens == ["miR-630", "was", "down-regulated", "."]


def test_split_sentences():
    text = "First sentence here. Second one follows. miR-21 was high."
    parts = [text[s:e] for s, e in split_sentences(text)]
    assert parts == ["First sentence here.", "Second one follows.", "miR-21 was high."]


def test_examples_load_under_primary_check(tmp_path):
    abstracts = load_examples()
    parsed = [(a, parse_abstract(a)) for a in abstracts]
    out = tmp_path / "examples.conllu"
    out.write_text(to_conllu(parsed), encoding="utf-8")
    result = primary_check(out)
    assert result.returncode == 0, result.stderr
    assert "corpus: 5 documents" in result.stdout


def test_token_offsets_slice_source_text_exactly():
    for abstract in load_examples():
        doc_bytes = abstract.doc_text.encode("utf-8")
        sentences = parse_abstract(abstract)
        assert sentences[0].sent_id == 0  # title first
        for sentence in sentences:
            for token in sentence.tokens:
                assert doc_bytes[token.start : token.end].decode("utf-8") == token.form


def test_title_is_sentence_zero_and_ids_consecutive():
    for abstract in load_examples():
        sentences = parse_abstract(abstract)
        assert [s.sent_id for s in sentences] == list(range(len(sentences)))


def test_passive_sentence_gets_subject_structure():
    abstract = next(a for a in load_examples() if a.pmid == "90000004")
    sentence = parse_abstract(abstract)[1]
    by_form = {t.form: t for t in sentence.tokens}
    elevated = by_form["elevated"]
    assert elevated.xpos == "VBN"
    assert elevated.head == 0
    assert by_form["expression"].deprel == "nsubjpass"
    assert by_form["expression"].head == elevated.index
    assert by_form["was"].deprel == "auxpass"
    assert by_form["tissues"].deprel == "pobj"


def test_comparative_sentence_structure():
    abstract = next(a for a in load_examples() if a.pmid == "90000005")
    sentence = parse_abstract(abstract)[1]
    by_form = {t.form: t for t in sentence.tokens}
    assert by_form["higher"].xpos == "JJR"
    assert by_form["higher"].head == 0
    assert by_form["miR-187"].deprel == "nsubj"
    assert by_form["patients"].deprel == "pobj"
    assert by_form["individuals"].deprel == "pobj"


def test_empty_input(tmp_path):
    empty = tmp_path / "empty.tsv"
    empty.write_text("pmid\ttitle\tabstract\n", encoding="utf-8")
    assert read_abstracts(empty) == []
    assert to_conllu([]) == ""


def test_output_is_deterministic():
    abstracts = load_examples()
    one = to_conllu([(a, parse_abstract(a)) for a in abstracts])
    two = to_conllu([(a, parse_abstract(a)) for a in abstracts])
    assert one == two


def test_multibyte_text_keeps_byte_offsets(tmp_path):
    abstract = RawAbstract("8", "β-catenin in cancer.", "Expression of β-catenin was higher in tumors.")
    sentences = parse_abstract(abstract)
    doc_bytes = abstract.doc_text.encode("utf-8")
    for sentence in sentences:
        for token in sentence.tokens:
            assert doc_bytes[token.start : token.end].decode("utf-8") == token.form
    out = tmp_path / "multibyte.conllu"
    out.write_text(to_conllu([(abstract, sentences)]), encoding="utf-8")
    assert primary_check(out).returncode == 0


def test_random_text_always_yields_loadable_trees(tmp_path):
    rng = random.Random(13)
    vocabulary = [
        "miR-21", "BRCA1", "was", "is", "higher", "elevated", "in", "of", "than",
        "tissues", "patients", "and", "expression", "the", "significantly", "cancer",
        "showed", "that", "(", ")", ",", ".", "7", "well", "as", "normal",
    ]
    abstracts = []
    for i in range(25):
        words = [rng.choice(vocabulary) for _ in range(rng.randint(1, 18))]
        text = " ".join(words) + "."
        abstracts.append(RawAbstract(str(10000 + i), "A fuzz title.", text))
    parsed = [(a, parse_abstract(a)) for a in abstracts]
    out = tmp_path / "fuzz.conllu"
    out.write_text(to_conllu(parsed), encoding="utf-8")
    result = primary_check(out)
    assert result.returncode == 0, result.stderr


def test_get_parser_auto_falls_back_to_heuristic():
    parser = get_parser("auto")
    assert parser.name in ("heuristic", "spacy")
    assert isinstance(get_parser("heuristic"), HeuristicParser)


def test_pmid_must_be_digits():
    with pytest.raises(ValueError, match="pmid"):
        RawAbstract("x12", "t", "a")
