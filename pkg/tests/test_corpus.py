import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gdamine.corpus import (
    AbstractDoc,
    CorpusFormatError,
    DependencySentence,
    Token,
    align_tokens,
    byte_slice,
    load_conllu,
    loads_conllu,
    retokenize_mirna,
    to_conllu,
)

from conftest import make_sentence


def test_empty_stream():
    assert load_conllu(io.StringIO("")) == []


def test_minimal_tree():
    text = "\n".join(
        [
            "# pmid = 123",
            "# sent_id = 0",
            "# text = Gene X .",
            "1\tGene\tgene\t_\tNN\t_\t2\tcompound\t_\tstart=0|end=4",
            "2\tX\tx\t_\tNN\t_\t0\troot\t_\tstart=5|end=6",
            "3\t.\t.\t_\t.\t_\t2\tpunct\t_\tstart=7|end=8",
            "",
        ]
    )
    docs = loads_conllu(text)
    assert len(docs) == 1
    assert docs[0].pmid == "123"
    assert len(docs[0].title) == 3
    assert docs[0].title.root().form == "X"


def test_fixture_example_sentence(fixture_dir):
    with open(fixture_dir / "table1.conllu", encoding="utf-8") as handle:
        docs = load_conllu(handle)
    doc = next(d for d in docs if d.pmid == "20360610")
    assert doc.sentences[0].text == "Expression of EphA2 is increased in NSCLC metastases."


def test_round_trip_is_byte_identical(fixture_dir):
    for name in ("table1", "typedisc", "expansion"):
        raw = (fixture_dir / f"{name}.conllu").read_text(encoding="utf-8")
        assert to_conllu(loads_conllu(raw)) == raw


def test_malformed_line_names_line_number():
    text = "\n".join(
        [
            "# pmid = 123",
            "# sent_id = 0",
            "# text = X",
            "1\tX\tx\t_\tNN\t_\t0",
            "",
        ]
    )
    with pytest.raises(CorpusFormatError, match="line 4"):
        loads_conllu(text)


def test_duplicate_sent_id_rejected():
    block = "\n".join(
        [
            "# sent_id = 0",
            "# text = X",
            "1\tX\tx\t_\tNN\t_\t0\troot\t_\tstart=0|end=1",
            "",
        ]
    )
    text = "# pmid = 123\n" + block + block
    with pytest.raises(CorpusFormatError, match="duplicate sent_id 0 for pmid 123"):
        loads_conllu(text)


def test_cycle_names_pmid_and_sentence():
    text = "\n".join(
        [
            "# pmid = 77",
            "# sent_id = 0",
            "# text = a b c",
            "1\ta\ta\t_\tNN\t_\t0\troot\t_\tstart=0|end=1",
            "2\tb\tb\t_\tNN\t_\t3\tdep\t_\tstart=2|end=3",
            "3\tc\tc\t_\tNN\t_\t2\tdep\t_\tstart=4|end=5",
            "",
        ]
    )
    with pytest.raises(CorpusFormatError, match="pmid 77 sent 0.*cyclic"):
        loads_conllu(text)


def test_form_must_match_text_slice():
    text = "\n".join(
        [
            "# pmid = 123",
            "# sent_id = 0",
            "# text = ab cd",
            "1\tab\tab\t_\tNN\t_\t0\troot\t_\tstart=0|end=2",
            "2\txx\txx\t_\tNN\t_\t1\tdep\t_\tstart=3|end=5",
            "",
        ]
    )
    with pytest.raises(CorpusFormatError, match="does not match text slice"):
        loads_conllu(text)


def test_multibyte_offsets_validated():
    # "β" is two bytes in UTF-8; splitting it must be rejected
    with pytest.raises(ValueError, match="multi-byte"):
        byte_slice("βx", 1, 3)
    assert byte_slice("βx", 0, 2) == "β"


def test_missing_title_rejected():
    text = "\n".join(
        [
            "# pmid = 123",
            "# sent_id = 1",
            "# text = X",
            "1\tX\tx\t_\tNN\t_\t0\troot\t_\tstart=0|end=1",
            "",
        ]
    )
    with pytest.raises(CorpusFormatError, match="missing title"):
        loads_conllu(text)


def test_pos_prefers_xpos():
    tok = Token(1, "x", "x", "NOUN", "NN", 0, "root", 0, 1)
    assert tok.pos == "NN"
    tok = Token(1, "x", "x", "NOUN", "_", 0, "root", 0, 1)
    assert tok.pos == "NOUN"


# -- retokenization -----------------------------------------------------------


def _mirna_sentence():
    # "miR - 630 was down-regulated" with the name split over three tokens
    return make_sentence(
        [
            ("miR", "mir", "NN", 5, "nsubjpass"),
            ("-", "-", "HYPH", 1, "punct"),
            ("630", "630", "CD", 1, "dep"),
            ("was", "be", "VBD", 5, "auxpass"),
            ("down-regulated", "down-regulate", "VBN", 0, "root"),
        ],
        text="miR - 630 was down-regulated",
    )


def test_merge_mirna_span():
    sentence = _mirna_sentence()
    span = (sentence.token(1).char_start, sentence.token(3).char_end)
    merged = retokenize_mirna(sentence, [span])
    assert [t.form for t in merged.tokens] == ["miR - 630", "was", "down-regulated"]
    assert merged.token(1).lemma == "mir - 630"
    assert merged.token(1).deprel == "nsubjpass"
    assert merged.token(1).head == 3


def test_single_token_span_is_identity():
    sentence = _mirna_sentence()
    span = (sentence.token(4).char_start, sentence.token(4).char_end)
    assert retokenize_mirna(sentence, [span]) == sentence


def test_unaligned_span_rejected():
    sentence = _mirna_sentence()
    with pytest.raises(ValueError, match="not aligned"):
        retokenize_mirna(sentence, [(1, 5)])


def test_two_internal_roots_rejected():
    sentence = make_sentence(
        [
            ("a", "a", "NN", 3, "dep"),
            ("b", "b", "NN", 3, "dep"),
            ("c", "c", "NN", 0, "root"),
        ]
    )
    span = (sentence.token(1).char_start, sentence.token(2).char_end)
    with pytest.raises(ValueError, match="internal roots"):
        retokenize_mirna(sentence, [span])


def _merge_oracle(sentence, first, last):
    """Enumerate merged-token heads; valid merges preserve the boundary edge."""
    inside = set(range(first, last + 1))
    removed = last - first

    def remap(i):
        if i in inside:
            return first
        return i - removed if i > last else i

    span = (sentence.token(first).char_start, sentence.token(last).char_end)
    n_new = len(sentence) - removed
    valid = []
    for candidate_head in range(0, n_new + 1):
        if candidate_head == first:
            continue
        # the merged token's outgoing edge must restate an original edge
        # leaving the span
        if not any(
            t.head not in inside and remap(t.head) == candidate_head
            for t in sentence.tokens[first - 1 : last]
        ):
            continue
        tokens = []
        for t in sentence.tokens:
            if t.index in inside:
                if t.index == first:
                    tokens.append(
                        Token(first, "m", "m", t.upos, t.xpos, candidate_head, t.deprel, span[0], span[1])
                    )
                continue
            tokens.append(
                Token(remap(t.index), t.form, t.lemma, t.upos, t.xpos, remap(t.head), t.deprel,
                      t.char_start, t.char_end)
            )
        try:
            DependencySentence(sent_id=sentence.sent_id, tokens=tuple(tokens), text=sentence.text)
        except ValueError:
            continue
        valid.append(candidate_head)
    return valid


def test_merge_head_reassignment_against_enumeration():
    # token 3 heads token 2, token 4 heads token 3; merging 2-3 must hang the
    # merged token under (remapped) token 4, and that is the only valid merge
    sentence = make_sentence(
        [
            ("t1", "t1", "NN", 4, "dep"),
            ("t2", "t2", "NN", 3, "dep"),
            ("t3", "t3", "NN", 4, "dep"),
            ("t4", "t4", "NN", 0, "root"),
            ("t5", "t5", "NN", 4, "dep"),
        ]
    )
    valid = _merge_oracle(sentence, 2, 3)
    assert valid == [3]
    span = (sentence.token(2).char_start, sentence.token(3).char_end)
    merged = retokenize_mirna(sentence, [span])
    assert merged.token(2).head == 3
    assert len(merged) == 4


# -- properties ---------------------------------------------------------------


@st.composite
def random_tree_sentences(draw):
    n = draw(st.integers(min_value=2, max_value=9))
    # random tree: each node's head is an earlier node (or root for node 1),
    # then relabeled by a random permutation
    perm = draw(st.permutations(list(range(1, n + 1))))
    heads_by_order = [0] + [draw(st.integers(min_value=1, max_value=i)) for i in range(1, n)]
    head_of = {}
    for order, node in enumerate(perm):
        head_of[node] = 0 if order == 0 else perm[heads_by_order[order] - 1]
    rows = [(f"w{i}", f"w{i}", "NN", head_of[i], "dep") for i in range(1, n + 1)]
    return make_sentence(rows)


@given(random_tree_sentences(), st.data())
@settings(max_examples=200, deadline=None)
def test_retokenize_preserves_tree_shape(sentence, data):
    n = len(sentence)
    first = data.draw(st.integers(min_value=1, max_value=n))
    last = data.draw(st.integers(min_value=first, max_value=n))
    span = (sentence.token(first).char_start, sentence.token(last).char_end)
    inside = set(range(first, last + 1))
    internal_roots = [t for t in sentence.tokens[first - 1 : last] if t.head not in inside]
    if len(internal_roots) != 1:
        with pytest.raises(ValueError):
            retokenize_mirna(sentence, [span])
        return
    merged = retokenize_mirna(sentence, [span])
    # constructing DependencySentence re-checks the single-root and acyclicity
    # invariants; the merge must also shrink the sentence by exactly k-1
    assert len(merged) == n - (last - first)
    assert sum(1 for t in merged.tokens if t.head == 0) == 1


def test_align_tokens_roundtrip():
    text = "alpha  beta-3 gamma"
    spans = align_tokens(text, ["alpha", "beta-3", "gamma"], base=10)
    assert spans == [(10, 15), (17, 23), (24, 29)]


def test_doc_requires_digit_pmid():
    sentence = make_sentence([("x", "x", "NN", 0, "root")], sent_id=0)
    with pytest.raises(ValueError, match="pmid"):
        AbstractDoc(pmid="abc", title=sentence, sentences=())
