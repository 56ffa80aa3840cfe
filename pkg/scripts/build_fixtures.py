#!/usr/bin/env python3
"""Regenerate the parsed-corpus and annotation fixtures under tests/fixtures/.

Each document is written out twice: as corpus CoNLL-U (hand-authored
dependency trees, token offsets computed into the title+space+abstract
byte space) and as an annotation file in the PubTator abstract format with
mention offsets located in the same space.  Run from the repository root:

    python scripts/build_fixtures.py
"""

from __future__ import annotations

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from gdamine.corpus import AbstractDoc, DependencySentence, Token, align_tokens, to_conllu

FIXTURES = ROOT / "tests" / "fixtures"

XPOS_TO_UPOS = {
    "NN": "NOUN", "NNS": "NOUN", "NNP": "PROPN", "JJ": "ADJ", "JJR": "ADJ",
    "VB": "VERB", "VBD": "VERB", "VBZ": "VERB", "VBP": "VERB", "VBN": "VERB", "VBG": "VERB",
    "IN": "ADP", "TO": "PART", "DT": "DET", "CC": "CCONJ", "RB": "ADV",
    "PRP": "PRON", "PRP$": "PRON", "CD": "NUM", "HYPH": "PUNCT", "FW": "X",
    ".": "PUNCT", ",": "PUNCT",
}

# sentence := (text, [(form, lemma, xpos, head, deprel), ...]); sentence 0 is the title
# mentions := [(surface, occurrence_in_doc_text, type, id), ...]
DOCS = [
    {
        "pmid": "24522888",
        "sentences": [
            (
                "Sam68 expression in non-small cell lung carcinoma.",
                [
                    ("Sam68", "sam68", "NN", 2, "compound"),
                    ("expression", "expression", "NN", 0, "root"),
                    ("in", "in", "IN", 2, "prep"),
                    ("non-small", "non-small", "JJ", 7, "amod"),
                    ("cell", "cell", "NN", 7, "compound"),
                    ("lung", "lung", "NN", 7, "compound"),
                    ("carcinoma", "carcinoma", "NN", 3, "pobj"),
                    (".", ".", ".", 2, "punct"),
                ],
            ),
            (
                "The expression of Sam68 was significantly elevated in NSCLC tissues as compared with adjacent non-cancerous tissues.",
                [
                    ("The", "the", "DT", 2, "det"),
                    ("expression", "expression", "NN", 7, "nsubjpass"),
                    ("of", "of", "IN", 2, "prep"),
                    ("Sam68", "sam68", "NN", 3, "pobj"),
                    ("was", "be", "VBD", 7, "auxpass"),
                    ("significantly", "significantly", "RB", 7, "advmod"),
                    ("elevated", "elevate", "VBN", 0, "root"),
                    ("in", "in", "IN", 7, "prep"),
                    ("NSCLC", "nsclc", "NN", 10, "compound"),
                    ("tissues", "tissue", "NNS", 8, "pobj"),
                    ("as", "as", "IN", 12, "mark"),
                    ("compared", "compare", "VBN", 7, "advcl"),
                    ("with", "with", "IN", 12, "prep"),
                    ("adjacent", "adjacent", "JJ", 16, "amod"),
                    ("non-cancerous", "non-cancerous", "JJ", 16, "amod"),
                    ("tissues", "tissue", "NNS", 13, "pobj"),
                    (".", ".", ".", 7, "punct"),
                ],
            ),
        ],
        "mentions": [
            ("Sam68", 1, "Gene", "10657"),
            ("non-small cell lung carcinoma", 1, "Disease", "MESH:D002289"),
            ("Sam68", 2, "Gene", "10657"),
            ("NSCLC", 1, "Disease", "MESH:D002289"),
        ],
    },
    {
        "pmid": "26025503",
        "sentences": [
            (
                "Lynx1 expression in lung cancer.",
                [
                    ("Lynx1", "lynx1", "NN", 2, "compound"),
                    ("expression", "expression", "NN", 0, "root"),
                    ("in", "in", "IN", 2, "prep"),
                    ("lung", "lung", "NN", 5, "compound"),
                    ("cancer", "cancer", "NN", 3, "pobj"),
                    (".", ".", ".", 2, "punct"),
                ],
            ),
            (
                "Lynx1 levels are decreased in lung cancers compared to adjacent normal lung.",
                [
                    ("Lynx1", "lynx1", "NN", 2, "compound"),
                    ("levels", "level", "NNS", 4, "nsubjpass"),
                    ("are", "be", "VBP", 4, "auxpass"),
                    ("decreased", "decrease", "VBN", 0, "root"),
                    ("in", "in", "IN", 4, "prep"),
                    ("lung", "lung", "NN", 7, "compound"),
                    ("cancers", "cancer", "NNS", 5, "pobj"),
                    ("compared", "compare", "VBN", 4, "advcl"),
                    ("to", "to", "TO", 8, "prep"),
                    ("adjacent", "adjacent", "JJ", 12, "amod"),
                    ("normal", "normal", "JJ", 12, "amod"),
                    ("lung", "lung", "NN", 9, "pobj"),
                    (".", ".", ".", 4, "punct"),
                ],
            ),
        ],
        "mentions": [
            ("Lynx1", 1, "Gene", "66004"),
            ("lung cancer", 1, "Disease", "MESH:D008175"),
            ("Lynx1", 2, "Gene", "66004"),
            ("lung cancers", 1, "Disease", "MESH:D008175"),
        ],
    },
    {
        "pmid": "20360610",
        "sentences": [
            (
                "EphA2 expression in non-small cell lung cancer metastases.",
                [
                    ("EphA2", "epha2", "NN", 2, "compound"),
                    ("expression", "expression", "NN", 0, "root"),
                    ("in", "in", "IN", 2, "prep"),
                    ("non-small", "non-small", "JJ", 8, "amod"),
                    ("cell", "cell", "NN", 8, "compound"),
                    ("lung", "lung", "NN", 8, "compound"),
                    ("cancer", "cancer", "NN", 8, "compound"),
                    ("metastases", "metastasis", "NNS", 3, "pobj"),
                    (".", ".", ".", 2, "punct"),
                ],
            ),
            (
                "Expression of EphA2 is increased in NSCLC metastases.",
                [
                    ("Expression", "expression", "NN", 5, "nsubjpass"),
                    ("of", "of", "IN", 1, "prep"),
                    ("EphA2", "epha2", "NN", 2, "pobj"),
                    ("is", "be", "VBZ", 5, "auxpass"),
                    ("increased", "increase", "VBN", 0, "root"),
                    ("in", "in", "IN", 5, "prep"),
                    ("NSCLC", "nsclc", "NN", 8, "compound"),
                    ("metastases", "metastasis", "NNS", 6, "pobj"),
                    (".", ".", ".", 5, "punct"),
                ],
            ),
        ],
        "mentions": [
            ("EphA2", 1, "Gene", "1969"),
            ("non-small cell lung cancer", 1, "Disease", "MESH:D002289"),
            ("EphA2", 2, "Gene", "1969"),
            ("NSCLC", 1, "Disease", "MESH:D002289"),
        ],
    },
    {
        "pmid": "25840419",
        "sentences": [
            (
                "Clinical significance of miR-195 expression in patients with hepatocellular carcinoma.",
                [
                    ("Clinical", "clinical", "JJ", 2, "amod"),
                    ("significance", "significance", "NN", 0, "root"),
                    ("of", "of", "IN", 2, "prep"),
                    ("miR-195", "mir-195", "NN", 5, "compound"),
                    ("expression", "expression", "NN", 3, "pobj"),
                    ("in", "in", "IN", 5, "prep"),
                    ("patients", "patient", "NNS", 6, "pobj"),
                    ("with", "with", "IN", 7, "prep"),
                    ("hepatocellular", "hepatocellular", "JJ", 10, "amod"),
                    ("carcinoma", "carcinoma", "NN", 8, "pobj"),
                    (".", ".", ".", 2, "punct"),
                ],
            ),
            (
                "We demonstrated that miR-195 expression was lower in tumor tissues and was associated with poor survival outcome.",
                [
                    ("We", "we", "PRP", 2, "nsubj"),
                    ("demonstrated", "demonstrate", "VBD", 0, "root"),
                    ("that", "that", "IN", 9, "mark"),
                    ("miR", "mir", "NN", 7, "compound"),
                    ("-", "-", "HYPH", 4, "punct"),
                    ("195", "195", "CD", 4, "dep"),
                    ("expression", "expression", "NN", 9, "nsubj"),
                    ("was", "be", "VBD", 9, "cop"),
                    ("lower", "low", "JJR", 2, "ccomp"),
                    ("in", "in", "IN", 9, "prep"),
                    ("tumor", "tumor", "NN", 12, "compound"),
                    ("tissues", "tissue", "NNS", 10, "pobj"),
                    ("and", "and", "CC", 9, "cc"),
                    ("was", "be", "VBD", 15, "auxpass"),
                    ("associated", "associate", "VBN", 9, "conj"),
                    ("with", "with", "IN", 15, "prep"),
                    ("poor", "poor", "JJ", 19, "amod"),
                    ("survival", "survival", "NN", 19, "compound"),
                    ("outcome", "outcome", "NN", 16, "pobj"),
                    (".", ".", ".", 2, "punct"),
                ],
            ),
        ],
        "mentions": [
            ("miR-195", 1, "Gene", "406971"),
            ("hepatocellular carcinoma", 1, "Disease", "MESH:D006528"),
            ("miR-195", 2, "Gene", "406971"),
        ],
    },
]

TYPEDISC_DOCS = [
    {
        "pmid": "90000001",
        "sentences": [
            (
                "Nucleolin expression in non-small cell lung carcinoma.",
                [
                    ("Nucleolin", "nucleolin", "NN", 2, "compound"),
                    ("expression", "expression", "NN", 0, "root"),
                    ("in", "in", "IN", 2, "prep"),
                    ("non-small", "non-small", "JJ", 7, "amod"),
                    ("cell", "cell", "NN", 7, "compound"),
                    ("lung", "lung", "NN", 7, "compound"),
                    ("carcinoma", "carcinoma", "NN", 3, "pobj"),
                    (".", ".", ".", 2, "punct"),
                ],
            ),
            (
                "Nucleolin expression was higher in NSCLC tissues than adjacent normal lung tissues.",
                [
                    ("Nucleolin", "nucleolin", "NN", 2, "compound"),
                    ("expression", "expression", "NN", 4, "nsubj"),
                    ("was", "be", "VBD", 4, "cop"),
                    ("higher", "high", "JJR", 0, "root"),
                    ("in", "in", "IN", 4, "prep"),
                    ("NSCLC", "nsclc", "NN", 7, "compound"),
                    ("tissues", "tissue", "NNS", 5, "pobj"),
                    ("than", "than", "IN", 4, "prep"),
                    ("adjacent", "adjacent", "JJ", 12, "amod"),
                    ("normal", "normal", "JJ", 12, "amod"),
                    ("lung", "lung", "NN", 12, "compound"),
                    ("tissues", "tissue", "NNS", 8, "pobj"),
                    (".", ".", ".", 4, "punct"),
                ],
            ),
        ],
        "mentions": [
            ("Nucleolin", 1, "Gene", "4691"),
            ("non-small cell lung carcinoma", 1, "Disease", "MESH:D002289"),
            ("Nucleolin", 2, "Gene", "4691"),
            ("NSCLC", 1, "Disease", "MESH:D002289"),
        ],
    },
    {
        "pmid": "90000002",
        "sentences": [
            (
                "MicroRNA-630 expression in lung cancer tissues and cell lines.",
                [
                    ("MicroRNA-630", "microrna-630", "NN", 2, "compound"),
                    ("expression", "expression", "NN", 0, "root"),
                    ("in", "in", "IN", 2, "prep"),
                    ("lung", "lung", "NN", 5, "compound"),
                    ("cancer", "cancer", "NN", 6, "compound"),
                    ("tissues", "tissue", "NNS", 3, "pobj"),
                    ("and", "and", "CC", 6, "cc"),
                    ("cell", "cell", "NN", 9, "compound"),
                    ("lines", "line", "NNS", 6, "conj"),
                    (".", ".", ".", 2, "punct"),
                ],
            ),
            (
                "Our results showed that miR-630 was significantly down-regulated in NSCLC tissues and cell lines.",
                [
                    ("Our", "we", "PRP$", 2, "poss"),
                    ("results", "result", "NNS", 3, "nsubj"),
                    ("showed", "show", "VBD", 0, "root"),
                    ("that", "that", "IN", 10, "mark"),
                    ("miR", "mir", "NN", 10, "nsubjpass"),
                    ("-", "-", "HYPH", 5, "punct"),
                    ("630", "630", "CD", 5, "dep"),
                    ("was", "be", "VBD", 10, "auxpass"),
                    ("significantly", "significantly", "RB", 10, "advmod"),
                    ("down-regulated", "down-regulate", "VBN", 3, "ccomp"),
                    ("in", "in", "IN", 10, "prep"),
                    ("NSCLC", "nsclc", "NN", 13, "compound"),
                    ("tissues", "tissue", "NNS", 11, "pobj"),
                    ("and", "and", "CC", 13, "cc"),
                    ("cell", "cell", "NN", 16, "compound"),
                    ("lines", "line", "NNS", 13, "conj"),
                    (".", ".", ".", 3, "punct"),
                ],
            ),
        ],
        "mentions": [
            ("MicroRNA-630", 1, "Gene", "693216"),
            ("lung cancer", 1, "Disease", "MESH:D008175"),
            ("miR-630", 1, "Gene", "693216"),
            ("NSCLC", 1, "Disease", "MESH:D002289"),
        ],
    },
    {
        "pmid": "90000003",
        "sentences": [
            (
                "C1GALT1 over-expression in breast cancer.",
                [
                    ("C1GALT1", "c1galt1", "NN", 2, "compound"),
                    ("over-expression", "over-expression", "NN", 0, "root"),
                    ("in", "in", "IN", 2, "prep"),
                    ("breast", "breast", "NN", 5, "compound"),
                    ("cancer", "cancer", "NN", 3, "pobj"),
                    (".", ".", ".", 2, "punct"),
                ],
            ),
            (
                "Over-expression of C1GALT1 enhanced breast cancer cell growth, migration and invasion in vitro as well as tumor growth in vivo.",
                [
                    ("Over-expression", "over-expression", "NN", 4, "nsubj"),
                    ("of", "of", "IN", 1, "prep"),
                    ("C1GALT1", "c1galt1", "NN", 2, "pobj"),
                    ("enhanced", "enhance", "VBD", 0, "root"),
                    ("breast", "breast", "NN", 6, "compound"),
                    ("cancer", "cancer", "NN", 8, "compound"),
                    ("cell", "cell", "NN", 8, "compound"),
                    ("growth", "growth", "NN", 4, "dobj"),
                    (",", ",", ",", 8, "punct"),
                    ("migration", "migration", "NN", 8, "conj"),
                    ("and", "and", "CC", 8, "cc"),
                    ("invasion", "invasion", "NN", 8, "conj"),
                    ("in", "in", "IN", 4, "prep"),
                    ("vitro", "vitro", "FW", 13, "pobj"),
                    ("as", "as", "IN", 19, "cc"),
                    ("well", "well", "RB", 15, "mwe"),
                    ("as", "as", "IN", 15, "mwe"),
                    ("tumor", "tumor", "NN", 19, "compound"),
                    ("growth", "growth", "NN", 8, "conj"),
                    ("in", "in", "IN", 19, "prep"),
                    ("vivo", "vivo", "FW", 20, "pobj"),
                    (".", ".", ".", 4, "punct"),
                ],
            ),
        ],
        "mentions": [
            ("C1GALT1", 1, "Gene", "56913"),
            ("breast cancer", 1, "Disease", "MESH:D001943"),
            ("C1GALT1", 2, "Gene", "56913"),
            ("breast cancer", 2, "Disease", "MESH:D001943"),
        ],
    },
]

EXPANSION_DOCS = [
    {
        "pmid": "90000005",
        "sentences": [
            (
                "Plasma miR-187 as a biomarker for oral squamous cell carcinoma.",
                [
                    ("Plasma", "plasma", "NN", 2, "compound"),
                    ("miR-187", "mir-187", "NN", 0, "root"),
                    ("as", "as", "IN", 2, "prep"),
                    ("a", "a", "DT", 5, "det"),
                    ("biomarker", "biomarker", "NN", 3, "pobj"),
                    ("for", "for", "IN", 5, "prep"),
                    ("oral", "oral", "JJ", 10, "amod"),
                    ("squamous", "squamous", "JJ", 10, "amod"),
                    ("cell", "cell", "NN", 10, "compound"),
                    ("carcinoma", "carcinoma", "NN", 6, "pobj"),
                    (".", ".", ".", 2, "punct"),
                ],
            ),
            (
                "Plasma miR-187 was significantly higher in OSCC patients than in normal individuals.",
                [
                    ("Plasma", "plasma", "NN", 2, "compound"),
                    ("miR", "mir", "NN", 7, "nsubj"),
                    ("-", "-", "HYPH", 2, "punct"),
                    ("187", "187", "CD", 2, "dep"),
                    ("was", "be", "VBD", 7, "cop"),
                    ("significantly", "significantly", "RB", 7, "advmod"),
                    ("higher", "high", "JJR", 0, "root"),
                    ("in", "in", "IN", 7, "prep"),
                    ("OSCC", "oscc", "NN", 10, "compound"),
                    ("patients", "patient", "NNS", 8, "pobj"),
                    ("than", "than", "IN", 7, "prep"),
                    ("in", "in", "IN", 11, "pcomp"),
                    ("normal", "normal", "JJ", 14, "amod"),
                    ("individuals", "individual", "NNS", 12, "pobj"),
                    (".", ".", ".", 7, "punct"),
                ],
            ),
        ],
        "mentions": [
            ("miR-187", 1, "Gene", "406906"),
            ("oral squamous cell carcinoma", 1, "Disease", "MESH:D009062"),
            ("OSCC", 1, "Disease", "MESH:D009062"),
        ],
    },
]


def build_doc(spec: dict) -> tuple[AbstractDoc, str, list[str]]:
    """Returns the document, its title+abstract text, and annotation rows."""
    texts = [text for text, _ in spec["sentences"]]
    doc_text = texts[0] + " " + " ".join(texts[1:]) if len(texts) > 1 else texts[0]
    assert doc_text.isascii(), f"fixture text for {spec['pmid']} must be ASCII"

    sentences = []
    base = 0
    for sent_id, (text, rows) in enumerate(spec["sentences"]):
        forms = [r[0] for r in rows]
        spans = align_tokens(text, forms, base=base)
        tokens = [
            Token(
                index=i + 1,
                form=form,
                lemma=lemma,
                upos=XPOS_TO_UPOS[xpos],
                xpos=xpos,
                head=head,
                deprel=deprel,
                char_start=start,
                char_end=end,
            )
            for i, ((form, lemma, xpos, head, deprel), (start, end)) in enumerate(zip(rows, spans))
        ]
        sentences.append(DependencySentence(sent_id=sent_id, tokens=tuple(tokens), text=text))
        base += len(text.encode("utf-8")) + 1
    doc = AbstractDoc(pmid=spec["pmid"], title=sentences[0], sentences=tuple(sentences[1:]))

    rows = []
    for surface, occurrence, etype, norm_id in spec["mentions"]:
        at = -1
        for _ in range(occurrence):
            at = doc_text.find(surface, at + 1)
            assert at >= 0, f"{spec['pmid']}: occurrence {occurrence} of {surface!r} not found"
        rows.append(f"{spec['pmid']}\t{at}\t{at + len(surface)}\t{surface}\t{etype}\t{norm_id}")
    return doc, doc_text, rows


def write_fixture(name: str, specs: list[dict]) -> None:
    docs = []
    pubtator_blocks = []
    for spec in specs:
        doc, doc_text, rows = build_doc(spec)
        docs.append(doc)
        title = spec["sentences"][0][0]
        abstract = doc_text[len(title) + 1 :]
        block = [f"{spec['pmid']}|t|{title}", f"{spec['pmid']}|a|{abstract}"]
        block.extend(rows)
        pubtator_blocks.append("\n".join(block))
    (FIXTURES / f"{name}.conllu").write_text(to_conllu(docs), encoding="utf-8")
    (FIXTURES / f"{name}.pubtator").write_text("\n\n".join(pubtator_blocks) + "\n", encoding="utf-8")
    print(f"wrote {name}: {len(docs)} documents")


# truth rows for the table1 corpus: (pmid, gene_id, gene_symbol, level, sentence_type)
TABLE1_TRUTH = [
    ("24522888", "10657", "Sam68", "High", "TypeA"),
    ("26025503", "66004", "Lynx1", "Low", "TypeA"),
    ("20360610", "1969", "EphA2", "High", "TypeB"),
    ("25840419", "mir-195", "miR-195", "Low", "TypeB"),
]


def write_truth() -> None:
    import json
    import re

    mirna = re.compile(r"(?:[a-z]{3}-)?(?:miRNA|miR|mir|let)-\d+[a-z]?(?:-\d)?(?:-[35]p)?")
    by_pmid = {spec["pmid"]: spec for spec in DOCS}
    lines = ["\t".join(
        ("pmid", "sent_id", "sentence_text", "gene_id", "gene_symbol", "level", "sentence_type", "mentions_json")
    )]
    for pmid, gene_id, gene_symbol, level, sentence_type in TABLE1_TRUTH:
        spec = by_pmid[pmid]
        _, doc_text, rows = build_doc(spec)
        mentions = []
        for row in rows:
            _, start, end, surface, etype, norm_id = row.split("\t")
            if etype == "Gene" and mirna.fullmatch(surface):
                etype, norm_id = "MiRNA", surface.lower().replace("mirna-", "mir-")
            mentions.append(
                {"start": int(start), "end": int(end), "text": surface, "type": etype, "id": norm_id}
            )
        sentence_text = spec["sentences"][1][0]
        lines.append("\t".join(
            (pmid, "1", sentence_text, gene_id, gene_symbol, level, sentence_type, json.dumps(mentions))
        ))
    (FIXTURES / "table1_truth.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("wrote table1_truth.tsv")


MEDIC_DOID = [
    ("MESH:D002289", "DOID:3908"),
    ("MESH:D008175", "DOID:1324"),
    ("MESH:D006528", "DOID:684"),
    ("MESH:D009062", "DOID:0050866"),
    ("MESH:D001943", "DOID:1612"),
]


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    write_fixture("table1", DOCS)
    write_fixture("typedisc", TYPEDISC_DOCS)
    write_fixture("expansion", EXPANSION_DOCS)
    write_truth()
    (FIXTURES / "medic_doid.tsv").write_text(
        "".join(f"{medic}\t{doid}\n" for medic, doid in MEDIC_DOID), encoding="utf-8"
    )
    print("wrote medic_doid.tsv")


if __name__ == "__main__":
    main()
