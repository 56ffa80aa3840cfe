"""Raw abstracts to the extractor's CoNLL-U dialect.

The default backend is a deterministic rule cascade (closed-class lexicon
and suffix heuristics for tags, a small attachment grammar for heads); it
needs no model downloads, always produces a valid single-rooted tree, and
keeps byte offsets exact, which is the part of the contract the consumer
validates.  When a spaCy pipeline is installed the ``spacy`` backend can
be selected instead.

Offsets index the UTF-8 bytes of the document text laid out as
``title + " " + abstract``; the title is sentence 0.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence


@dataclass(frozen=True)
class RawAbstract:
    pmid: str
    title: str
    abstract: str

    def __post_init__(self):
        if not self.pmid or not self.pmid.isdigit():
            raise ValueError(f"pmid must be a non-empty digit string, got {self.pmid!r}")

    @property
    def doc_text(self) -> str:
        return f"{self.title} {self.abstract}" if self.abstract else self.title


@dataclass(frozen=True)
class ParsedToken:
    index: int
    form: str
    lemma: str
    upos: str
    xpos: str
    head: int
    deprel: str
    start: int  # byte offsets into the document text
    end: int


@dataclass(frozen=True)
class ParsedSentence:
    sent_id: int
    text: str
    tokens: tuple[ParsedToken, ...]


def read_abstracts(path: str | Path) -> list[RawAbstract]:
    """Read pmid/title/abstract records from a TSV (header) or JSONL file."""
    import json

    path = Path(path)
    out: list[RawAbstract] = []
    raw = path.read_text(encoding="utf-8")
    if not raw.strip():
        return out
    first = raw.lstrip()[0]
    if first == "{":
        for line_no, line in enumerate(raw.splitlines(), start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            out.append(RawAbstract(str(record["pmid"]), record["title"], record.get("abstract", "")))
        return out
    lines = raw.splitlines()
    header = lines[0].split("\t")
    for column in ("pmid", "title", "abstract"):
        if column not in header:
            raise ValueError(f"{path}: missing column {column!r}")
    for line in lines[1:]:
        if not line.strip():
            continue
        record = dict(zip(header, line.split("\t")))
        out.append(RawAbstract(record["pmid"], record["title"], record.get("abstract", "")))
    return out


# -- tokenization ---------------------------------------------------------------

_SENT_SPLIT = re.compile(r"(?<=[.!?])\s+(?=[A-Z0-9(])")
_OPEN_PUNCT = "([\"'"
_CLOSE_PUNCT = ".,;:!?)]\"'%"


def split_sentences(text: str) -> list[tuple[int, int]]:
    """Character spans of sentences, split at terminal punctuation."""
    spans = []
    start = 0
    for m in _SENT_SPLIT.finditer(text):
        spans.append((start, m.start()))
        start = m.end()
    if start < len(text):
        spans.append((start, len(text)))
    return [(s, e) for s, e in spans if text[s:e].strip()]


def tokenize(text: str) -> list[tuple[str, int, int]]:
    """Split a sentence into (form, char_start, char_end) tokens.

    Whitespace-separated chunks are peeled of leading/trailing punctuation
    so hyphenated names (miR-630, non-small) stay whole.
    """
    out = []
    for m in re.finditer(r"\S+", text):
        chunk, lo = m.group(), m.start()
        while chunk and chunk[0] in _OPEN_PUNCT:
            out.append((chunk[0], lo, lo + 1))
            chunk, lo = chunk[1:], lo + 1
        trailing = []
        while chunk and chunk[-1] in _CLOSE_PUNCT:
            trailing.append((chunk[-1], lo + len(chunk) - 1, lo + len(chunk)))
            chunk = chunk[:-1]
        if chunk:
            out.append((chunk, lo, lo + len(chunk)))
        out.extend(reversed(trailing))
    return out


# -- tagging ----------------------------------------------------------------------

_TAGS = {
    "the": "DT", "a": "DT", "an": "DT", "this": "DT", "these": "DT", "those": "DT",
    "in": "IN", "of": "IN", "with": "IN", "than": "IN", "for": "IN", "on": "IN",
    "at": "IN", "by": "IN", "from": "IN", "as": "IN", "after": "IN", "before": "IN",
    "between": "IN", "during": "IN", "among": "IN", "within": "IN", "without": "IN",
    "that": "IN", "whether": "IN", "via": "IN", "to": "TO",
    "and": "CC", "or": "CC", "but": "CC", "nor": "CC",
    "we": "PRP", "it": "PRP", "they": "PRP",
    "our": "PRP$", "its": "PRP$", "their": "PRP$",
    "was": "VBD", "were": "VBD", "is": "VBZ", "are": "VBP", "be": "VB",
    "been": "VBN", "being": "VBG",
    "may": "MD", "can": "MD", "could": "MD", "would": "MD", "should": "MD",
    "might": "MD", "will": "MD", "must": "MD",
    "not": "RB", "also": "RB", "well": "RB", "only": "RB", "most": "RBS",
    "vitro": "FW", "vivo": "FW", "situ": "FW",
}

_BE_FORMS = {"was", "were", "is", "are", "be", "been", "being"}
_JJR = {"higher", "lower", "greater", "smaller", "larger", "fewer", "better", "worse"}
_VERBS_S = {"shows", "demonstrates", "indicates", "suggests", "reveals", "remains", "plays"}
_ADJ_SUFFIXES = ("ous", "al", "ic", "ive", "ary", "able", "ible", "ant", "ent", "ful", "less")
_ADJ = {
    "normal", "adjacent", "significant", "human", "poor", "high", "low", "new",
    "present", "overall", "oral", "breast", "aberrant", "common",
}
_NOUN_NOT_ADJ = {
    "survival", "arrival", "animal", "interval", "individual", "level", "cell",
    "trial", "signal", "removal", "potential", "hospital", "control", "total",
}


def _tag(tokens: Sequence[str]) -> list[str]:
    tags = []
    for i, form in enumerate(tokens):
        word = form.lower()
        if not any(c.isalnum() for c in form):
            tags.append("HYPH" if form == "-" else form if form in ".,`" else ",")
            continue
        if word in _TAGS:
            tags.append(_TAGS[word])
            continue
        if re.fullmatch(r"\d+([.,]\d+)*%?", word):
            tags.append("CD")
            continue
        if word in _JJR:
            tags.append("JJR")
            continue
        if word in _VERBS_S:
            tags.append("VBZ")
            continue
        if word.endswith("ing") and len(word) > 5:
            tags.append("VBG")
            continue
        if word.endswith("ed") and len(word) > 3:
            # participle vs past tense decided by the left context
            prev = next((tokens[j].lower() for j in range(i - 1, -1, -1)
                         if not tags[j].startswith("RB")), None)
            tags.append("VBN" if prev in _BE_FORMS | {"as"} else "VBD")
            continue
        if word.endswith("ly") and len(word) > 4:
            tags.append("RB")
            continue
        if word in _ADJ or (
            word not in _NOUN_NOT_ADJ
            and word.endswith(_ADJ_SUFFIXES)
            and not word.endswith("als")
        ):
            tags.append("JJ")
            continue
        if "-" in word and any(part in _ADJ for part in word.split("-")):
            tags.append("JJ")
            continue
        if word.endswith("s") and not word.endswith(("ss", "us", "is")) and len(word) > 3:
            tags.append("NNS")
            continue
        tags.append("NN")
    return tags


_LEMMA_EXCEPTIONS = {
    "was": "be", "were": "be", "is": "be", "are": "be", "been": "be", "being": "be",
    "higher": "high", "lower": "low", "greater": "great", "better": "good", "worse": "bad",
    "showed": "show", "shown": "show", "found": "find", "demonstrated": "demonstrate",
    "tested": "test", "collected": "collect", "detected": "detect", "observed": "observe",
    "metastases": "metastasis", "analyses": "analysis", "men": "man", "women": "woman",
    "mice": "mouse", "data": "data",
}


def _lemma(form: str, tag: str) -> str:
    word = form.lower()
    if word in _LEMMA_EXCEPTIONS:
        return _LEMMA_EXCEPTIONS[word]
    if tag == "NNS":
        if word.endswith("ies"):
            return word[:-3] + "y"
        if word.endswith("ses") or word.endswith("xes") or word.endswith("ches"):
            return word[:-2]
        if word.endswith("s"):
            return word[:-1]
    if tag in ("VBD", "VBN") and word.endswith("ed"):
        if word.endswith("ied"):
            return word[:-3] + "y"
        stem = word[:-2]
        if stem.endswith(("at", "as", "us", "iz", "yz", "ys", "in", "ar", "or", "ir", "ur", "anc", "enc")):
            return stem + "e"
        if len(stem) > 2 and stem[-1] == stem[-2] and stem[-1] not in "sl":
            return stem[:-1]
        return stem
    return word


# -- attachment -----------------------------------------------------------------


class HeuristicParser:
    """Deterministic dependency annotation good enough for rule matching.

    Guarantees a valid single-rooted acyclic tree for any input sentence.
    """

    name = "heuristic"

    def parse(self, text: str) -> list[tuple[str, str, str, int, str]]:
        """Rows of (form, lemma, xpos, head, deprel) for one sentence."""
        forms = [f for f, _, _ in tokenize(text)]
        if not forms:
            return []
        tags = _tag(forms)
        n = len(forms)
        heads = [0] * (n + 1)  # 1-based; 0 unset is patched at the end
        rels = [""] * (n + 1)

        def attach(child: int, head: int, rel: str) -> None:
            if heads[child] == 0 and child != head:
                heads[child] = head
                rels[child] = rel

        def is_noun(i: int) -> bool:
            return tags[i - 1] in ("NN", "NNS", "NNP", "CD", "FW", "PRP")

        # nominal runs: contiguous DT/JJ/noun material, split at CC and commas
        runs: list[list[int]] = []
        current: list[int] = []
        for i in range(1, n + 1):
            if tags[i - 1] in ("DT", "JJ", "JJR", "PRP$", "CD") or is_noun(i):
                current.append(i)
            else:
                if current:
                    runs.append(current)
                current = []
        if current:
            runs.append(current)

        def run_head(run: list[int]) -> int:
            nouns = [i for i in run if is_noun(i)]
            return nouns[-1] if nouns else run[-1]

        head_of_run: dict[int, int] = {}
        for run in runs:
            h = run_head(run)
            for i in run:
                head_of_run[i] = h
                if i == h:
                    continue
                if tags[i - 1] == "DT":
                    attach(i, h, "det")
                elif tags[i - 1] in ("JJ", "JJR"):
                    attach(i, h, "amod")
                elif tags[i - 1] == "PRP$":
                    attach(i, h, "poss")
                elif tags[i - 1] == "CD":
                    attach(i, h, "nummod")
                elif i < h:
                    attach(i, h, "compound")
                else:
                    attach(i, h, "dep")

        # predicates: copular/passive "BE (RB) JJ|JJR|VBN", else finite verb
        def find_predicate(lo: int, hi: int) -> tuple[int, str] | None:
            for i in range(lo, hi + 1):
                if forms[i - 1].lower() in _BE_FORMS:
                    j = i + 1
                    while j <= hi and tags[j - 1] == "RB":
                        j += 1
                    if j <= hi and tags[j - 1] in ("JJ", "JJR"):
                        attach(i, j, "cop")
                        return j, "cop"
                    if j <= hi and tags[j - 1] == "VBN":
                        attach(i, j, "auxpass")
                        return j, "pass"
                if tags[i - 1] in ("VBD", "VBZ", "VBP", "MD"):
                    return i, "active"
            return None

        root = 0
        matrix = find_predicate(1, n)
        clause_preds: list[tuple[int, str]] = []
        if matrix is not None:
            root = matrix[0]
            clause_preds.append(matrix)
            # complement clause: "... that <clause>"
            for i in range(root + 1, n + 1):
                if forms[i - 1].lower() == "that" and heads[i] == 0:
                    inner = find_predicate(i + 1, n)
                    if inner is not None:
                        attach(i, inner[0], "mark")
                        attach(inner[0], root, "ccomp")
                        clause_preds.append(inner)
                    break
        else:
            # verbless fragment (typical title): root is the first run head
            root = head_of_run.get(1, 1)
            if runs:
                root = run_head(runs[0])

        # second coordinated predicate: "... and (RB) BE? VBN ..."
        for i in range(1, n + 1):
            if tags[i - 1] == "CC" and heads[i] == 0:
                inner = find_predicate(i + 1, n)
                if inner is not None and heads[inner[0]] == 0 and inner[0] != root:
                    host = clause_preds[-1][0] if clause_preds else root
                    attach(i, host, "cc")
                    attach(inner[0], host, "conj")
                    clause_preds.append(inner)

        # subjects: the rightmost clean nominal run left of each predicate,
        # then extended back over "of"-chains ("expression of X was ..."
        # puts the subject on "expression", not "X")
        for pred, kind in clause_preds:
            subj_run = None
            for run in runs:
                h = run_head(run)
                if h < pred and heads[h] == 0:
                    boundary_ok = all(
                        tags[k - 1] in ("RB",) or forms[k - 1].lower() in _BE_FORMS or k in run
                        for k in range(run[-1] + 1, pred)
                    )
                    if boundary_ok:
                        subj_run = run
                if h >= pred:
                    break
            if subj_run is not None:
                while subj_run[0] >= 3 and forms[subj_run[0] - 2].lower() == "of":
                    earlier = next((r for r in runs if r[-1] == subj_run[0] - 2), None)
                    if earlier is None:
                        break
                    subj_run = earlier
                rel = "nsubjpass" if kind == "pass" else "nsubj"
                attach(run_head(subj_run), pred, rel)

        # prepositions: "of" hangs off the previous nominal, others off the
        # nearest predicate to the left (or previous nominal when none)
        last_pred_left = [0] * (n + 2)
        pred_positions = sorted(p for p, _ in clause_preds)
        cursor = 0
        for i in range(1, n + 1):
            while cursor < len(pred_positions) and pred_positions[cursor] <= i:
                cursor += 1
            last_pred_left[i] = pred_positions[cursor - 1] if cursor else 0
        for i in range(1, n + 1):
            if tags[i - 1] in ("IN", "TO") and heads[i] == 0:
                word = forms[i - 1].lower()
                prev_noun = next(
                    (j for j in range(i - 1, 0, -1) if is_noun(j) and head_of_run.get(j, j) == j),
                    0,
                )
                if i > 1 and tags[i - 2] == "IN":
                    attach(i, i - 1, "pcomp")
                elif word == "of" and prev_noun:
                    attach(i, prev_noun, "prep")
                elif last_pred_left[i]:
                    attach(i, last_pred_left[i], "prep")
                elif prev_noun:
                    attach(i, prev_noun, "prep")
                # object: head of the next nominal run, unless another
                # preposition intervenes (it will claim the object itself)
                for run in runs:
                    h = run_head(run)
                    if run[0] > i:
                        blocked = any(tags[k - 1] in ("IN", "TO") for k in range(i + 1, run[0]))
                        if heads[h] == 0 and not blocked:
                            attach(h, i, "pobj")
                        break

        # NP coordination: adjacent runs joined by CC
        for k, run in enumerate(runs[:-1]):
            h = run_head(run)
            nxt = runs[k + 1]
            between = list(range(run[-1] + 1, nxt[0]))
            cc = [i for i in between if tags[i - 1] == "CC"]
            if cc and all(tags[i - 1] in ("CC", ",") or forms[i - 1] == "," for i in between):
                nh = run_head(nxt)
                if heads[nh] == 0 and heads[h] != nh:
                    attach(cc[0], h, "cc")
                    attach(nh, h, "conj")
                    for comma in between:
                        if forms[comma - 1] == ",":
                            attach(comma, h, "punct")

        # adverbs modify the next predicate, else the previous token
        for i in range(1, n + 1):
            if tags[i - 1].startswith("RB") and heads[i] == 0:
                nxt_pred = next((p for p, _ in sorted(clause_preds) if p > i), None)
                attach(i, nxt_pred if nxt_pred else max(1, i - 1), "advmod")

        # everything else: punctuation to the root, leftovers as dep
        for i in range(1, n + 1):
            if i == root:
                continue
            if heads[i] == 0:
                attach(i, root, "punct" if not any(c.isalnum() for c in forms[i - 1]) else "dep")

        heads[root] = 0
        rels[root] = "root"

        rows = [
            (forms[i - 1], _lemma(forms[i - 1], tags[i - 1]), tags[i - 1], heads[i], rels[i])
            for i in range(1, n + 1)
        ]
        return self._ensure_tree(rows)

    @staticmethod
    def _ensure_tree(rows):
        n = len(rows)
        root = next((i for i, r in enumerate(rows, start=1) if r[3] == 0), None)
        ok = root is not None and sum(1 for r in rows if r[3] == 0) == 1

        def reaches_root(i):
            seen = set()
            while i != 0:
                if i in seen or not 1 <= i <= n:
                    return False
                seen.add(i)
                i = rows[i - 1][3]
            return True

        if ok and all(reaches_root(i) for i in range(1, n + 1)):
            return rows
        # fall back to a flat tree; offsets stay exact, which is the contract
        anchor = root or 1
        return [
            (form, lemma, xpos, 0 if i == anchor else anchor, "root" if i == anchor else "dep")
            for i, (form, lemma, xpos, _, _) in enumerate(rows, start=1)
        ]


class SpacyParser:
    """Optional backend over an installed spaCy pipeline."""

    name = "spacy"

    def __init__(self, model: str = "en_core_sci_sm"):
        try:
            import spacy
        except ImportError as exc:
            raise RuntimeError("spacy is not installed; use the heuristic backend") from exc
        try:
            self._nlp = spacy.load(model)
        except OSError as exc:
            raise RuntimeError(f"spaCy model {model!r} is not installed") from exc

    def parse(self, text: str):
        doc = self._nlp(text)
        rows = []
        for tok in doc:
            head = 0 if tok.head is tok else tok.head.i + 1
            rel = "root" if head == 0 else tok.dep_
            rows.append((tok.text, tok.lemma_.lower(), tok.tag_, head, rel))
        return rows


def get_parser(backend: str = "auto"):
    if backend == "heuristic":
        return HeuristicParser()
    if backend == "spacy":
        return SpacyParser()
    try:
        return SpacyParser()
    except RuntimeError:
        return HeuristicParser()


# -- document conversion -----------------------------------------------------------


def _bytes_len(text: str) -> int:
    return len(text.encode("utf-8"))


def parse_abstract(abstract: RawAbstract, parser=None) -> list[ParsedSentence]:
    """Parse title (sentence 0) and abstract sentences into offset-exact rows."""
    parser = parser or HeuristicParser()
    sentences: list[ParsedSentence] = []
    units: list[tuple[int, str]] = [(0, abstract.title)]
    abstract_base = _bytes_len(abstract.title) + 1 if abstract.abstract else 0
    for span in split_sentences(abstract.abstract):
        units.append((abstract_base + _bytes_len(abstract.abstract[: span[0]]), abstract.abstract[span[0] : span[1]]))

    for sent_id, (base, raw_text) in enumerate(units):
        pieces = tokenize(raw_text)
        if not pieces:
            continue
        rows = parser.parse(raw_text)
        if len(rows) != len(pieces):
            # token mismatch between backend and offsets: re-anchor by re-tokenizing
            rows = HeuristicParser().parse(raw_text)
        first_char, last_char = pieces[0][1], pieces[-1][2]
        text = raw_text[first_char:last_char]
        origin = base + _bytes_len(raw_text[:first_char])
        tokens = []
        for idx, ((form, lo, hi), (_, lemma, xpos, head, rel)) in enumerate(zip(pieces, rows), start=1):
            tokens.append(
                ParsedToken(
                    index=idx,
                    form=form,
                    lemma=lemma,
                    upos="_",
                    xpos=xpos,
                    head=head,
                    deprel=rel,
                    start=base + _bytes_len(raw_text[:lo]),
                    end=base + _bytes_len(raw_text[:hi]),
                )
            )
        sentences.append(ParsedSentence(sent_id=len(sentences), text=text, tokens=tuple(tokens)))
    return sentences


def to_conllu(abstracts: Iterable[tuple[RawAbstract, list[ParsedSentence]]]) -> str:
    lines: list[str] = []
    for abstract, sentences in abstracts:
        first = True
        for sentence in sentences:
            if first:
                lines.append(f"# pmid = {abstract.pmid}")
                first = False
            lines.append(f"# sent_id = {sentence.sent_id}")
            lines.append(f"# text = {sentence.text}")
            for t in sentence.tokens:
                lines.append(
                    "\t".join(
                        (
                            str(t.index), t.form, t.lemma, t.upos, t.xpos, "_",
                            str(t.head), t.deprel, "_", f"start={t.start}|end={t.end}",
                        )
                    )
                )
            lines.append("")
    return "\n".join(lines) + ("\n" if lines else "")
