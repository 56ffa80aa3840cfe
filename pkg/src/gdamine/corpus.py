"""Data model for dependency-parsed abstracts and their CoNLL-U serialization.

The corpus dialect is CoNLL-U with ten tab-separated columns per token,
``#`` comment lines, and a blank line after every sentence:

* ``# pmid = <digits>`` opens a new document; sentence 0 is the title,
* ``# sent_id = <n>`` and ``# text = <sentence>`` precede every sentence,
* MISC carries ``start=<n>|end=<n>`` byte offsets into the UTF-8 document
  text (title, one space, abstract body), so mention-store offsets line up
  with token spans without re-tokenizing.

``Token.pos`` exposes XPOS (the Penn tag) when present and falls back to
UPOS.  Lemmas are lowercased on load; lemma comparison everywhere in the
system is case-insensitive.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Sequence


class CorpusFormatError(ValueError):
    """Malformed corpus input; message names the offending line when known."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


def byte_slice(text: str, start: int, end: int) -> str:
    """Slice ``text`` by byte offsets into its UTF-8 encoding.

    Raises ValueError when the slice would split a multi-byte character.
    """
    data = text.encode("utf-8")
    if not 0 <= start <= end <= len(data):
        raise ValueError(f"byte range {start}..{end} outside text of {len(data)} bytes")
    try:
        return data[start:end].decode("utf-8")
    except UnicodeDecodeError:
        raise ValueError(f"byte range {start}..{end} splits a multi-byte character") from None


def align_tokens(text: str, forms: Sequence[str], base: int = 0) -> list[tuple[int, int]]:
    """Locate each form left-to-right in ``text`` and return byte offsets.

    Convenience for building sentences programmatically (tests, fixtures,
    the parse adapter): offsets are relative to the UTF-8 encoding of
    ``text`` shifted by ``base``.
    """
    data = text.encode("utf-8")
    spans = []
    cursor = 0
    for form in forms:
        needle = form.encode("utf-8")
        at = data.find(needle, cursor)
        if at < 0:
            raise ValueError(f"token {form!r} not found in text after byte {cursor}")
        spans.append((base + at, base + at + len(needle)))
        cursor = at + len(needle)
    return spans


@dataclass(frozen=True)
class Token:
    """One token of a dependency-parsed sentence.

    ``head`` is the 1-based index of the governor, 0 for the root.
    ``char_start``/``char_end`` are byte offsets into the document text.
    """

    index: int
    form: str
    lemma: str
    upos: str
    xpos: str
    head: int
    deprel: str
    char_start: int
    char_end: int

    @property
    def pos(self) -> str:
        return self.xpos if self.xpos != "_" else self.upos


@dataclass(frozen=True)
class DependencySentence:
    """A sentence as a labeled dependency tree over its tokens."""

    sent_id: int
    tokens: tuple[Token, ...]
    text: str

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        self._validate()

    def _validate(self) -> None:
        n = len(self.tokens)
        roots = 0
        for pos, tok in enumerate(self.tokens, start=1):
            if tok.index != pos:
                raise ValueError(f"token indices must be consecutive from 1, found {tok.index} at position {pos}")
            if not 0 <= tok.head <= n:
                raise ValueError(f"token {tok.index}: head {tok.head} out of range")
            if tok.head == tok.index:
                raise ValueError(f"token {tok.index}: head points to itself")
            if tok.char_start >= tok.char_end:
                raise ValueError(f"token {tok.index}: empty or inverted character span")
            if tok.head == 0:
                roots += 1
        if n and roots != 1:
            raise ValueError(f"sentence must have exactly one root, found {roots}")
        for prev, cur in zip(self.tokens, self.tokens[1:]):
            if cur.char_start < prev.char_end:
                raise ValueError(f"token {cur.index}: offsets overlap or decrease")
        # every token must reach the root without revisiting a node
        for tok in self.tokens:
            seen = set()
            cur = tok.index
            while cur != 0:
                if cur in seen:
                    raise ValueError("cyclic head structure")
                seen.add(cur)
                cur = self.tokens[cur - 1].head

    def __len__(self) -> int:
        return len(self.tokens)

    def token(self, index: int) -> Token:
        return self.tokens[index - 1]

    @property
    def origin(self) -> int:
        """Byte offset of the sentence start in the document text."""
        return self.tokens[0].char_start if self.tokens else 0

    @property
    def char_span(self) -> tuple[int, int]:
        if not self.tokens:
            return (0, 0)
        return (self.tokens[0].char_start, self.tokens[-1].char_end)

    def root(self) -> Token:
        for tok in self.tokens:
            if tok.head == 0:
                return tok
        raise ValueError("empty sentence has no root")

    def children(self, index: int) -> tuple[Token, ...]:
        return tuple(t for t in self.tokens if t.head == index)

    def ancestors(self, index: int) -> Iterator[Token]:
        head = self.token(index).head
        while head != 0:
            tok = self.token(head)
            yield tok
            head = tok.head

    def descendants(self, index: int) -> tuple[Token, ...]:
        out: list[Token] = []
        stack = [index]
        while stack:
            cur = stack.pop()
            for child in self.children(cur):
                out.append(child)
                stack.append(child.index)
        return tuple(sorted(out, key=lambda t: t.index))

    def slice_text(self, char_start: int, char_end: int) -> str:
        """Surface text for a document-offset byte range inside this sentence."""
        return byte_slice(self.text, char_start - self.origin, char_end - self.origin)


@dataclass(frozen=True)
class AbstractDoc:
    """One abstract: title (sentence 0) plus body sentences (1..n)."""

    pmid: str
    title: DependencySentence
    sentences: tuple[DependencySentence, ...]

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        if not self.pmid or not self.pmid.isdigit():
            raise ValueError(f"pmid must be a non-empty digit string, got {self.pmid!r}")
        if self.title.sent_id != 0:
            raise ValueError("title must have sent_id 0")
        for expected, sent in enumerate(self.sentences, start=1):
            if sent.sent_id != expected:
                raise ValueError(f"sentence ids must be consecutive from 0, found {sent.sent_id} where {expected} expected")

    def all_sentences(self) -> Iterator[DependencySentence]:
        yield self.title
        yield from self.sentences

    def sentence(self, sent_id: int) -> DependencySentence:
        if sent_id == 0:
            return self.title
        return self.sentences[sent_id - 1]


_COMMENT_RE = re.compile(r"^#\s*(\w+)\s*=\s*(.*)$")


def _parse_misc(misc: str, line_no: int) -> tuple[int, int]:
    fields = dict(
        pair.split("=", 1) for pair in misc.split("|") if "=" in pair
    )
    if "start" not in fields or "end" not in fields:
        raise CorpusFormatError("MISC must carry start=<n>|end=<n> offsets", line_no)
    try:
        return int(fields["start"]), int(fields["end"])
    except ValueError:
        raise CorpusFormatError(f"non-numeric offsets in MISC {misc!r}", line_no) from None


def load_conllu(stream: IO[str] | Iterable[str]) -> list[AbstractDoc]:
    """Parse the corpus dialect into documents grouped by pmid.

    Sentences are ordered by sent_id within each document; every structural
    invariant (single root, acyclicity, offset monotonicity, token/text
    agreement) is checked and violations raise :class:`CorpusFormatError`
    naming the line or the pmid/sent_id.
    """
    docs: dict[str, dict[int, DependencySentence]] = {}
    current_pmid: str | None = None

    block_comments: dict[str, str] = {}
    block_rows: list[tuple[int, list[str]]] = []
    block_start = 0

    def flush(line_no: int) -> None:
        nonlocal block_comments, block_rows
        if not block_comments and not block_rows:
            return
        pmid = block_comments.get("pmid", current_pmid)
        if pmid is None:
            raise CorpusFormatError("sentence block without a preceding # pmid comment", block_start)
        if "sent_id" not in block_comments:
            raise CorpusFormatError("sentence block without # sent_id", block_start)
        if "text" not in block_comments:
            raise CorpusFormatError("sentence block without # text", block_start)
        try:
            sent_id = int(block_comments["sent_id"])
        except ValueError:
            raise CorpusFormatError(f"non-numeric sent_id {block_comments['sent_id']!r}", block_start) from None
        if not block_rows:
            raise CorpusFormatError("sentence block without token lines", block_start)
        text = block_comments["text"]
        tokens = []
        for row_no, cols in block_rows:
            if len(cols) != 10:
                raise CorpusFormatError(f"expected 10 columns, found {len(cols)}", row_no)
            try:
                index = int(cols[0])
                head = int(cols[6])
            except ValueError:
                raise CorpusFormatError(f"non-integer ID or HEAD in {cols[0]!r}/{cols[6]!r}", row_no) from None
            start, end = _parse_misc(cols[9], row_no)
            tokens.append(
                Token(
                    index=index,
                    form=cols[1],
                    lemma=cols[2].lower(),
                    upos=cols[3],
                    xpos=cols[4],
                    head=head,
                    deprel=cols[7],
                    char_start=start,
                    char_end=end,
                )
            )
        try:
            sentence = DependencySentence(sent_id=sent_id, tokens=tuple(tokens), text=text)
        except ValueError as exc:
            raise CorpusFormatError(f"pmid {pmid} sent {sent_id}: {exc}", block_start) from None
        origin = sentence.origin
        for (row_no, cols), tok in zip(block_rows, sentence.tokens):
            try:
                surface = byte_slice(text, tok.char_start - origin, tok.char_end - origin)
            except ValueError as exc:
                raise CorpusFormatError(f"pmid {pmid} sent {sent_id}: {exc}", row_no) from None
            if surface != tok.form:
                raise CorpusFormatError(
                    f"pmid {pmid} sent {sent_id}: token {tok.index} form {tok.form!r} does not match text slice {surface!r}",
                    row_no,
                )
        sentences = docs.setdefault(pmid, {})
        if sent_id in sentences:
            raise CorpusFormatError(f"duplicate sent_id {sent_id} for pmid {pmid}", block_start)
        sentences[sent_id] = sentence
        block_comments = {}
        block_rows = []

    line_no = 0
    for line_no, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            flush(line_no)
            continue
        if line.startswith("#"):
            m = _COMMENT_RE.match(line)
            if m:
                key, value = m.group(1), m.group(2)
                if block_rows:
                    flush(line_no)  # a comment after token rows opens a new block
                if key == "pmid":
                    flush(line_no)
                    current_pmid = value.strip()
                if not block_rows and not block_comments:
                    block_start = line_no
                block_comments[key] = value
            continue
        if not block_rows and not block_comments:
            block_start = line_no
        block_rows.append((line_no, line.split("\t")))
    flush(line_no + 1)

    out = []
    for pmid, sentences in docs.items():
        ordered = [sentences[k] for k in sorted(sentences)]
        if ordered[0].sent_id != 0:
            raise CorpusFormatError(f"pmid {pmid}: missing title sentence (sent_id 0)")
        try:
            out.append(AbstractDoc(pmid=pmid, title=ordered[0], sentences=tuple(ordered[1:])))
        except ValueError as exc:
            raise CorpusFormatError(f"pmid {pmid}: {exc}") from None
    return out


def loads_conllu(text: str) -> list[AbstractDoc]:
    return load_conllu(text.splitlines())


def to_conllu(docs: Iterable[AbstractDoc]) -> str:
    """Serialize documents back to the canonical corpus dialect.

    Loading canonical output and serializing again is byte-identical.
    """
    lines: list[str] = []
    for doc in docs:
        first = True
        for sentence in doc.all_sentences():
            if first:
                lines.append(f"# pmid = {doc.pmid}")
                first = False
            lines.append(f"# sent_id = {sentence.sent_id}")
            lines.append(f"# text = {sentence.text}")
            for t in sentence.tokens:
                lines.append(
                    "\t".join(
                        (
                            str(t.index),
                            t.form,
                            t.lemma,
                            t.upos,
                            t.xpos,
                            "_",
                            str(t.head),
                            t.deprel,
                            "_",
                            f"start={t.char_start}|end={t.char_end}",
                        )
                    )
                )
            lines.append("")
    return "\n".join(lines) + ("\n" if lines else "")


def retokenize_mirna(
    sentence: DependencySentence, mirna_spans: Iterable[tuple[int, int]]
) -> DependencySentence:
    """Merge the tokens covered by each span into a single token.

    Spans are byte ranges in document offsets and must cover whole tokens.
    The merged token takes head/deprel/POS from the span's internal root
    (the covered token whose head lies outside the span); heads pointing
    into a span are re-pointed at the merged token.
    """
    spans = sorted(set((int(s), int(e)) for s, e in mirna_spans), reverse=True)
    for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
        if s1 < e2:
            raise ValueError(f"overlapping merge spans {s2}..{e2} and {s1}..{e1}")
    out = sentence
    for span in spans:
        out = _merge_span(out, span)
    return out


def span_covers_whole_tokens(sentence: DependencySentence, span: tuple[int, int]) -> bool:
    """True when the span exactly covers a contiguous run of tokens."""
    try:
        _covered_positions(sentence, span)
    except ValueError:
        return False
    return True


def _covered_positions(sentence: DependencySentence, span: tuple[int, int]) -> tuple[int, int]:
    start, end = span
    covered = [t for t in sentence.tokens if t.char_start < end and t.char_end > start]
    if not covered:
        raise ValueError(f"span {start}..{end} covers no tokens")
    if covered[0].char_start != start or covered[-1].char_end != end:
        raise ValueError(f"span {start}..{end} not aligned to token boundaries")
    first, last = covered[0].index, covered[-1].index
    if last - first + 1 != len(covered):
        raise ValueError(f"span {start}..{end} covers non-contiguous tokens")
    return first, last


def _merge_span(sentence: DependencySentence, span: tuple[int, int]) -> DependencySentence:
    first, last = _covered_positions(sentence, span)
    if first == last:
        return sentence
    inside = set(range(first, last + 1))
    internal_roots = [t for t in sentence.tokens[first - 1 : last] if t.head not in inside]
    if len(internal_roots) != 1:
        raise ValueError(
            f"span {span[0]}..{span[1]} has {len(internal_roots)} internal roots, cannot merge"
        )
    anchor = internal_roots[0]
    removed = last - first

    def remap(index: int) -> int:
        if index in inside:
            return first
        if index > last:
            return index - removed
        return index

    form = sentence.slice_text(span[0], span[1])
    merged = Token(
        index=first,
        form=form,
        lemma=form.lower(),
        upos=anchor.upos,
        xpos=anchor.xpos,
        head=remap(anchor.head),
        deprel=anchor.deprel,
        char_start=span[0],
        char_end=span[1],
    )
    tokens: list[Token] = []
    for t in sentence.tokens:
        if t.index in inside:
            if t.index == first:
                tokens.append(merged)
            continue
        tokens.append(
            Token(
                index=remap(t.index),
                form=t.form,
                lemma=t.lemma,
                upos=t.upos,
                xpos=t.xpos,
                head=remap(t.head),
                deprel=t.deprel,
                char_start=t.char_start,
                char_end=t.char_end,
            )
        )
    return DependencySentence(sent_id=sentence.sent_id, tokens=tuple(tokens), text=sentence.text)
