"""A small pattern language over dependency trees, with named captures.

Grammar (whitespace between tokens is free)::

    pattern := node elem*
    elem    := rel node                 chain: attach to the current node,
                                        the new node becomes current
             | "(" rel node elem* ")"   branch: attach to the node that was
                                        current when the group opened; the
                                        current node is restored afterwards
    node    := "{" test (";" test)* "}" ("=" NAME)?
             | "{}" "=" NAME
    test    := ("lemma"|"pos"|"deprel"|"form") ":" "/" REGEX "/"
    rel     := (">"|"<"|">>"|"<<") ("/" REGEX "/")?

Relations describe the new node relative to the current one: ``>`` child,
``<`` governor, ``>>`` descendant, ``<<`` ancestor.  The optional regex
filters the edge label; for ``>>``/``<<`` it applies to the first edge on
the path.  Attribute regexes must match the whole attribute value; lemma
tests are case-insensitive.

Pattern files hold one pattern per stanza (``id:``, ``priority:``,
``pattern:`` keys, ``#`` comments, blank-line separated).
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, Mapping, Sequence

from .corpus import DependencySentence, Token

ATTRIBUTES = ("lemma", "pos", "deprel", "form")


class PatternSyntaxError(ValueError):
    def __init__(self, message: str, line: int = 1, col: int = 0):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class RelKind(Enum):
    CHILD = ">"
    PARENT = "<"
    DESCENDANT = ">>"
    ANCESTOR = "<<"


@dataclass(frozen=True)
class NodeConstraint:
    """Anchored regex tests on token attributes, plus an optional capture."""

    tests: tuple[tuple[str, str], ...] = ()
    capture: str | None = None

    def __post_init__(self):
        if not self.tests and self.capture is None:
            raise ValueError("empty node constraint: need a test or a capture name")
        for attr, _ in self.tests:
            if attr not in ATTRIBUTES:
                raise ValueError(f"unknown attribute {attr!r}")

    def matches(self, token: Token) -> bool:
        for attr, regex in self.tests:
            flags = re.IGNORECASE if attr == "lemma" else 0
            if not _compiled(regex, flags).fullmatch(getattr(token, attr)):
                return False
        return True


@dataclass(frozen=True)
class RelConstraint:
    kind: RelKind
    deprel: str | None = None


@dataclass(frozen=True)
class PatternNode:
    constraint: NodeConstraint
    children: tuple[tuple[RelConstraint, "PatternNode"], ...] = ()


@dataclass(frozen=True)
class DepPattern:
    pattern_id: str
    priority: int
    root: PatternNode

    @property
    def capture_names(self) -> tuple[str, ...]:
        names: list[str] = []

        def walk(node: PatternNode) -> None:
            if node.constraint.capture:
                names.append(node.constraint.capture)
            for _, child in node.children:
                walk(child)

        walk(self.root)
        return tuple(names)

    def to_source(self) -> str:
        return _format_node(self.root) + _format_tail(self.root)


@dataclass(frozen=True)
class MatchResult:
    pattern_id: str
    bindings: Mapping[str, int]
    sentence: DependencySentence


@functools.lru_cache(maxsize=1024)
def _compiled(source: str, flags: int) -> re.Pattern:
    return re.compile(source, flags)


# -- tokenizer ---------------------------------------------------------------

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class _Scanner:
    def __init__(self, source: str):
        self.source = source
        self.pos = 0
        self.line = 1
        self.col = 0

    def error(self, message: str):
        raise PatternSyntaxError(message, self.line, self.col)

    def _advance(self, n: int) -> None:
        for ch in self.source[self.pos : self.pos + n]:
            if ch == "\n":
                self.line += 1
                self.col = 0
            else:
                self.col += 1
        self.pos += n

    def tokens(self) -> Iterator[tuple[str, str, int, int]]:
        src = self.source
        while self.pos < len(src):
            ch = src[self.pos]
            if ch.isspace():
                self._advance(1)
                continue
            line, col = self.line, self.col
            if ch in "{}()=;:":
                kinds = {"{": "LBRACE", "}": "RBRACE", "(": "LPAREN", ")": "RPAREN",
                         "=": "EQUALS", ";": "SEMI", ":": "COLON"}
                self._advance(1)
                yield kinds[ch], ch, line, col
            elif ch in "><":
                if src.startswith(ch * 2, self.pos):
                    self._advance(2)
                    yield "REL", ch * 2, line, col
                else:
                    self._advance(1)
                    yield "REL", ch, line, col
            elif ch == "/":
                end = self.pos + 1
                while end < len(src):
                    if src[end] == "\\" and end + 1 < len(src):
                        end += 2
                        continue
                    if src[end] == "/":
                        break
                    if src[end] == "\n":
                        break
                    end += 1
                if end >= len(src) or src[end] != "/":
                    self.error("unterminated regex literal")
                raw = src[self.pos + 1 : end]
                self._advance(end + 1 - self.pos)
                yield "REGEX", raw.replace("\\/", "/"), line, col
            else:
                m = _NAME_RE.match(src, self.pos)
                if not m:
                    self.error(f"unexpected character {ch!r}")
                self._advance(len(m.group()))
                yield "NAME", m.group(), line, col
        yield "EOF", "", self.line, self.col


class _MutableNode:
    __slots__ = ("constraint", "children")

    def __init__(self, constraint: NodeConstraint):
        self.constraint = constraint
        self.children: list[tuple[RelConstraint, "_MutableNode"]] = []

    def freeze(self) -> PatternNode:
        return PatternNode(
            constraint=self.constraint,
            children=tuple((rel, child.freeze()) for rel, child in self.children),
        )


class _Parser:
    def __init__(self, source: str):
        self._stream = list(_Scanner(source).tokens())
        self._i = 0
        self._captures: set[str] = set()

    @property
    def _current(self) -> tuple[str, str, int, int]:
        return self._stream[self._i]

    def _expect(self, kind: str) -> str:
        actual, value, line, col = self._current
        if actual != kind:
            shown = value if value else "end of pattern"
            raise PatternSyntaxError(f"expected {kind}, found {shown!r}", line, col)
        self._i += 1
        return value

    def _accept(self, kind: str) -> str | None:
        if self._current[0] == kind:
            return self._expect(kind)
        return None

    def parse(self) -> PatternNode:
        root = self._node()
        self._elems(root)
        kind, value, line, col = self._current
        if kind != "EOF":
            raise PatternSyntaxError(f"unexpected trailing {value!r}", line, col)
        return root.freeze()

    def _elems(self, anchor: _MutableNode) -> None:
        current = anchor
        while True:
            kind, _, _, _ = self._current
            if kind == "REL":
                rel = self._rel()
                node = self._node()
                current.children.append((rel, node))
                current = node
            elif kind == "LPAREN":
                self._expect("LPAREN")
                rel = self._rel()
                node = self._node()
                current.children.append((rel, node))
                self._elems(node)
                self._expect("RPAREN")
            else:
                return

    def _rel(self) -> RelConstraint:
        symbol = self._expect("REL")
        deprel = self._accept("REGEX")
        if deprel is not None:
            self._check_regex(deprel)
        return RelConstraint(kind=RelKind(symbol), deprel=deprel)

    def _check_regex(self, source: str) -> None:
        try:
            re.compile(source)
        except re.error as exc:
            _, _, line, col = self._stream[self._i - 1]
            raise PatternSyntaxError(f"invalid regex /{source}/: {exc}", line, col) from None

    def _node(self) -> _MutableNode:
        _, _, line, col = self._current
        self._expect("LBRACE")
        tests: list[tuple[str, str]] = []
        if self._current[0] != "RBRACE":
            while True:
                attr = self._expect("NAME")
                if attr not in ATTRIBUTES:
                    raise PatternSyntaxError(
                        f"unknown attribute {attr!r}, expected one of {', '.join(ATTRIBUTES)}",
                        self._stream[self._i - 1][2],
                        self._stream[self._i - 1][3],
                    )
                if any(attr == seen for seen, _ in tests):
                    raise PatternSyntaxError(f"duplicate test for attribute {attr!r}",
                                             self._stream[self._i - 1][2],
                                             self._stream[self._i - 1][3])
                self._expect("COLON")
                regex = self._expect("REGEX")
                self._check_regex(regex)
                tests.append((attr, regex))
                if not self._accept("SEMI"):
                    break
        self._expect("RBRACE")
        capture = None
        if self._accept("EQUALS"):
            capture = self._expect("NAME")
            if capture in self._captures:
                raise PatternSyntaxError(f"duplicate capture name {capture!r}", line, col)
            self._captures.add(capture)
        if not tests and capture is None:
            raise PatternSyntaxError("empty node constraint", line, col)
        return _MutableNode(NodeConstraint(tests=tuple(tests), capture=capture))


def parse_pattern(source: str, pattern_id: str = "anon", priority: int = 0) -> DepPattern:
    """Compile one pattern from its source string."""
    root = _Parser(source).parse()
    return DepPattern(pattern_id=pattern_id, priority=priority, root=root)


def _escape_regex(source: str) -> str:
    return source.replace("/", "\\/")


def _format_node(node: PatternNode) -> str:
    c = node.constraint
    inner = ";".join(f"{attr}:/{_escape_regex(regex)}/" for attr, regex in c.tests)
    out = "{" + inner + "}"
    if c.capture:
        out += f"={c.capture}"
    return out


def _format_rel(rel: RelConstraint) -> str:
    out = rel.kind.value
    if rel.deprel is not None:
        out += f"/{_escape_regex(rel.deprel)}/"
    return out


def _format_tail(node: PatternNode) -> str:
    if len(node.children) == 1:
        rel, child = node.children[0]
        return f" {_format_rel(rel)} {_format_node(child)}" + _format_tail(child)
    parts = []
    for rel, child in node.children:
        parts.append(f" ({_format_rel(rel)} {_format_node(child)}{_format_tail(child)})")
    return "".join(parts)


# -- matching ----------------------------------------------------------------


def _edge_label_ok(regex: str | None, deprel: str) -> bool:
    return regex is None or _compiled(regex, 0).fullmatch(deprel) is not None


def _candidates(sentence: DependencySentence, token: Token, rel: RelConstraint) -> list[Token]:
    if rel.kind is RelKind.CHILD:
        return [c for c in sentence.children(token.index) if _edge_label_ok(rel.deprel, c.deprel)]
    if rel.kind is RelKind.PARENT:
        if token.head == 0 or not _edge_label_ok(rel.deprel, token.deprel):
            return []
        return [sentence.token(token.head)]
    if rel.kind is RelKind.DESCENDANT:
        out: list[Token] = []
        for child in sentence.children(token.index):
            if not _edge_label_ok(rel.deprel, child.deprel):
                continue
            out.append(child)
            out.extend(sentence.descendants(child.index))
        return sorted(set(out), key=lambda t: t.index)
    # ANCESTOR: the first edge on the upward path is the token's own deprel
    if token.head == 0 or not _edge_label_ok(rel.deprel, token.deprel):
        return []
    return [sentence.token(token.head)] + list(sentence.ancestors(token.head))


def match(pattern: DepPattern, sentence: DependencySentence) -> list[MatchResult]:
    """All distinct capture bindings of ``pattern`` in ``sentence``.

    Results are ordered lexicographically by the bound token indices
    (capture names considered in sorted order), so output is stable across
    runs and platforms.
    """
    if not sentence.tokens:
        return []

    def solve(node: PatternNode, token: Token, binding: dict[str, int]) -> Iterator[dict[str, int]]:
        if not node.constraint.matches(token):
            return
        if node.constraint.capture:
            binding = dict(binding)
            binding[node.constraint.capture] = token.index
        yield from extend(node.children, 0, token, binding)

    def extend(
        children: tuple[tuple[RelConstraint, PatternNode], ...],
        at: int,
        token: Token,
        binding: dict[str, int],
    ) -> Iterator[dict[str, int]]:
        if at == len(children):
            yield binding
            return
        rel, child = children[at]
        for candidate in _candidates(sentence, token, rel):
            for extended in solve(child, candidate, binding):
                yield from extend(children, at + 1, token, extended)

    found: dict[tuple[int, ...], dict[str, int]] = {}
    names = sorted(pattern.capture_names)
    for token in sentence.tokens:
        for binding in solve(pattern.root, token, {}):
            key = tuple(binding[n] for n in names)
            found.setdefault(key, binding)
    return [
        MatchResult(pattern_id=pattern.pattern_id, bindings=found[key], sentence=sentence)
        for key in sorted(found)
    ]


def match_first(
    patterns: Sequence[DepPattern], sentence: DependencySentence
) -> tuple[DepPattern, MatchResult] | None:
    """First matching pattern by priority (then list order) and its first match."""
    for pattern in sorted(patterns, key=lambda p: p.priority):
        results = match(pattern, sentence)
        if results:
            return pattern, results[0]
    return None


# -- pattern files -----------------------------------------------------------


def load_pattern_file(path: str | Path) -> list[DepPattern]:
    """Parse a stanza-format pattern file, preserving file order."""
    path = Path(path)
    patterns: list[DepPattern] = []
    stanza: dict[str, str] = {}
    stanza_line = 0

    def flush(line_no: int) -> None:
        nonlocal stanza
        if not stanza:
            return
        if "pattern" not in stanza:
            raise PatternSyntaxError(f"{path.name}: stanza without pattern: key", stanza_line)
        pattern_id = stanza.get("id", f"{path.stem}-{len(patterns) + 1}")
        try:
            priority = int(stanza.get("priority", "100"))
        except ValueError:
            raise PatternSyntaxError(f"{path.name}: non-integer priority {stanza['priority']!r}", stanza_line) from None
        try:
            patterns.append(parse_pattern(stanza["pattern"], pattern_id=pattern_id, priority=priority))
        except PatternSyntaxError as exc:
            raise PatternSyntaxError(f"{path.name} stanza {pattern_id!r}: {exc}", stanza_line) from None
        stanza = {}

    with open(path, encoding="utf-8") as handle:
        line_no = 0
        for line_no, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                flush(line_no)
                continue
            if line.startswith("#"):
                continue
            if ":" not in line:
                raise PatternSyntaxError(f"{path.name}: expected key: value, found {line!r}", line_no)
            key, value = line.split(":", 1)
            if not stanza:
                stanza_line = line_no
            stanza[key.strip()] = value.strip()
        flush(line_no + 1)
    return patterns


def load_patterns(paths: Sequence[str | Path]) -> list[DepPattern]:
    """Concatenate pattern files; pattern ids must be unique across files."""
    patterns: list[DepPattern] = []
    seen: set[str] = set()
    for path in paths:
        for pattern in load_pattern_file(path):
            if pattern.pattern_id in seen:
                raise PatternSyntaxError(f"duplicate pattern id {pattern.pattern_id!r} in {path}")
            seen.add(pattern.pattern_id)
            patterns.append(pattern)
    return patterns
