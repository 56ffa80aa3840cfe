import random

import pytest

from gdamine.patterns import (
    DepPattern,
    NodeConstraint,
    PatternNode,
    PatternSyntaxError,
    RelConstraint,
    RelKind,
    load_pattern_file,
    load_patterns,
    match,
    match_first,
    parse_pattern,
)

from brute_force import brute_force_match
from conftest import make_sentence


# -- parsing ------------------------------------------------------------------


def test_single_node_pattern():
    pattern = parse_pattern("{lemma:/elevated|increased/}=scale")
    assert pattern.capture_names == ("scale",)
    assert pattern.root.children == ()
    assert pattern.root.constraint.tests == (("lemma", "elevated|increased"),)


def test_two_node_ast_shape():
    # structural equality against a hand-built AST
    pattern = parse_pattern("{pos:/VBN/}=scale >/nsubj.*/ {}=aspect")
    expected = PatternNode(
        constraint=NodeConstraint(tests=(("pos", "VBN"),), capture="scale"),
        children=(
            (
                RelConstraint(kind=RelKind.CHILD, deprel="nsubj.*"),
                PatternNode(constraint=NodeConstraint(tests=(), capture="aspect")),
            ),
        ),
    )
    assert pattern.root == expected


def test_unclosed_brace_is_syntax_error():
    with pytest.raises(PatternSyntaxError):
        parse_pattern("{lemma:/foo/")


def test_error_carries_position_and_expectation():
    with pytest.raises(PatternSyntaxError, match="expected RBRACE"):
        parse_pattern("{lemma:/foo/ pos:/NN/}")


def test_duplicate_capture_rejected():
    with pytest.raises(PatternSyntaxError, match="duplicate capture"):
        parse_pattern("{pos:/NN/}=x > {pos:/NN/}=x")


def test_empty_node_rejected():
    with pytest.raises(PatternSyntaxError, match="empty node"):
        parse_pattern("{pos:/NN/}=x > {}")


def test_invalid_regex_rejected():
    with pytest.raises(PatternSyntaxError, match="invalid regex"):
        parse_pattern("{lemma:/(/}=x")


def test_grouping_controls_attachment():
    chain = parse_pattern("{pos:/A/}=a > {pos:/B/}=b > {pos:/C/}=c")
    assert len(chain.root.children) == 1
    assert len(chain.root.children[0][1].children) == 1

    branch = parse_pattern("{pos:/A/}=a (> {pos:/B/}=b) (> {pos:/C/}=c)")
    assert len(branch.root.children) == 2
    assert all(child.children == () for _, child in branch.root.children)


def test_parse_print_parse_fixed_point():
    sources = [
        "{lemma:/elevated|increased/}=scale",
        "{pos:/VBN/}=scale >/nsubj.*/ {}=aspect",
        "{pos:/A/}=a (> {pos:/B/}=b >> {form:/x/}=c) (<< {pos:/D/}=d)",
        "{pos:/VBN/;lemma:/x\\/y/}=s </prep/ {}=t",
    ]
    for source in sources:
        once = parse_pattern(source)
        printed = once.to_source()
        again = parse_pattern(printed)
        assert again.root == once.root
        assert again.to_source() == printed


# -- matching -----------------------------------------------------------------


def test_empty_sentence_matches_nothing():
    from gdamine.corpus import DependencySentence

    empty = DependencySentence(sent_id=0, tokens=(), text="")
    assert match(parse_pattern("{pos:/NN/}=x"), empty) == []


def test_passive_subject_example(fixture_dir):
    from gdamine.corpus import load_conllu

    with open(fixture_dir / "table1.conllu", encoding="utf-8") as handle:
        docs = load_conllu(handle)
    sentence = next(d for d in docs if d.pmid == "20360610").sentences[0]
    results = match(parse_pattern("{lemma:/increase/}=s >/nsubjpass/ {}=a"), sentence)
    assert len(results) == 1
    b = results[0].bindings
    assert sentence.token(b["s"]).form == "increased"
    assert sentence.token(b["a"]).form == "Expression"


def _demo_sentence():
    return make_sentence(
        [
            ("expression", "expression", "NN", 3, "nsubjpass"),
            ("was", "be", "VBD", 3, "auxpass"),
            ("elevated", "elevate", "VBN", 0, "root"),
            ("in", "in", "IN", 3, "prep"),
            ("tissues", "tissue", "NNS", 4, "pobj"),
        ]
    )


def test_lemma_test_is_case_insensitive():
    sentence = make_sentence([("NSCLC", "NSCLC", "NN", 0, "root")])
    assert match(parse_pattern("{lemma:/nsclc/}=x"), sentence)


def test_regexes_are_anchored():
    sentence = _demo_sentence()
    assert not match(parse_pattern("{lemma:/elev/}=x"), sentence)
    assert match(parse_pattern("{lemma:/elev.*/}=x"), sentence)


def test_parent_and_ancestor_relations():
    sentence = _demo_sentence()
    up = match(parse_pattern("{form:/tissues/}=t </pobj/ {lemma:/in/}=p"), sentence)
    assert [r.bindings for r in up] == [{"t": 5, "p": 4}]
    anc = match(parse_pattern("{form:/tissues/}=t << {pos:/VBN/}=v"), sentence)
    assert [r.bindings for r in anc] == [{"t": 5, "v": 3}]
    # ancestor first-edge filter applies to the starting token's own deprel
    assert match(parse_pattern("{form:/tissues/}=t <</pobj/ {pos:/VBN/}=v"), sentence)
    assert not match(parse_pattern("{form:/tissues/}=t <</prep/ {pos:/VBN/}=v"), sentence)


def test_descendant_first_edge_filter():
    sentence = _demo_sentence()
    hits = match(parse_pattern("{pos:/VBN/}=v >>/prep/ {pos:/NNS/}=n"), sentence)
    assert [r.bindings for r in hits] == [{"v": 3, "n": 5}]
    assert not match(parse_pattern("{pos:/VBN/}=v >>/pobj/ {pos:/NNS/}=n"), sentence)


def test_match_order_is_deterministic():
    sentence = make_sentence(
        [
            ("a", "a", "NN", 0, "root"),
            ("b", "b", "NN", 1, "dep"),
            ("c", "c", "NN", 1, "dep"),
            ("d", "d", "NN", 1, "dep"),
        ]
    )
    results = match(parse_pattern("{pos:/NN/}=h > {pos:/NN/}=c"), sentence)
    bindings = [tuple(sorted(r.bindings.items())) for r in results]
    assert bindings == sorted(bindings)
    assert len(results) == 3


def test_match_first_priority_then_order():
    sentence = _demo_sentence()
    late = parse_pattern("{pos:/VBN/}=x", pattern_id="late", priority=20)
    early = parse_pattern("{pos:/VBN/}=y", pattern_id="early", priority=10)
    hit = match_first([late, early], sentence)
    assert hit is not None
    assert hit[0].pattern_id == "early"
    # same priority: list order wins
    other = parse_pattern("{pos:/VBN/}=z", pattern_id="other", priority=10)
    hit = match_first([other, early], sentence)
    assert hit[0].pattern_id == "other"


def test_match_first_empty():
    assert match_first([], _demo_sentence()) is None


# -- oracle equivalence and properties -----------------------------------------


_POS = ["NN", "VBN", "JJ"]
_DEPRELS = ["nsubj", "prep", "pobj", "dep"]
_LEMMAS = ["alpha", "beta", "gamma"]


def _random_sentence(rng, max_tokens=8):
    n = rng.randint(1, max_tokens)
    order = list(range(1, n + 1))
    rng.shuffle(order)
    head_of = {order[0]: 0}
    for i, node in enumerate(order[1:], start=1):
        head_of[node] = order[rng.randrange(i)]
    rows = []
    for i in range(1, n + 1):
        lemma = rng.choice(_LEMMAS)
        rows.append((f"{lemma}{i}", lemma, rng.choice(_POS), head_of[i], rng.choice(_DEPRELS)))
    return make_sentence(rows)


def _random_pattern(rng, max_nodes=3):
    n = rng.randint(1, max_nodes)
    counter = [0]

    def make_node(remaining):
        tests = []
        if rng.random() < 0.8:
            attr, pool = rng.choice(
                [("lemma", _LEMMAS), ("pos", _POS), ("deprel", _DEPRELS), ("form", ["alpha1", "beta2"])]
            )
            values = rng.sample(pool, rng.randint(1, 2))
            tests.append((attr, "|".join(values)))
        counter[0] += 1
        capture = f"c{counter[0]}"
        children = []
        while remaining[0] > 0 and rng.random() < 0.6:
            remaining[0] -= 1
            rel = RelConstraint(
                kind=rng.choice(list(RelKind)),
                deprel=rng.choice([None, rng.choice(_DEPRELS), "nsubj|prep"]),
            )
            children.append((rel, make_node(remaining)))
        return PatternNode(NodeConstraint(tests=tuple(tests), capture=capture), tuple(children))

    remaining = [n - 1]
    root = make_node(remaining)
    return DepPattern(pattern_id="rnd", priority=0, root=root)


def test_matcher_equals_brute_force_oracle():
    rng = random.Random(20240817)
    for _ in range(300):
        sentence = _random_sentence(rng)
        pattern = _random_pattern(rng)
        fast = [dict(r.bindings) for r in match(pattern, sentence)]
        slow = brute_force_match(pattern, sentence)
        assert fast == slow, f"mismatch for {pattern.to_source()} on {[t.form for t in sentence.tokens]}"


def test_adding_constraint_never_enlarges_matches():
    rng = random.Random(7)
    for _ in range(100):
        sentence = _random_sentence(rng)
        base = _random_pattern(rng, max_nodes=2)
        extended = DepPattern(
            pattern_id="ext",
            priority=0,
            root=PatternNode(
                constraint=NodeConstraint(
                    tests=base.root.constraint.tests + (("pos", "NN"),)
                    if all(a != "pos" for a, _ in base.root.constraint.tests)
                    else base.root.constraint.tests,
                    capture=base.root.constraint.capture,
                ),
                children=base.root.children,
            ),
        )
        base_keys = {tuple(sorted(r.bindings.items())) for r in match(base, sentence)}
        ext_keys = {tuple(sorted(r.bindings.items())) for r in match(extended, sentence)}
        assert ext_keys <= base_keys


def test_descendant_is_transitive_closure_of_child():
    rng = random.Random(99)
    for _ in range(100):
        sentence = _random_sentence(rng)
        via_descendant = {
            (r.bindings["a"], r.bindings["b"])
            for r in match(parse_pattern("{}=a >> {}=b"), sentence)
        }
        one_step = {
            (r.bindings["a"], r.bindings["b"])
            for r in match(parse_pattern("{}=a > {}=b"), sentence)
        }
        closure = dict((pair, None) for pair in one_step)
        changed = True
        while changed:
            changed = False
            for (a, b) in list(closure):
                for (c, d) in one_step:
                    if c == b and (a, d) not in closure:
                        closure[(a, d)] = None
                        changed = True
        assert via_descendant == set(closure)


# -- pattern files --------------------------------------------------------------


def test_load_shipped_pattern_files(patterns):
    assert len(patterns) == 8
    ids = [p.pattern_id for p in patterns]
    assert len(set(ids)) == len(ids)
    two_entity = [p for p in patterns if "entity2" in p.capture_names]
    assert len(two_entity) == 5


def test_pattern_file_errors(tmp_path):
    bad = tmp_path / "bad.dp"
    bad.write_text("id: x\npattern: {lemma:/a/\n", encoding="utf-8")
    with pytest.raises(PatternSyntaxError, match="bad.dp"):
        load_pattern_file(bad)
    dup = tmp_path / "dup.dp"
    dup.write_text("id: x\npattern: {lemma:/a/}=s\n\nid: x\npattern: {lemma:/b/}=s\n", encoding="utf-8")
    with pytest.raises(PatternSyntaxError, match="duplicate pattern id"):
        load_patterns([dup])
