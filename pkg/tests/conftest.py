from pathlib import Path

import pytest

from gdamine.corpus import DependencySentence, Token, align_tokens
from gdamine.lexicons import load_lexicons
from gdamine.patterns import load_patterns

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = Path(__file__).resolve().parent / "fixtures"
LEXICON_DIR = ROOT / "lexicons"
PATTERN_FILES = [ROOT / "patterns" / "typeA.dp", ROOT / "patterns" / "typeB.dp"]


def make_sentence(rows, text=None, sent_id=1, base=0):
    """Build a sentence from (form, lemma, xpos, head, deprel) rows.

    Offsets are computed by locating each form in the text (space-joined
    forms when no text is given), shifted by ``base``.
    """
    forms = [r[0] for r in rows]
    if text is None:
        text = " ".join(forms)
    spans = align_tokens(text, forms, base=base)
    tokens = tuple(
        Token(
            index=i + 1,
            form=form,
            lemma=lemma,
            upos="_",
            xpos=xpos,
            head=head,
            deprel=deprel,
            char_start=start,
            char_end=end,
        )
        for i, ((form, lemma, xpos, head, deprel), (start, end)) in enumerate(zip(rows, spans))
    )
    return DependencySentence(sent_id=sent_id, tokens=tokens, text=text)


@pytest.fixture(scope="session")
def lexicons():
    return load_lexicons(LEXICON_DIR)


@pytest.fixture(scope="session")
def patterns():
    return load_patterns(PATTERN_FILES)


@pytest.fixture(scope="session")
def fixture_dir():
    return FIXTURES
