from pathlib import Path

import numpy as np
import pytest

from devseq.corpus import Corpus, Sentence, Token, read_conll

DATA = Path(__file__).parent / "data"
TOY = Path(__file__).parents[1] / "src" / "devseq" / "data" / "toy_ner.conll"

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")


@pytest.fixture(scope="session")
def toy_corpus() -> Corpus:
    return read_conll(TOY, "io")


def tiny_corpus(pos=("N", "V", "N")) -> Corpus:
    """Three tokens, two tags (O, I-PER)."""
    words = ["राम", "घर", "गए"]
    tags = ["I-PER", "O", "O"]
    sent = Sentence(tuple(Token(w, p, t) for w, p, t in zip(words, pos, tags)))
    return Corpus.from_sentences([sent], "io")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
