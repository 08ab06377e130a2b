"""Post-position stripping for Nepali tokens.

Suffixes are matched on grapheme-cluster boundaries, so a suffix never
cuts through a cluster (``क्ष`` stays whole). Only the longest matching
suffix is removed, once.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, TextIO

from .corpus import Corpus, Sentence, Token
from .segmentation import grapheme_texts

__all__ = [
    "PostpositionList",
    "load_postpositions",
    "default_postpositions",
    "lemmatize_token",
    "lemmatize_corpus",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PostpositionList:
    suffixes: frozenset[str]
    min_stem_graphemes: int = 1

    def __post_init__(self):
        object.__setattr__(self, "suffixes", frozenset(self.suffixes))
        if not self.suffixes:
            raise ValueError("post-position list is empty")
        if any(not s for s in self.suffixes):
            raise ValueError("post-positions must be non-empty strings")
        if self.min_stem_graphemes < 1:
            raise ValueError("min_stem_graphemes must be positive")

    def __len__(self) -> int:
        return len(self.suffixes)


def load_postpositions(source: TextIO | Iterable[str], min_stem_graphemes: int = 1) -> PostpositionList:
    """Read one suffix per line; blank lines and ``#`` comments are skipped."""
    found = []
    for line in source:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        found.append(line)
    if not found:
        raise ValueError("no post-positions found in source")
    unique = frozenset(found)
    log.info("loaded %d post-positions (%d duplicates dropped)", len(unique), len(found) - len(unique))
    return PostpositionList(unique, min_stem_graphemes)


def default_postpositions() -> PostpositionList:
    text = resources.files("devseq").joinpath("data/postpositions.txt").read_text(encoding="utf-8")
    return load_postpositions(text.splitlines())


def lemmatize_token(token: str, postpositions: PostpositionList) -> str:
    clusters = grapheme_texts(token)
    # cumulative codepoint offsets of each cluster boundary, from the end
    boundaries = {}
    offset = 0
    for n_from_end, cl in enumerate(reversed(clusters), start=1):
        offset += len(cl)
        boundaries[offset] = len(clusters) - n_from_end
    best = None
    for suffix in postpositions.suffixes:
        stem_clusters = boundaries.get(len(suffix))
        if stem_clusters is None or stem_clusters < postpositions.min_stem_graphemes:
            continue
        if token.endswith(suffix) and (best is None or len(suffix) > len(best)):
            best = suffix
    return token[: -len(best)] if best else token


def lemmatize_corpus(corpus: Corpus, postpositions: PostpositionList) -> Corpus:
    """Replace every surface with its lemma; tags and boundaries untouched."""
    sentences = [
        Sentence(tuple(Token(lemmatize_token(t.surface, postpositions), t.pos, t.entity) for t in s))
        for s in corpus.sentences
    ]
    return corpus.replace_sentences(sentences)
