import io

import pytest

from devseq.corpus import Corpus, Sentence, Token, parse_conll, write_conll
from devseq.morphology import (
    PostpositionList,
    default_postpositions,
    lemmatize_corpus,
    lemmatize_token,
    load_postpositions,
)


def pp(*suffixes, min_stem=1):
    return PostpositionList(frozenset(suffixes), min_stem)


def test_load_three():
    assert len(load_postpositions(io.StringIO("को\nले\nमा\n"))) == 3


def test_load_dedup():
    assert load_postpositions(io.StringIO("को\nको\n")).suffixes == {"को"}


def test_load_only_comments_is_error():
    with pytest.raises(ValueError):
        load_postpositions(io.StringIO("# nothing\n#here\n\n"))


def test_default_list_contains_named_examples():
    suffixes = default_postpositions().suffixes
    assert {"को", "ले", "मा", "मै", "सँग", "देखि"} <= suffixes


def test_strip_simple():
    assert lemmatize_token("नेपालको", pp("को")) == "नेपाल"


def test_min_stem_guard():
    assert lemmatize_token("को", pp("को")) == "को"
    assert lemmatize_token("रामको", pp("को", min_stem=3)) == "रामको"
    assert lemmatize_token("नेपालको", pp("को", min_stem=3)) == "नेपाल"


def test_longest_match_wins():
    assert lemmatize_token("घरमाथि", pp("मा", "माथि", "थि")) == "घर"


def test_single_pass_only():
    # stem itself ends in a listed suffix; only one is removed
    assert lemmatize_token("गाउँकोको", pp("को")) == "गाउँको"


def test_suffix_must_align_with_cluster_boundary():
    # "ा" is a dependent vowel sign: stripping it would split the cluster "मा"
    assert lemmatize_token("रामा", pp("ा")) == "रामा"
    # "ष" is the tail of the conjunct cluster "क्ष"
    assert lemmatize_token("पक्ष", pp("ष")) == "पक्ष"


def test_invalid_list():
    with pytest.raises(ValueError):
        PostpositionList(frozenset())
    with pytest.raises(ValueError):
        PostpositionList(frozenset({""}))


def test_lemmatize_corpus_keeps_tags():
    corpus = Corpus.from_sentences([[Token("नेपालको", "NNP", "I-LOC")]], "io")
    out = lemmatize_corpus(corpus, pp("को"))
    assert out.sentences[0].tokens == (Token("नेपाल", "NNP", "I-LOC"),)
    assert out.scheme is corpus.scheme and out.entity_types == corpus.entity_types


def test_lemmatize_empty_and_identity(toy_corpus):
    empty = parse_conll("", "io")
    assert lemmatize_corpus(empty, pp("को")) == empty
    untouched = lemmatize_corpus(toy_corpus, pp("xyz"))
    assert untouched == toy_corpus


def test_lemmatize_preserves_structure(toy_corpus):
    out = lemmatize_corpus(toy_corpus, default_postpositions())
    assert len(out) == len(toy_corpus)
    for a, b in zip(out, toy_corpus):
        assert a.entity_tags == b.entity_tags and a.pos_tags == b.pos_tags
    assert write_conll(toy_corpus) != write_conll(out) or out == toy_corpus
