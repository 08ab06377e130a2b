import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from devseq.conll_eval import EntitySpan, extract_entities, iob_to_io, score, score_corpora
from devseq.corpus import parse_conll

from conftest import DATA

GOLDEN = json.loads((DATA / "eval_golden.json").read_text(encoding="utf-8"))


def check_case(case) -> bool:
    r = score(case["gold"], case["pred"], case["scheme"])
    per_type = {t: [c.tp, c.fp, c.fn] for t, c in r.per_type.items()}
    ov = r.overall
    return (
        per_type == case["per_type"]
        and [ov.tp, ov.fp, ov.fn] == case["overall"]
        and list(ov.rounded()) == case["prf"]
    )


@pytest.mark.parametrize("case", GOLDEN, ids=[c["name"] for c in GOLDEN])
def test_golden(case):
    assert check_case(case)


def test_extract_io():
    assert extract_entities(["I-PER", "I-PER", "O", "I-LOC"], "io") == [
        EntitySpan(0, 2, "PER"),
        EntitySpan(3, 4, "LOC"),
    ]


def test_extract_iob():
    assert extract_entities(["B-PER", "I-PER", "B-PER"], "iob") == [
        EntitySpan(0, 2, "PER"),
        EntitySpan(2, 3, "PER"),
    ]


def test_extract_empty_and_outside():
    assert extract_entities([], "io") == []
    assert extract_entities(["O", "O"], "iob") == []


def test_exact_match_example():
    r = score([["I-PER", "I-PER", "O"]], [["I-PER", "I-PER", "O"]], "io")
    assert (r.precision, r.recall, r.f1) == (100.0, 100.0, 100.0)


def test_length_mismatch_names_sentence():
    with pytest.raises(ValueError, match="sentence 1"):
        score([["O"], ["O", "O"]], [["O"], ["O"]], "io")
    with pytest.raises(ValueError):
        score([["O"]], [], "io")


def test_token_accuracy_is_separate():
    r = score([["I-PER", "I-PER"]], [["I-PER", "O"]], "io")
    assert r.f1 == 0.0 and r.token_accuracy == 50.0


def test_score_corpora_checks_tokens():
    g = parse_conll("a N I-PER\n", "io")
    p = parse_conll("b N I-PER\n", "io")
    with pytest.raises(ValueError):
        score_corpora(g, p)
    assert score_corpora(g, g).f1 == 100.0


def test_report_formats():
    r = score(GOLDEN[-1]["gold"], GOLDEN[-1]["pred"], "io")
    table = r.format_table().splitlines()
    assert table[-1].split() == ["Overall", "50.00", "50.00", "50.00", "2"]
    csv = r.to_csv().splitlines()
    assert csv[0] == "type,precision,recall,f1,support,tp,fp,fn"
    assert csv[-1] == "Overall,50.00,50.00,50.00,2,1,1,1"


def test_iob_to_io_merges_adjacent():
    io, merged = iob_to_io(["B-PER", "B-PER", "O", "B-LOC", "I-LOC"])
    assert io == ["I-PER", "I-PER", "O", "I-LOC", "I-LOC"]
    assert merged == 1


_IOB_TAG = st.sampled_from(["O", "B-PER", "I-PER", "B-LOC", "I-LOC"])
_IO_TAG = st.sampled_from(["O", "I-PER", "I-LOC", "I-ORG"])


@settings(max_examples=300)
@given(st.one_of(st.tuples(st.just("io"), st.lists(_IO_TAG)), st.tuples(st.just("iob"), st.lists(_IOB_TAG))))
def test_spans_are_valid_and_disjoint(arg):
    scheme, tags = arg
    spans = extract_entities(tags, scheme)
    last_end = 0
    for s in spans:
        assert last_end <= s.start < s.end <= len(tags)
        assert all(tags[i] != "O" and tags[i].endswith(s.type) for i in range(s.start, s.end))
        last_end = s.end


@settings(max_examples=300)
@given(st.lists(st.lists(_IO_TAG, min_size=1, max_size=6).flatmap(
    lambda g: st.tuples(st.just(g), st.lists(_IO_TAG, min_size=len(g), max_size=len(g)))
), max_size=5))
def test_micro_totals_are_sums(pairs):
    gold = [g for g, _ in pairs]
    pred = [p for _, p in pairs]
    r = score(gold, pred, "io")
    for attr in ("tp", "fp", "fn"):
        assert getattr(r.overall, attr) == sum(getattr(c, attr) for c in r.per_type.values())
    assert r.overall.tp + r.overall.fn == sum(len(extract_entities(g, "io")) for g in gold)
    assert r.overall.tp + r.overall.fp == sum(len(extract_entities(p, "io")) for p in pred)
    assert 0.0 <= r.f1 <= 100.0
