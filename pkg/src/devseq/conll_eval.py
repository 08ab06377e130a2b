"""Entity-level precision / recall / F1 with conlleval semantics.

A predicted entity counts as a true positive only when a gold entity with
the same type, start and end exists. Scores are percentages and 0/0 is 0.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .corpus import Corpus, TagScheme, split_tag

__all__ = [
    "EntitySpan",
    "Counts",
    "ScoreReport",
    "extract_entities",
    "score",
    "score_corpora",
    "iob_to_io",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class EntitySpan:
    start: int
    end: int
    type: str

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError(f"empty span [{self.start}, {self.end})")


def extract_entities(tags: Sequence[str], scheme: TagScheme | str) -> list[EntitySpan]:
    """Spans encoded by ``tags``.

    IO: a maximal run of identical ``I-T`` tags is one entity. IOB: ``B-T``
    opens an entity, ``I-T`` continues a same-type entity and otherwise
    opens one (conlleval's treatment of an orphan ``I``).
    """
    scheme = TagScheme.parse(scheme)
    spans = []
    start = None
    cur_type = None
    for i, tag in enumerate(tags):
        prefix, etype = split_tag(tag, scheme)
        continues = prefix == "I" and cur_type is not None and etype == cur_type
        if cur_type is not None and not continues:
            spans.append(EntitySpan(start, i, cur_type))
            cur_type = None
        if etype is not None and not continues:
            start, cur_type = i, etype
    if cur_type is not None:
        spans.append(EntitySpan(start, len(tags), cur_type))
    return spans


def _pct(num: int, den: int) -> float:
    return 100.0 * num / den if den else 0.0


@dataclass
class Counts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return _pct(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> float:
        return _pct(self.tp, self.tp + self.fn)

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    @property
    def support(self) -> int:
        return self.tp + self.fn

    def rounded(self) -> tuple[float, float, float]:
        return round(self.precision, 2), round(self.recall, 2), round(self.f1, 2)


@dataclass
class ScoreReport:
    per_type: dict[str, Counts] = field(default_factory=dict)
    overall: Counts = field(default_factory=Counts)
    tokens: int = 0
    correct_tokens: int = 0

    @property
    def precision(self) -> float:
        return self.overall.precision

    @property
    def recall(self) -> float:
        return self.overall.recall

    @property
    def f1(self) -> float:
        return self.overall.f1

    @property
    def token_accuracy(self) -> float:
        """Diagnostic only."""
        return _pct(self.correct_tokens, self.tokens)

    def rows(self) -> list[tuple[str, Counts]]:
        return [(t, self.per_type[t]) for t in sorted(self.per_type)] + [("Overall", self.overall)]

    def format_table(self) -> str:
        lines = [f"{'type':<10}{'precision':>11}{'recall':>9}{'f1':>9}{'support':>9}"]
        for name, c in self.rows():
            lines.append(
                f"{name:<10}{c.precision:>11.2f}{c.recall:>9.2f}{c.f1:>9.2f}{c.support:>9d}"
            )
        return "\n".join(lines)

    def to_csv(self) -> str:
        lines = ["type,precision,recall,f1,support,tp,fp,fn"]
        for name, c in self.rows():
            lines.append(
                f"{name},{c.precision:.2f},{c.recall:.2f},{c.f1:.2f},{c.support},{c.tp},{c.fp},{c.fn}"
            )
        return "\n".join(lines) + "\n"


def score(
    gold: Iterable[Sequence[str]],
    pred: Iterable[Sequence[str]],
    scheme: TagScheme | str,
) -> ScoreReport:
    """Score aligned sentence-wise tag sequences."""
    scheme = TagScheme.parse(scheme)
    per_type: dict[str, Counts] = defaultdict(Counts)
    report = ScoreReport()
    gold, pred = list(gold), list(pred)
    if len(gold) != len(pred):
        raise ValueError(f"gold has {len(gold)} sentences but prediction has {len(pred)}")
    for i, (g, p) in enumerate(zip(gold, pred)):
        if len(g) != len(p):
            raise ValueError(f"sentence {i}: gold has {len(g)} tokens, prediction has {len(p)}")
        gs = set(extract_entities(g, scheme))
        ps = set(extract_entities(p, scheme))
        for span in gs & ps:
            per_type[span.type].tp += 1
        for span in ps - gs:
            per_type[span.type].fp += 1
        for span in gs - ps:
            per_type[span.type].fn += 1
        report.tokens += len(g)
        report.correct_tokens += sum(a == b for a, b in zip(g, p))
    report.per_type = dict(per_type)
    for c in per_type.values():
        report.overall.tp += c.tp
        report.overall.fp += c.fp
        report.overall.fn += c.fn
    return report


def score_corpora(gold: Corpus, pred: Corpus) -> ScoreReport:
    if gold.scheme is not pred.scheme:
        raise ValueError("gold and prediction use different tag schemes")
    for i, (g, p) in enumerate(zip(gold.sentences, pred.sentences)):
        if g.words != p.words:
            raise ValueError(f"sentence {i}: prediction tokens differ from gold tokens")
    return score(
        (s.entity_tags for s in gold.sentences),
        (s.entity_tags for s in pred.sentences),
        gold.scheme,
    )


def iob_to_io(tags: Sequence[str]) -> tuple[list[str], int]:
    """Rewrite IOB tags as IO.

    Adjacent same-type entities become indistinguishable and merge. The
    number of merges is returned (and logged) so callers can see the loss.
    """
    io = []
    for tag in tags:
        prefix, etype = split_tag(tag, TagScheme.IOB)
        io.append("O" if etype is None else f"I-{etype}")
    merged = len(extract_entities(tags, TagScheme.IOB)) - len(extract_entities(io, TagScheme.IO))
    if merged:
        log.warning("IOB->IO conversion merged %d adjacent entities", merged)
    return io, merged
