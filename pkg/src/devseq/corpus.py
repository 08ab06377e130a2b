"""CoNLL-style corpora: parsing, writing, splitting, vocabularies, stats.

One token per line as ``SURFACE POS ENTITY``; a blank line ends a sentence.
Entity tags follow either the IO scheme (``O``, ``I-T``) or IOB (``O``,
``I-T``, ``B-T``).
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

__all__ = [
    "TagScheme",
    "Token",
    "Sentence",
    "Corpus",
    "ConllFormatError",
    "SchemeError",
    "split_tag",
    "parse_conll",
    "read_conll",
    "write_conll",
    "split_corpus",
    "build_vocab",
    "Vocab",
    "UNK",
    "PAD",
    "pos_one_hot",
    "CorpusStats",
    "corpus_stats",
]

UNK = "<unk>"
PAD = "<pad>"
OUTSIDE = "O"


class TagScheme(enum.Enum):
    IO = "io"
    IOB = "iob"

    @classmethod
    def parse(cls, value: "str | TagScheme") -> "TagScheme":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown tag scheme {value!r} (expected io or iob)") from None

    @property
    def prefixes(self) -> tuple[str, ...]:
        return ("I",) if self is TagScheme.IO else ("B", "I")


class ConllFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class SchemeError(ConllFormatError):
    """An entity tag that the declared scheme does not admit."""


def split_tag(tag: str, scheme: TagScheme) -> tuple[str, str | None]:
    """Decompose an entity tag into ``(prefix, type)``; ``O`` gives ``("O", None)``."""
    if tag == OUTSIDE:
        return OUTSIDE, None
    prefix, sep, etype = tag.partition("-")
    if not sep or not etype or prefix not in scheme.prefixes:
        raise SchemeError(f"tag {tag!r} is not valid under the {scheme.name} scheme")
    return prefix, etype


@dataclass(frozen=True)
class Token:
    surface: str
    pos: str
    entity: str

    def __post_init__(self):
        if not self.surface:
            raise ValueError("token surface cannot be empty")


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("sentence must contain at least one token")
        object.__setattr__(self, "tokens", tuple(self.tokens))

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    @property
    def words(self) -> list[str]:
        return [t.surface for t in self.tokens]

    @property
    def pos_tags(self) -> list[str]:
        return [t.pos for t in self.tokens]

    @property
    def entity_tags(self) -> list[str]:
        return [t.entity for t in self.tokens]


@dataclass(frozen=True)
class Corpus:
    """Immutable corpus. Build with :meth:`from_sentences` to derive the
    entity-type set and POS vocabulary from the tokens."""

    sentences: tuple[Sentence, ...]
    scheme: TagScheme
    entity_types: frozenset[str] = field(default_factory=frozenset)
    pos_vocab: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        object.__setattr__(self, "entity_types", frozenset(self.entity_types))
        object.__setattr__(self, "pos_vocab", tuple(self.pos_vocab))
        pos_known = set(self.pos_vocab)
        for s in self.sentences:
            for tok in s.tokens:
                _, etype = split_tag(tok.entity, self.scheme)
                if etype is not None and etype not in self.entity_types:
                    raise SchemeError(f"entity type {etype!r} not declared for corpus")
                if tok.pos not in pos_known:
                    raise ValueError(f"POS tag {tok.pos!r} missing from pos_vocab")

    @classmethod
    def from_sentences(
        cls,
        sentences: Iterable[Sentence | Sequence[Token]],
        scheme: TagScheme | str,
        entity_types: Iterable[str] = (),
    ) -> "Corpus":
        scheme = TagScheme.parse(scheme)
        sents = tuple(s if isinstance(s, Sentence) else Sentence(tuple(s)) for s in sentences)
        types = set(entity_types)
        pos: dict[str, None] = {}
        for s in sents:
            for tok in s.tokens:
                _, etype = split_tag(tok.entity, scheme)
                if etype is not None:
                    types.add(etype)
                pos.setdefault(tok.pos, None)
        return cls(sents, scheme, frozenset(types), tuple(pos))

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    @property
    def num_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)

    def tag_set(self) -> tuple[str, ...]:
        """All tags admissible for this corpus, ``O`` first then sorted."""
        tags = [f"{p}-{t}" for t in sorted(self.entity_types) for p in self.scheme.prefixes]
        return (OUTSIDE, *sorted(tags))

    def replace_sentences(self, sentences: Iterable[Sentence]) -> "Corpus":
        return Corpus(tuple(sentences), self.scheme, self.entity_types, self.pos_vocab)


def _parse_columns(spec: str | Sequence[int] | None) -> tuple[int, int, int] | None:
    if spec is None:
        return None
    if isinstance(spec, str):
        parts = [p for p in spec.replace(" ", "").split(",") if p]
        spec = [int(p) for p in parts]
    cols = tuple(int(c) for c in spec)
    if len(cols) != 3:
        raise ValueError("column mapping needs exactly three indices: surface,pos,entity")
    return cols  # type: ignore[return-value]


def parse_conll(
    stream: TextIO | str,
    scheme: TagScheme | str,
    columns: str | Sequence[int] | None = None,
) -> Corpus:
    """Parse CoNLL text into a :class:`Corpus`.

    Without ``columns`` every non-blank line must have exactly three
    whitespace-separated fields. ``columns`` (e.g. ``"0,1,3"``) selects the
    surface, POS and entity fields from wider files.
    """
    scheme = TagScheme.parse(scheme)
    cols = _parse_columns(columns)
    lines = stream.splitlines() if isinstance(stream, str) else stream.read().splitlines()
    sentences: list[Sentence] = []
    current: list[Token] = []
    types: set[str] = set()
    pos: dict[str, None] = {}
    for lineno, line in enumerate(lines, start=1):
        fields = line.split()
        if not fields:
            if current:
                sentences.append(Sentence(tuple(current)))
                current = []
            continue
        if cols is None:
            if len(fields) != 3:
                raise ConllFormatError(
                    f"expected 3 columns (SURFACE POS ENTITY), found {len(fields)}", lineno
                )
            surface, ptag, etag = fields
            ecol = 3
        else:
            try:
                surface, ptag, etag = (fields[c] for c in cols)
            except IndexError:
                raise ConllFormatError(
                    f"column mapping {cols} needs more than {len(fields)} columns", lineno
                ) from None
            ecol = (cols[2] % len(fields)) + 1
        try:
            _, etype = split_tag(etag, scheme)
        except SchemeError as exc:
            raise SchemeError(str(exc), lineno, ecol) from None
        if etype is not None:
            types.add(etype)
        pos.setdefault(ptag, None)
        current.append(Token(surface, ptag, etag))
    if current:
        sentences.append(Sentence(tuple(current)))
    return Corpus(tuple(sentences), scheme, frozenset(types), tuple(pos))


def read_conll(path, scheme: TagScheme | str, columns=None) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        return parse_conll(fh, scheme, columns)


def write_conll(corpus: Corpus) -> str:
    """Serialize ``corpus``; each sentence is followed by one blank line."""
    out = []
    for s in corpus.sentences:
        for tok in s.tokens:
            out.append(f"{tok.surface} {tok.pos} {tok.entity}\n")
        out.append("\n")
    return "".join(out)


def split_corpus(
    corpus: Corpus, ratios: Sequence[float] = (0.64, 0.16, 0.20), seed: int = 0
) -> tuple[Corpus, Corpus, Corpus]:
    """Shuffle sentences with ``seed`` and cut into train/dev/test.

    Dev and test sizes are floored; the remainder goes to train. Each part
    keeps the original sentence order.
    """
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise ValueError("ratios must be three positive fractions")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)!r}")
    n = len(corpus)
    if n < 3:
        raise ValueError(f"need at least 3 sentences to split, got {n}")
    n_dev = math.floor(n * ratios[1] + 1e-9)
    n_test = math.floor(n * ratios[2] + 1e-9)
    order = np.random.default_rng(seed).permutation(n)
    dev_idx = sorted(order[:n_dev])
    test_idx = sorted(order[n_dev : n_dev + n_test])
    train_idx = sorted(order[n_dev + n_test :])
    pick = lambda idx: corpus.replace_sentences(corpus.sentences[i] for i in idx)  # noqa: E731
    return pick(train_idx), pick(dev_idx), pick(test_idx)


class Vocab:
    """Ordered symbol table with ``<unk>`` at 0 and ``<pad>`` at 1."""

    UNK_INDEX = 0
    PAD_INDEX = 1

    def __init__(self, symbols: Iterable[str] = ()):
        self.itos: list[str] = [UNK, PAD]
        self.stoi: dict[str, int] = {UNK: 0, PAD: 1}
        for s in symbols:
            if s not in self.stoi:
                self.stoi[s] = len(self.itos)
                self.itos.append(s)

    def __len__(self) -> int:
        return len(self.itos)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self.stoi

    def __getitem__(self, symbol: str) -> int:
        return self.stoi.get(symbol, self.UNK_INDEX)

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocab) and self.itos == other.itos

    def __repr__(self) -> str:
        return f"Vocab({len(self)} symbols)"

    def lookup(self, symbols: Iterable[str]) -> list[int]:
        return [self[s] for s in symbols]


def build_vocab(corpus: Corpus, min_count: int = 1) -> Vocab:
    """Word vocabulary ordered by frequency (desc) then first occurrence."""
    if min_count < 0:
        raise ValueError("min_count must be non-negative")
    counts: Counter[str] = Counter()
    first: dict[str, int] = {}
    for s in corpus.sentences:
        for tok in s.tokens:
            counts[tok.surface] += 1
            first.setdefault(tok.surface, len(first))
    kept = [w for w in first if counts[w] >= min_count and w not in (UNK, PAD)]
    kept.sort(key=lambda w: (-counts[w], first[w]))
    return Vocab(kept)


def pos_one_hot(pos: str, pos_vocab: Sequence[str]) -> np.ndarray:
    try:
        idx = list(pos_vocab).index(pos)
    except ValueError:
        raise KeyError(f"unknown POS tag {pos!r}") from None
    vec = np.zeros(len(pos_vocab))
    vec[idx] = 1.0
    return vec


@dataclass
class CorpusStats:
    token_counts: dict[str, int]
    span_counts: dict[str, int]
    outside: int
    total_tokens: int
    total_sentences: int

    @property
    def entity_tokens(self) -> int:
        return sum(self.token_counts.values())

    def rows(self) -> list[tuple[str, str]]:
        rows = []
        for t in sorted(self.token_counts):
            rows.append((f"{t} (tokens)", str(self.token_counts[t])))
            rows.append((f"{t} (spans)", str(self.span_counts.get(t, 0))))
        rows += [
            ("Total entity tokens w/o O", str(self.entity_tokens)),
            ("Total entity spans", str(sum(self.span_counts.values()))),
            ("Others - O", str(self.outside)),
            ("Total tokens w/ O", str(self.total_tokens)),
            ("Total sentences", str(self.total_sentences)),
        ]
        return rows

    def format(self) -> str:
        rows = self.rows()
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def corpus_stats(corpus: Corpus) -> CorpusStats:
    from .conll_eval import extract_entities

    tokens: Counter[str] = Counter()
    spans: Counter[str] = Counter()
    outside = 0
    for s in corpus.sentences:
        for tok in s.tokens:
            _, etype = split_tag(tok.entity, corpus.scheme)
            if etype is None:
                outside += 1
            else:
                tokens[etype] += 1
        for span in extract_entities(s.entity_tags, corpus.scheme):
            spans[span.type] += 1
    return CorpusStats(dict(tokens), dict(spans), outside, corpus.num_tokens, len(corpus))
