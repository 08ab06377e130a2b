"""Word vectors in the plain-text interchange format.

Each data line is ``word v1 ... vd``; an optional first line ``count dim``
is accepted. Binary formats are not read; export them to text first (for
gensim: ``KeyedVectors.save_word2vec_format(path, binary=False)``).
"""

from __future__ import annotations

import enum
import hashlib
import logging
import threading
from typing import Iterable, Mapping, TextIO

import numpy as np

__all__ = [
    "OovPolicy",
    "EmbeddingTable",
    "EmbeddingFormatError",
    "load_embeddings",
    "read_embeddings",
    "lookup",
    "random_table",
]

log = logging.getLogger(__name__)

OOV_RANGE = 0.25


class OovPolicy(enum.Enum):
    RANDOM = "random"
    ZERO = "zero"


class EmbeddingFormatError(ValueError):
    pass


def _word_seed(seed: int, word: str) -> list[int]:
    digest = hashlib.blake2b(word.encode("utf-8"), digest_size=8).digest()
    return [seed, int.from_bytes(digest, "little")]


class EmbeddingTable:
    """Word -> vector map with a memoizing out-of-vocabulary policy.

    OOV vectors under :attr:`OovPolicy.RANDOM` are drawn uniformly from
    (-0.25, 0.25) by a generator keyed on ``(seed, word)``, so they do not
    depend on query order.
    """

    def __init__(
        self,
        dim: int,
        vectors: Mapping[str, np.ndarray] | None = None,
        oov_policy: OovPolicy | str = OovPolicy.RANDOM,
        seed: int = 0,
        trainable: bool = True,
    ):
        if dim <= 0:
            raise ValueError("embedding dim must be positive")
        self.dim = dim
        self.oov_policy = OovPolicy(oov_policy)
        self.seed = seed
        self.trainable = trainable
        self.vectors: dict[str, np.ndarray] = {}
        for w, v in (vectors or {}).items():
            v = np.asarray(v, dtype=np.float64)
            if v.shape != (dim,):
                raise ValueError(f"vector for {w!r} has shape {v.shape}, expected ({dim},)")
            self.vectors[w] = v
        self.duplicates = 0
        self._oov: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    @property
    def words(self) -> list[str]:
        return list(self.vectors)

    def lookup(self, word: str) -> np.ndarray:
        vec = self.vectors.get(word)
        if vec is not None:
            return vec
        if self.oov_policy is OovPolicy.ZERO:
            return np.zeros(self.dim)
        vec = self._oov.get(word)
        if vec is None:
            with self._lock:
                vec = self._oov.get(word)
                if vec is None:
                    rng = np.random.default_rng(_word_seed(self.seed, word))
                    vec = rng.uniform(-OOV_RANGE, OOV_RANGE, self.dim)
                    self._oov[word] = vec
        return vec


def lookup(table: EmbeddingTable, word: str) -> np.ndarray:
    return table.lookup(word)


def load_embeddings(
    stream: TextIO | Iterable[str],
    expected_dim: int | None = None,
    oov_policy: OovPolicy | str = OovPolicy.RANDOM,
    seed: int = 0,
    trainable: bool = True,
) -> EmbeddingTable:
    """Parse text-format vectors. ``expected_dim=None`` infers the size."""
    dim = expected_dim
    vectors: dict[str, np.ndarray] = {}
    duplicates = 0
    header_count = None
    for lineno, line in enumerate(stream, start=1):
        fields = line.rstrip("\n").split()
        if not fields:
            continue
        if lineno == 1 and len(fields) == 2 and all(f.isdigit() for f in fields):
            header_count, header_dim = int(fields[0]), int(fields[1])
            if dim is not None and dim != header_dim:
                raise EmbeddingFormatError(f"line 1: header dim {header_dim} != expected {dim}")
            dim = header_dim
            continue
        word, values = fields[0], fields[1:]
        if dim is None:
            dim = len(values)
            if dim == 0:
                raise EmbeddingFormatError(f"line {lineno}: no vector values")
        if len(values) != dim:
            raise EmbeddingFormatError(f"line {lineno}: expected {dim} values, found {len(values)}")
        try:
            vec = np.array([float(v) for v in values])
        except ValueError as exc:
            raise EmbeddingFormatError(f"line {lineno}: {exc}") from None
        if word in vectors:
            duplicates += 1
            continue
        vectors[word] = vec
    if not vectors:
        raise EmbeddingFormatError("no embedding vectors found")
    if duplicates:
        log.warning("%d duplicate words ignored (first occurrence kept)", duplicates)
    if header_count is not None and header_count != len(vectors) + duplicates:
        log.warning("header announces %d vectors, found %d", header_count, len(vectors) + duplicates)
    table = EmbeddingTable(dim, vectors, oov_policy, seed, trainable)
    table.duplicates = duplicates
    return table


def read_embeddings(path, expected_dim: int | None = None, **kwargs) -> EmbeddingTable:
    with open(path, encoding="utf-8") as fh:
        return load_embeddings(fh, expected_dim, **kwargs)


def random_table(
    vocab: Iterable[str], dim: int, low: float = -0.25, high: float = 0.25, seed: int = 0
) -> EmbeddingTable:
    """Table of i.i.d. uniform[low, high) vectors, one per vocabulary word."""
    words = list(dict.fromkeys(vocab))
    if not words:
        raise ValueError("vocabulary is empty")
    if dim <= 0:
        raise ValueError("dim must be positive")
    if not low < high:
        raise ValueError("need low < high")
    values = np.random.default_rng(seed).uniform(low, high, (len(words), dim))
    return EmbeddingTable(dim, dict(zip(words, values)), seed=seed)
