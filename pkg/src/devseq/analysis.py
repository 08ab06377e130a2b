"""Embedding-space inspection: PCA projection and cosine nearest neighbours."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .embeddings import EmbeddingTable

__all__ = ["Projection", "pca_project", "Neighbors", "nearest_neighbors", "cosine"]

_MAX_SQUARINGS = 200
_POLISH_STEPS = 8


@dataclass
class Projection:
    components: np.ndarray  # (k, dim), orthonormal rows
    mean: np.ndarray
    coords: np.ndarray  # (n, k)
    variances: np.ndarray
    explained_variance_ratio: np.ndarray
    words: list[str] | None = None

    def to_csv(self) -> str:
        if self.coords.shape[1] < 2:
            raise ValueError("CSV export needs two components")
        words = self.words or [str(i) for i in range(len(self.coords))]
        lines = ["word,x,y"]
        lines += [f"{w},{x:.10g},{y:.10g}" for w, (x, y) in zip(words, self.coords[:, :2])]
        return "\n".join(lines) + "\n"


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def _dominant_eigvec(cov: np.ndarray) -> np.ndarray:
    """Dominant eigenvector by power iteration accelerated with repeated squaring.

    ``M <- M @ M / ||M @ M||`` converges to the projector onto the top
    eigenspace; a few plain power steps then polish the chosen column.
    """
    m = cov / np.linalg.norm(cov)
    for _ in range(_MAX_SQUARINGS):
        nxt = m @ m
        nxt /= np.linalg.norm(nxt)
        if np.linalg.norm(nxt - m) < 1e-15:
            m = nxt
            break
        m = nxt
    v = m[:, int(np.argmax(np.linalg.norm(m, axis=0)))].copy()
    v /= np.linalg.norm(v)
    for _ in range(_POLISH_STEPS):
        w = cov @ v
        norm = np.linalg.norm(w)
        if norm == 0:
            break
        v = w / norm
    return v


def _orthogonal_fill(basis: list[np.ndarray], dim: int) -> np.ndarray:
    """Unit vector orthogonal to ``basis``, chosen deterministically from the axes."""
    best, best_norm = None, -1.0
    for j in range(dim):
        e = np.zeros(dim)
        e[j] = 1.0
        for b in basis:
            e -= (b @ e) * b
        n = np.linalg.norm(e)
        if n > best_norm + 1e-12:
            best, best_norm = e / n, n
    return best


def pca_project(
    vectors: Sequence[Sequence[float]] | np.ndarray, k: int = 2, words: list[str] | None = None
) -> Projection:
    """Project mean-centred data onto its top-``k`` principal directions.

    Directions are found one at a time by power iteration, deflating the
    covariance (projecting out found directions) between rounds. Variances
    use the sample covariance (``n - 1`` denominator).
    """
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("expected a list of equal-length vectors")
    n, dim = x.shape
    if n < 2:
        raise ValueError("PCA needs at least 2 vectors")
    if not 1 <= k <= dim:
        raise ValueError(f"k must be in [1, {dim}]")
    mean = x.mean(axis=0)
    centred = x - mean
    cov = centred.T @ centred / (n - 1)
    total = float(np.trace(cov))
    if total <= 0 or np.allclose(centred, 0.0):
        raise ValueError("degenerate data: all vectors are identical")

    comps: list[np.ndarray] = []
    deflated = cov
    for _ in range(k):
        if comps:
            proj = np.eye(dim) - sum(np.outer(c, c) for c in comps)
            deflated = proj @ cov @ proj
        if np.trace(deflated) <= 1e-12 * total:
            v = _orthogonal_fill(comps, dim)
        else:
            v = _dominant_eigvec(deflated)
            for c in comps:
                v = v - (c @ v) * c
            v /= np.linalg.norm(v)
        comps.append(_canonical_sign(v))
    components = np.array(comps)
    coords = centred @ components.T
    variances = np.array([c @ cov @ c for c in components])
    return Projection(components, mean, coords, variances, variances / total, words)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(a @ b / (na * nb))


@dataclass
class Neighbors:
    items: list[tuple[str, float]]
    truncated: bool = False  # fewer than k candidates were available


def nearest_neighbors(
    table: EmbeddingTable, word: str, k: int = 10, vector: np.ndarray | None = None
) -> Neighbors:
    """Top-``k`` words by cosine similarity, excluding ``word`` itself.

    Ties are broken lexicographically by word.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    query = table.lookup(word) if vector is None else np.asarray(vector, dtype=np.float64)
    scored = [(w, cosine(query, v)) for w, v in table.vectors.items() if w != word]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return Neighbors(scored[:k], truncated=len(scored) < k)
