"""Linear-chain CRF with explicit start/stop states.

``transitions`` is ``(K + 2, K + 2)``: rows are the *from* tag, columns the
*to* tag, index ``K`` is START and ``K + 1`` is STOP. The score of a path
``y`` is ``T[START, y1] + sum_t E[t, yt] + sum_t T[y(t-1), yt] + T[yn, STOP]``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .autodiff import Tensor, log_sum_exp

__all__ = ["crf_log_partition", "crf_path_score", "crf_nll", "viterbi_decode"]


def _check(emissions: Tensor, transitions: Tensor) -> tuple[int, int]:
    if emissions.value.ndim != 2 or emissions.shape[0] == 0:
        raise ValueError(f"crf: emissions must be non-empty (n, K), got {emissions.shape}")
    n, k = emissions.shape
    if transitions.shape != (k + 2, k + 2):
        raise ValueError(f"crf: transitions must be {(k + 2, k + 2)}, got {transitions.shape}")
    return n, k


def crf_log_partition(emissions: Tensor, transitions: Tensor) -> Tensor:
    """log Z by the forward algorithm in log space."""
    n, k = _check(emissions, transitions)
    start, stop = k, k + 1
    inner = transitions[:k, :k]
    alpha = transitions[start, :k] + emissions[0]
    for t in range(1, n):
        alpha = log_sum_exp(alpha.reshape(k, 1) + inner, axis=0) + emissions[t]
    return log_sum_exp(alpha + transitions[:k, stop], axis=0)


def crf_path_score(emissions: Tensor, transitions: Tensor, tags: Sequence[int]) -> Tensor:
    n, k = _check(emissions, transitions)
    tags = np.asarray(tags, dtype=np.intp)
    if tags.shape != (n,):
        raise ValueError(f"crf: expected {n} tags, got {tags.shape}")
    prev = np.concatenate([[k], tags])
    nxt = np.concatenate([tags, [k + 1]])
    emit = emissions[np.arange(n), tags].sum()
    trans = transitions[prev, nxt].sum()
    return emit + trans


def crf_nll(emissions: Tensor, transitions: Tensor, tags: Sequence[int]) -> Tensor:
    """Negative log-likelihood of ``tags``: ``log Z - score(tags)``."""
    return crf_log_partition(emissions, transitions) - crf_path_score(emissions, transitions, tags)


def viterbi_decode(emissions, transitions) -> list[int]:
    """Highest-scoring tag path. Ties go to the lowest tag index."""
    e = emissions.value if isinstance(emissions, Tensor) else np.asarray(emissions, dtype=np.float64)
    tr = transitions.value if isinstance(transitions, Tensor) else np.asarray(transitions, dtype=np.float64)
    n, k = e.shape
    if n == 0:
        raise ValueError("viterbi_decode: empty sequence")
    if tr.shape != (k + 2, k + 2):
        raise ValueError(f"viterbi_decode: transitions must be {(k + 2, k + 2)}, got {tr.shape}")
    inner = tr[:k, :k]
    delta = tr[k, :k] + e[0]
    back = np.zeros((n, k), dtype=np.intp)
    for t in range(1, n):
        cand = delta[:, None] + inner  # cand[from, to]
        back[t] = cand.argmax(axis=0)
        delta = cand[back[t], np.arange(k)] + e[t]
    best = int((delta + tr[:k, k + 1]).argmax())
    path = [best]
    for t in range(n - 1, 0, -1):
        best = int(back[t, best])
        path.append(best)
    return path[::-1]

