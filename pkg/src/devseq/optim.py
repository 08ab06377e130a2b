"""Adam with coupled L2 weight decay, parameter initialisers and seeded RNG streams."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .autodiff import Tensor, parameter

__all__ = ["RngStream", "derive_seeds", "AdamState", "Adam", "init_uniform", "init_lstm"]


@dataclass(frozen=True)
class RngStream:
    seed: int
    algorithm: str = "PCG64"

    def generator(self) -> np.random.Generator:
        bitgen = getattr(np.random, self.algorithm)
        return np.random.Generator(bitgen(self.seed))


def derive_seeds(seed: int, names: Iterable[str]) -> dict[str, int]:
    """Independent sub-seeds from one umbrella seed (stable across runs)."""
    names = list(names)
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {n: int(c.generate_state(1, np.uint64)[0] >> np.uint64(1)) for n, c in zip(names, children)}


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    t: int = 0
    m: dict[int, np.ndarray] = field(default_factory=dict)
    v: dict[int, np.ndarray] = field(default_factory=dict)


class Adam:
    """Classic Adam; weight decay is added to the gradient before the moments.

    Each :meth:`step` applies::

        g = grad + wd * p
        m = b1 m + (1 - b1) g ;  v = b2 v + (1 - b2) g^2
        p -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)

    and then zeroes the gradients.
    """

    def __init__(
        self,
        params: Iterable[Tensor],
        lr: float = 1e-3,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 0.0,
    ):
        self.params = list(params)
        self.state = AdamState(lr, betas[0], betas[1], eps, weight_decay)
        for i, p in enumerate(self.params):
            self.state.m[i] = np.zeros_like(p.value)
            self.state.v[i] = np.zeros_like(p.value)

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self) -> None:
        if not any(p.fresh for p in self.params):
            raise RuntimeError("Adam.step called before backward populated any gradient")
        s = self.state
        s.t += 1
        bc1 = 1.0 - s.beta1**s.t
        bc2 = 1.0 - s.beta2**s.t
        for i, p in enumerate(self.params):
            g = p.grad
            if s.weight_decay:
                g = g + s.weight_decay * p.value
            m, v = s.m[i], s.v[i]
            m *= s.beta1
            m += (1.0 - s.beta1) * g
            v *= s.beta2
            v += (1.0 - s.beta2) * (g * g)
            p.value -= s.lr * (m / bc1) / (np.sqrt(v / bc2) + s.eps)
        self.zero_grad()


def init_uniform(shape, low: float, high: float, rng: np.random.Generator, name: str | None = None) -> Tensor:
    if not low < high:
        raise ValueError("need low < high")
    return parameter(rng.uniform(low, high, shape), name)


def init_lstm(shape, hidden_size: int, rng: np.random.Generator, name: str | None = None) -> Tensor:
    """Uniform in (-sqrt(k), sqrt(k)) with k = 1 / hidden_size."""
    if hidden_size <= 0:
        raise ValueError("hidden_size must be positive")
    bound = math.sqrt(1.0 / hidden_size)
    return init_uniform(shape, -bound, bound, rng, name)
