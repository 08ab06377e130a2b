"""BiLSTM sequence labeler with optional subword CNN, POS one-hot and CRF.

Per token the input is ``word_emb ⊕ subword_cnn ⊕ pos_one_hot`` (the last
two optional, always in that order). A single-layer BiLSTM produces
``h_t = [forward_t ; backward_t]``, dropout is applied, and an affine
layer gives per-tag emission scores. Training minimises either the mean
token cross-entropy or the CRF negative log-likelihood.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Callable, Sequence

import numpy as np

from . import checkpoint
from .autodiff import (
    Role,
    Tensor,
    concat,
    constant,
    dropout,
    embedding_row_select,
    log_softmax,
    matmul,
    max_over_time,
    relu,
    sigmoid,
    stack,
    tanh,
    windows,
)
from .corpus import Corpus, Sentence, TagScheme, Vocab, build_vocab
from .crf import crf_nll, viterbi_decode
from .embeddings import EmbeddingTable, OovPolicy
from .optim import init_lstm, init_uniform
from .segmentation import segmenter_for

__all__ = [
    "ModelConfig",
    "LstmParams",
    "SequenceLabeler",
    "lstm_step",
    "bilstm",
    "softmax_nll",
    "ConfigMismatchError",
]

SUBWORD_MODES = ("none", "char", "grapheme")


class ConfigMismatchError(ValueError):
    pass


@dataclass
class ModelConfig:
    word_emb_dim: int = 300
    hidden_size: int = 100
    subword: str = "none"
    subword_emb_dim: int = 30
    cnn_filter_widths: tuple[int, ...] = (3, 4, 5)
    cnn_filters_per_width: int = 30
    cnn_output_dim: int = 30
    use_pos: bool = False
    use_crf: bool = False
    dropout_rate: float = 0.5
    tag_set: tuple[str, ...] = ()

    def __post_init__(self):
        self.cnn_filter_widths = tuple(int(w) for w in self.cnn_filter_widths)
        self.tag_set = tuple(self.tag_set)
        if self.subword == "character":
            self.subword = "char"
        if self.subword not in SUBWORD_MODES:
            raise ValueError(f"subword must be one of {SUBWORD_MODES}, got {self.subword!r}")
        dims = (self.word_emb_dim, self.hidden_size, self.subword_emb_dim,
                self.cnn_filters_per_width, self.cnn_output_dim)
        if min(dims) <= 0 or not self.cnn_filter_widths or min(self.cnn_filter_widths) <= 0:
            raise ValueError("dimensions and filter widths must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if len(set(self.tag_set)) != len(self.tag_set):
            raise ValueError("tag_set contains duplicates")

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["cnn_filter_widths"] = list(self.cnn_filter_widths)
        d["tag_set"] = list(self.tag_set)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})


@dataclass
class LstmParams:
    w_ih: Tensor  # (input, 4H), gate order i f o g
    w_hh: Tensor  # (H, 4H)
    b: Tensor  # (4H,)

    @property
    def hidden_size(self) -> int:
        return self.w_hh.shape[0]


def _cell(z: Tensor, c: Tensor) -> tuple[Tensor, Tensor]:
    h = c.shape[-1]
    gates = sigmoid(z[: 3 * h])
    i, f, o = gates[:h], gates[h : 2 * h], gates[2 * h :]
    g = tanh(z[3 * h :])
    c_next = f * c + i * g
    return o * tanh(c_next), c_next


def lstm_step(x: Tensor, h: Tensor, c: Tensor, params: LstmParams) -> tuple[Tensor, Tensor]:
    """One LSTM transition: returns ``(h', c')``."""
    if x.shape[-1] != params.w_ih.shape[0] or h.shape[-1] != params.hidden_size:
        raise ValueError(
            f"lstm_step: input {x.shape} / hidden {h.shape} do not fit weights "
            f"{params.w_ih.shape} / {params.w_hh.shape}"
        )
    z = matmul(x, params.w_ih) + matmul(h, params.w_hh) + params.b
    return _cell(z, c)


def _run_direction(xw: Tensor, params: LstmParams, order: Sequence[int]) -> list[Tensor]:
    hsize = params.hidden_size
    h = constant(np.zeros(hsize))
    c = constant(np.zeros(hsize))
    out: list[Tensor] = [None] * len(order)  # type: ignore[list-item]
    for t in order:
        z = xw[t] + matmul(h, params.w_hh)
        h, c = _cell(z, c)
        out[t] = h
    return out


def bilstm(inputs: Tensor, forward: LstmParams, backward: LstmParams) -> Tensor:
    """(n, d) inputs -> (n, 2H) outputs ``[forward_t ; backward_t]``.

    Both directions start from zero state.
    """
    if inputs.value.ndim != 2 or inputs.shape[0] == 0:
        raise ValueError(f"bilstm: expected a non-empty (n, d) sequence, got {inputs.shape}")
    n = inputs.shape[0]
    fw = _run_direction(matmul(inputs, forward.w_ih) + forward.b, forward, range(n))
    bw = _run_direction(matmul(inputs, backward.w_ih) + backward.b, backward, range(n - 1, -1, -1))
    return concat([stack(fw), stack(bw)], axis=1)


def softmax_nll(emissions: Tensor, gold: Sequence[int]) -> Tensor:
    """Mean over tokens of ``-log softmax(emissions[t])[gold[t]]``."""
    gold = np.asarray(gold, dtype=np.intp)
    n = emissions.shape[0]
    if gold.shape != (n,):
        raise ValueError(f"softmax_nll: expected {n} gold tags, got {gold.shape}")
    picked = log_softmax(emissions, axis=1)[np.arange(n), gold]
    return -picked.mean()


@dataclass
class SequenceLabeler:
    config: ModelConfig
    params: dict[str, Tensor]
    word_vocab: Vocab
    subword_vocab: Vocab | None = None
    pos_vocab: tuple[str, ...] = ()
    scheme: TagScheme = TagScheme.IO
    label: str = "entity"
    _segment: Callable[[str], list[str]] | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.config.subword != "none" and self._segment is None:
            self._segment = segmenter_for(self.config.subword)
        self._tag_index = {t: i for i, t in enumerate(self.config.tag_set)}
        if not self.config.tag_set:
            raise ValueError("model needs a non-empty tag_set")

    # -- construction ------------------------------------------------------
    @classmethod
    def build(
        cls,
        config: ModelConfig,
        corpus: Corpus,
        rng: np.random.Generator,
        embeddings: EmbeddingTable | None = None,
        min_count: int = 1,
        label: str = "entity",
    ) -> "SequenceLabeler":
        """Create vocabularies from ``corpus`` (the training split) and
        initialise every parameter from ``rng``."""
        if label not in ("entity", "pos"):
            raise ValueError("label must be 'entity' or 'pos'")
        if label == "pos" and config.use_pos:
            raise ValueError("cannot use POS features when POS is the label")
        if not config.tag_set:
            tags = corpus.tag_set() if label == "entity" else tuple(sorted(corpus.pos_vocab))
            config = ModelConfig.from_dict({**config.to_dict(), "tag_set": tags})
        word_vocab = build_vocab(corpus, min_count)
        subword_vocab = None
        if config.subword != "none":
            seg = segmenter_for(config.subword)
            subword_vocab = Vocab(u for s in corpus for t in s for u in seg(t.surface))
        pos_vocab = corpus.pos_vocab if config.use_pos else ()

        if embeddings is None:
            embeddings = EmbeddingTable(config.word_emb_dim, {}, OovPolicy.RANDOM, seed=int(rng.integers(2**31)))
        if embeddings.dim != config.word_emb_dim:
            raise ConfigMismatchError(
                f"embedding dim {embeddings.dim} != configured word_emb_dim {config.word_emb_dim}"
            )
        rows = np.array([embeddings.lookup(w) for w in word_vocab.itos])
        rows[Vocab.PAD_INDEX] = 0.0
        role = Role.PARAMETER if embeddings.trainable else Role.INPUT
        params: dict[str, Tensor] = {"word_emb": Tensor(rows, role, "word_emb")}

        in_dim = config.word_emb_dim
        if subword_vocab is not None:
            d, f = config.subword_emb_dim, config.cnn_filters_per_width
            params["subword_emb"] = init_uniform((len(subword_vocab), d), 0.0, 1.0, rng, "subword_emb")
            for w in config.cnn_filter_widths:
                bound = 1.0 / math.sqrt(w * d)
                params[f"cnn.w{w}"] = init_uniform((w * d, f), -bound, bound, rng, f"cnn.w{w}")
                params[f"cnn.b{w}"] = init_uniform((f,), -bound, bound, rng, f"cnn.b{w}")
            pooled = f * len(config.cnn_filter_widths)
            bound = 1.0 / math.sqrt(pooled)
            params["cnn.proj_w"] = init_uniform((pooled, config.cnn_output_dim), -bound, bound, rng, "cnn.proj_w")
            params["cnn.proj_b"] = init_uniform((config.cnn_output_dim,), -bound, bound, rng, "cnn.proj_b")
            in_dim += config.cnn_output_dim
        in_dim += len(pos_vocab)

        hsize = config.hidden_size
        for direction in ("fwd", "bwd"):
            params[f"lstm.{direction}.w_ih"] = init_lstm((in_dim, 4 * hsize), hsize, rng, f"lstm.{direction}.w_ih")
            params[f"lstm.{direction}.w_hh"] = init_lstm((hsize, 4 * hsize), hsize, rng, f"lstm.{direction}.w_hh")
            params[f"lstm.{direction}.b"] = init_lstm((4 * hsize,), hsize, rng, f"lstm.{direction}.b")
        ntags = len(config.tag_set)
        bound = 1.0 / math.sqrt(2 * hsize)
        params["out.w"] = init_uniform((2 * hsize, ntags), -bound, bound, rng, "out.w")
        params["out.b"] = init_uniform((ntags,), -bound, bound, rng, "out.b")
        if config.use_crf:
            params["crf.trans"] = Tensor(np.zeros((ntags + 2, ntags + 2)), Role.PARAMETER, "crf.trans")
        return cls(config, params, word_vocab, subword_vocab, tuple(pos_vocab), corpus.scheme, label)

    # -- parameters ------------------------------------------------------------
    def trainable_parameters(self) -> list[Tensor]:
        return [p for p in self.params.values() if p.role is Role.PARAMETER]

    def lstm(self, direction: str) -> LstmParams:
        p = self.params
        return LstmParams(p[f"lstm.{direction}.w_ih"], p[f"lstm.{direction}.w_hh"], p[f"lstm.{direction}.b"])

    @property
    def feature_dim(self) -> int:
        extra = self.config.cnn_output_dim if self.subword_vocab is not None else 0
        return self.config.word_emb_dim + extra + len(self.pos_vocab)

    # -- forward -------------------------------------------------------------
    def subword_ids(self, word: str) -> list[int]:
        return self.subword_vocab.lookup(self._segment(word))

    def cnn_subword_embed(self, unit_ids: Sequence[int], train: bool = False, rng=None) -> Tensor:
        """Conv -> ReLU -> max-pool per filter width, concat, dropout, linear."""
        if len(unit_ids) == 0:
            raise ValueError("cnn_subword_embed: empty unit list")
        cfg, p = self.config, self.params
        m = len(unit_ids)
        pooled = []
        for w in cfg.cnn_filter_widths:
            pad = max(0, w - m)
            left = pad // 2
            ids = [Vocab.PAD_INDEX] * left + list(unit_ids) + [Vocab.PAD_INDEX] * (pad - left)
            units = embedding_row_select(p["subword_emb"], ids)
            conv = matmul(windows(units, w), p[f"cnn.w{w}"]) + p[f"cnn.b{w}"]
            pooled.append(max_over_time(relu(conv)))
        feat = dropout(concat(pooled), cfg.dropout_rate, train, rng)
        return matmul(feat, p["cnn.proj_w"]) + p["cnn.proj_b"]

    def assemble_features(self, sentence: Sentence, train: bool = False, rng=None) -> Tensor:
        words = sentence.words
        parts = [embedding_row_select(self.params["word_emb"], self.word_vocab.lookup(words))]
        if self.subword_vocab is not None:
            parts.append(stack([self.cnn_subword_embed(self.subword_ids(w), train, rng) for w in words]))
        if self.pos_vocab:
            index = {t: i for i, t in enumerate(self.pos_vocab)}
            onehot = np.zeros((len(words), len(self.pos_vocab)))
            for row, tok in enumerate(sentence.tokens):
                if tok.pos not in index:
                    raise KeyError(f"POS tag {tok.pos!r} unknown to the model")
                onehot[row, index[tok.pos]] = 1.0
            parts.append(constant(onehot))
        return concat(parts, axis=1) if len(parts) > 1 else parts[0]

    def emissions(self, features: Tensor, train: bool = False, rng=None) -> Tensor:
        hidden = bilstm(features, self.lstm("fwd"), self.lstm("bwd"))
        hidden = dropout(hidden, self.config.dropout_rate, train, rng)
        return matmul(hidden, self.params["out.w"]) + self.params["out.b"]

    def gold_indices(self, sentence: Sentence) -> list[int]:
        tags = sentence.entity_tags if self.label == "entity" else sentence.pos_tags
        try:
            return [self._tag_index[t] for t in tags]
        except KeyError as exc:
            raise ConfigMismatchError(f"tag {exc.args[0]!r} not in model tag set") from None

    def loss(self, sentence: Sentence, train: bool = False, rng=None) -> Tensor:
        scores = self.emissions(self.assemble_features(sentence, train, rng), train, rng)
        gold = self.gold_indices(sentence)
        if self.config.use_crf:
            return crf_nll(scores, self.params["crf.trans"], gold)
        return softmax_nll(scores, gold)

    def predict_indices(self, sentence: Sentence) -> list[int]:
        scores = self.emissions(self.assemble_features(sentence)).value
        if self.config.use_crf:
            return viterbi_decode(scores, self.params["crf.trans"].value)
        return [int(i) for i in scores.argmax(axis=1)]

    def predict(self, sentence: Sentence) -> list[str]:
        return [self.config.tag_set[i] for i in self.predict_indices(sentence)]

    # -- persistence -------------------------------------------------------------
    def state(self) -> dict[str, np.ndarray]:
        return {name: t.value.copy() for name, t in self.params.items()}

    def load_state(self, state: dict[str, np.ndarray]) -> None:
        if set(state) != set(self.params):
            raise ConfigMismatchError(
                f"parameter names differ: {sorted(set(state) ^ set(self.params))}"
            )
        for name, value in state.items():
            if value.shape != self.params[name].shape:
                raise ConfigMismatchError(
                    f"parameter {name!r} has shape {value.shape}, model expects {self.params[name].shape}"
                )
            self.params[name].value[...] = value

    def meta(self) -> dict[str, Any]:
        return {
            "word_vocab": self.word_vocab.itos[2:],
            "subword_vocab": None if self.subword_vocab is None else self.subword_vocab.itos[2:],
            "pos_vocab": list(self.pos_vocab),
            "scheme": self.scheme.value,
            "label": self.label,
            "word_emb_trainable": self.params["word_emb"].role is Role.PARAMETER,
        }

    def to_bytes(self) -> bytes:
        return checkpoint.dumps(self.state(), self.config.to_dict(), self.meta())

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "SequenceLabeler":
        tensors, cfg, meta = checkpoint.loads(data)
        config = ModelConfig.from_dict(cfg)
        role = Role.PARAMETER if meta.get("word_emb_trainable", True) else Role.INPUT
        params = {
            name: Tensor(value, role if name == "word_emb" else Role.PARAMETER, name)
            for name, value in tensors.items()
        }
        sub = meta.get("subword_vocab")
        model = cls(
            config,
            params,
            Vocab(meta["word_vocab"]),
            None if sub is None else Vocab(sub),
            tuple(meta.get("pos_vocab", ())),
            TagScheme.parse(meta.get("scheme", "io")),
            meta.get("label", "entity"),
        )
        model._validate_shapes()
        return model

    @classmethod
    def load(cls, path) -> "SequenceLabeler":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())

    def _validate_shapes(self) -> None:
        cfg, p = self.config, self.params
        h, k = cfg.hidden_size, len(cfg.tag_set)
        expected = {
            "word_emb": (len(self.word_vocab), cfg.word_emb_dim),
            "lstm.fwd.w_ih": (self.feature_dim, 4 * h),
            "lstm.fwd.w_hh": (h, 4 * h),
            "out.w": (2 * h, k),
            "out.b": (k,),
        }
        if self.subword_vocab is not None:
            expected["subword_emb"] = (len(self.subword_vocab), cfg.subword_emb_dim)
            expected["cnn.proj_w"] = (cfg.cnn_filters_per_width * len(cfg.cnn_filter_widths), cfg.cnn_output_dim)
        if cfg.use_crf:
            expected["crf.trans"] = (k + 2, k + 2)
        for name, shape in expected.items():
            if name not in p:
                raise ConfigMismatchError(f"checkpoint lacks parameter {name!r} required by its config")
            if p[name].shape != shape:
                raise ConfigMismatchError(f"parameter {name!r} has shape {p[name].shape}, config implies {shape}")
