"""Training loop, early stopping, evaluation and the dropout sweep.

Training is sentence-level with batch size 1: each epoch reshuffles the
training sentences with a seeded generator and takes one Adam step per
sentence. After every epoch the dev loss is measured in eval mode; the
parameters from the epoch with the lowest dev loss are returned.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Callable, Iterable, Sequence, TextIO

import numpy as np

from .autodiff import backward
from .conll_eval import ScoreReport, score
from .corpus import Corpus
from .embeddings import OovPolicy, read_embeddings
from .model import ConfigMismatchError, ModelConfig, SequenceLabeler
from .optim import Adam, derive_seeds

__all__ = [
    "TrainConfig",
    "EpochRecord",
    "TrainHistory",
    "train",
    "evaluate",
    "dev_metrics",
    "dropout_sweep",
    "load_config",
    "parse_config",
    "IMPROVEMENT_TOL",
]

log = logging.getLogger(__name__)

IMPROVEMENT_TOL = 1e-12
SEED_NAMES = ("init", "shuffle", "dropout", "oov")


@dataclass
class TrainConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    lr: float = 0.001
    weight_decay: float = 1e-6
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 1
    max_epochs: int = 100
    patience: int = 10
    seed: int = 0
    embeddings: str | None = None
    embeddings_trainable: bool = True
    oov_policy: str = "random"
    min_count: int = 1
    label: str = "entity"

    def __post_init__(self):
        if self.batch_size != 1:
            raise ValueError("only batch_size = 1 is supported")
        if not 0 < self.patience < self.max_epochs:
            raise ValueError("need 0 < patience < max_epochs")
        if self.label not in ("entity", "pos"):
            raise ValueError("label must be 'entity' or 'pos'")
        OovPolicy(self.oov_policy)

    def seeds(self) -> dict[str, int]:
        return derive_seeds(self.seed, SEED_NAMES)

    def to_flat(self) -> dict[str, Any]:
        flat = {k: v for k, v in asdict(self).items() if k != "model"}
        flat.update(self.model.to_dict())
        flat.pop("tag_set")
        return flat

    def with_overrides(self, **overrides) -> "TrainConfig":
        flat = self.to_flat()
        flat.update(overrides)
        return _from_flat(flat)


def _from_flat(flat: dict[str, Any]) -> TrainConfig:
    model_keys = {f.name for f in fields(ModelConfig)}
    train_keys = {f.name for f in fields(TrainConfig)} - {"model"}
    unknown = set(flat) - model_keys - train_keys
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    model = ModelConfig(**{k: v for k, v in flat.items() if k in model_keys})
    return TrainConfig(model=model, **{k: v for k, v in flat.items() if k in train_keys})


def _coerce(raw: str, kind: type | str) -> Any:
    kind = str(kind)
    raw = raw.strip()
    if "bool" in kind:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if "tuple" in kind:
        return tuple(int(p) for p in raw.strip("[]()").replace(" ", "").split(",") if p)
    if raw.lower() in ("none", "") and "None" in kind:
        return None
    if "int" in kind and "float" not in kind:
        return int(raw)
    if "float" in kind:
        return float(raw)
    return raw.strip("\"'")


def parse_config(stream: TextIO | Iterable[str], base: TrainConfig | None = None) -> TrainConfig:
    """Read a flat ``key = value`` document (``#`` comments) over ``base``."""
    types = {f.name: f.type for f in fields(ModelConfig)}
    types.update({f.name: f.type for f in fields(TrainConfig) if f.name != "model"})
    flat = (base or TrainConfig()).to_flat()
    for lineno, line in enumerate(stream, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in types:
            raise ValueError(f"config line {lineno}: unknown or malformed entry {line!r}")
        flat[key] = _coerce(value, types[key])
    return _from_flat(flat)


def load_config(path) -> TrainConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    dev_loss: float
    dev_f1: float

    def log_line(self) -> str:
        return (
            f"epoch={self.epoch} train_loss={self.train_loss!r} "
            f"dev_loss={self.dev_loss!r} dev_f1={self.dev_f1!r}"
        )


@dataclass
class TrainHistory:
    epochs: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    stopped_epoch: int = 0

    @property
    def best(self) -> EpochRecord:
        return self.epochs[self.best_epoch - 1]

    def to_lines(self) -> list[str]:
        lines = [r.log_line() for r in self.epochs]
        lines.append(f"best_epoch={self.best_epoch} stopped_epoch={self.stopped_epoch}")
        return lines


Evaluator = Callable[[SequenceLabeler, Corpus], tuple[float, float]]


def _metric(model: SequenceLabeler, corpus: Corpus) -> float:
    if model.label == "pos":
        gold = [s.pos_tags for s in corpus]
        pred = [model.predict(s) for s in corpus]
        total = sum(len(g) for g in gold)
        right = sum(a == b for g, p in zip(gold, pred) for a, b in zip(g, p))
        return 100.0 * right / total if total else 0.0
    return evaluate(model, corpus).f1


def dev_metrics(model: SequenceLabeler, corpus: Corpus) -> tuple[float, float]:
    """Mean eval-mode loss over sentences and the entity F1 (or POS accuracy)."""
    losses = [float(model.loss(s).value) for s in corpus]
    return float(np.mean(losses)), _metric(model, corpus)


def _check_compatible(train_set: Corpus, dev_set: Corpus, label: str) -> None:
    if len(dev_set) == 0:
        raise ValueError("dev corpus is empty")
    if len(train_set) == 0:
        raise ValueError("training corpus is empty")
    if label == "entity":
        if train_set.scheme is not dev_set.scheme:
            raise ConfigMismatchError("train and dev corpora use different tag schemes")
        extra = dev_set.entity_types - train_set.entity_types
        if extra:
            raise ConfigMismatchError(f"dev has entity types unseen in train: {sorted(extra)}")
    else:
        extra = set(dev_set.pos_vocab) - set(train_set.pos_vocab)
        if extra:
            raise ConfigMismatchError(f"dev has POS tags unseen in train: {sorted(extra)}")


def train(
    config: TrainConfig,
    train_set: Corpus,
    dev_set: Corpus,
    evaluator: Evaluator | None = None,
    embeddings=None,
) -> tuple[SequenceLabeler, TrainHistory]:
    """Train until max_epochs or until dev loss fails to improve for ``patience`` epochs.

    ``evaluator(model, dev) -> (dev_loss, dev_f1)`` replaces the default
    dev measurement (useful for tests). The returned model holds the
    parameters of the best epoch.
    """
    _check_compatible(train_set, dev_set, config.label)
    seeds = config.seeds()
    if embeddings is None and config.embeddings:
        embeddings = read_embeddings(
            config.embeddings,
            config.model.word_emb_dim,
            oov_policy=config.oov_policy,
            seed=seeds["oov"],
            trainable=config.embeddings_trainable,
        )
    if embeddings is None and not config.embeddings_trainable:
        raise ValueError("frozen embeddings need an embeddings file")

    model = SequenceLabeler.build(
        config.model, train_set, np.random.default_rng(seeds["init"]), embeddings, config.min_count, config.label
    )
    optimizer = Adam(
        model.trainable_parameters(),
        lr=config.lr,
        betas=(config.beta1, config.beta2),
        eps=config.adam_eps,
        weight_decay=config.weight_decay,
    )
    shuffle_rng = np.random.default_rng(seeds["shuffle"])
    dropout_rng = np.random.default_rng(seeds["dropout"])
    evaluator = evaluator or dev_metrics

    history = TrainHistory()
    best_loss = np.inf
    best_state = model.state()
    stale = 0
    for epoch in range(1, config.max_epochs + 1):
        total = 0.0
        for idx in shuffle_rng.permutation(len(train_set)):
            loss = model.loss(train_set.sentences[idx], train=True, rng=dropout_rng)
            backward(loss)
            optimizer.step()
            total += float(loss.value)
        dev_loss, dev_f1 = evaluator(model, dev_set)
        record = EpochRecord(epoch, total / len(train_set), float(dev_loss), float(dev_f1))
        history.epochs.append(record)
        log.info(record.log_line())
        history.stopped_epoch = epoch
        if dev_loss < best_loss - IMPROVEMENT_TOL:
            best_loss = dev_loss
            history.best_epoch = epoch
            best_state = model.state()
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                log.info("early stop: dev loss has not improved for %d epochs", stale)
                break
    model.load_state(best_state)
    return model, history


def evaluate(model, corpus: Corpus) -> ScoreReport:
    """Entity-level scores of ``model.predict`` on ``corpus`` (eval mode)."""
    tag_set = set(model.config.tag_set)
    if getattr(model, "scheme", corpus.scheme) is not corpus.scheme:
        raise ConfigMismatchError("model and corpus use different tag schemes")
    unknown = set(corpus.tag_set()) - tag_set
    if unknown:
        raise ConfigMismatchError(f"corpus tags unknown to the model: {sorted(unknown)}")
    gold = [s.entity_tags for s in corpus]
    pred = [model.predict(s) for s in corpus]
    return score(gold, pred, corpus.scheme)


def dropout_sweep(
    config: TrainConfig,
    rates: Sequence[float],
    train_set: Corpus,
    dev_set: Corpus,
) -> list[tuple[float, float]]:
    """Train once per dropout rate (shared seeds); return ``(rate, dev F1 at best epoch)``."""
    unique = list(dict.fromkeys(float(r) for r in rates))
    if len(unique) != len(rates):
        log.warning("duplicate dropout rates removed: %s", list(rates))
    for r in unique:
        if not 0.0 <= r < 1.0:
            raise ValueError(f"dropout rate {r} outside [0, 1)")
    rows = []
    for r in unique:
        _, history = train(config.with_overrides(dropout_rate=r), train_set, dev_set)
        rows.append((r, history.best.dev_f1))
        log.info("rate=%r f1=%r", r, history.best.dev_f1)
    return rows


def sweep_csv(rows: Sequence[tuple[float, float]]) -> str:
    return "rate,f1\n" + "".join(f"{r:g},{f:.2f}\n" for r, f in rows)
