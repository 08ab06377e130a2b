import io
from types import SimpleNamespace

import numpy as np
import pytest

from devseq.corpus import Corpus, Token, parse_conll
from devseq.model import ConfigMismatchError, ModelConfig
from devseq.pipeline import TrainConfig, dropout_sweep, evaluate, parse_config, sweep_csv, train

from gradcases import SMALL_DIMS


def small_config(**overrides):
    base = TrainConfig(model=ModelConfig(**SMALL_DIMS), max_epochs=3, patience=2, lr=0.01)
    return base.with_overrides(**overrides) if overrides else base


def constant_evaluator(model, corpus):
    return 1.0, 0.0


def test_early_stop_with_constant_dev_loss(toy_corpus):
    cfg = small_config(max_epochs=30, patience=10)
    snapshots = []

    def evaluator(model, corpus):
        snapshots.append(model.state())
        return 1.0, 0.0

    model, history = train(cfg, toy_corpus, toy_corpus, evaluator=evaluator)
    assert history.stopped_epoch == 11 and len(history.epochs) == 11
    assert history.best_epoch == 1
    for name, value in model.state().items():
        assert np.array_equal(value, snapshots[0][name])
    assert not all(np.array_equal(v, snapshots[-1][k]) for k, v in model.state().items())


def test_never_stops_before_patience_plus_one(toy_corpus):
    losses = iter([5.0, 4.0, 4.0, 4.0, 3.0, 3.0, 3.0, 3.0])
    cfg = small_config(max_epochs=8, patience=3)
    _, history = train(cfg, toy_corpus, toy_corpus, evaluator=lambda m, c: (next(losses), 0.0))
    assert history.best_epoch == 5 and history.stopped_epoch == 8
    assert history.best.dev_loss == 3.0


def test_determinism(toy_corpus):
    cfg = small_config(subword="grapheme", use_crf=True, max_epochs=2, patience=1)
    m1, h1 = train(cfg, toy_corpus, toy_corpus)
    m2, h2 = train(cfg, toy_corpus, toy_corpus)
    assert m1.to_bytes() == m2.to_bytes()
    assert h1.to_lines() == h2.to_lines()
    m3, _ = train(cfg.with_overrides(seed=1), toy_corpus, toy_corpus)
    assert m3.to_bytes() != m1.to_bytes()


def test_history_log_lines(toy_corpus):
    _, h = train(small_config(max_epochs=2, patience=1), toy_corpus, toy_corpus)
    line = h.to_lines()[0]
    fields = dict(kv.split("=") for kv in line.split())
    assert set(fields) == {"epoch", "train_loss", "dev_loss", "dev_f1"}
    assert h.to_lines()[-1].startswith("best_epoch=")


def test_train_rejects_unknown_dev_types(toy_corpus):
    dev = parse_conll("a N I-MISC\n", "io")
    with pytest.raises(ConfigMismatchError):
        train(small_config(), toy_corpus, dev)
    with pytest.raises(ValueError):
        train(small_config(), toy_corpus, parse_conll("", "io"))


def test_evaluate_tag_mismatch(toy_corpus):
    model, _ = train(small_config(max_epochs=2, patience=1), toy_corpus, toy_corpus)
    other = parse_conll("a N I-MISC\n", "io")
    with pytest.raises(ConfigMismatchError):
        evaluate(model, other)
    iob = parse_conll("a N B-PER\n", "iob")
    with pytest.raises(ConfigMismatchError):
        evaluate(model, iob)


def test_evaluate_stub_model_scores_zero(toy_corpus):
    stub = SimpleNamespace(
        config=SimpleNamespace(tag_set=toy_corpus.tag_set()),
        scheme=toy_corpus.scheme,
        predict=lambda s: ["O"] * len(s),
    )
    report = evaluate(stub, toy_corpus)
    assert report.f1 == 0.0 and report.overall.tp == 0


def test_sweep_dedups(toy_corpus, caplog):
    rows = dropout_sweep(small_config(max_epochs=2, patience=1), [0.0, 0.5, 0.5], toy_corpus, toy_corpus)
    assert [r for r, _ in rows] == [0.0, 0.5]
    assert "duplicate" in caplog.text
    csv = sweep_csv(rows).splitlines()
    assert csv[0] == "rate,f1" and len(csv) == 3
    with pytest.raises(ValueError):
        dropout_sweep(small_config(), [1.0], toy_corpus, toy_corpus)


def test_config_parsing():
    cfg = parse_config(io.StringIO("# table defaults\nlr = 0.01\nsubword = grapheme\nuse_crf = true\n"
                                   "cnn_filter_widths = 3,4\nembeddings = none\n"))
    assert cfg.lr == 0.01 and cfg.model.subword == "grapheme" and cfg.model.use_crf
    assert cfg.model.cnn_filter_widths == (3, 4) and cfg.embeddings is None
    assert cfg.weight_decay == 1e-6 and cfg.patience == 10 and cfg.max_epochs == 100
    with pytest.raises(ValueError, match="line 1"):
        parse_config(io.StringIO("learning_rate = 1\n"))
    with pytest.raises(ValueError):
        parse_config(io.StringIO("use_crf = maybe\n"))
    with pytest.raises(ValueError):
        TrainConfig(patience=100)
    with pytest.raises(ValueError):
        TrainConfig(batch_size=2)


def test_default_hyperparameters():
    cfg = TrainConfig()
    assert (cfg.lr, cfg.weight_decay, cfg.batch_size, cfg.max_epochs, cfg.patience) == (0.001, 1e-6, 1, 100, 10)
    m = cfg.model
    assert (m.word_emb_dim, m.hidden_size, m.dropout_rate, m.cnn_filter_widths) == (300, 100, 0.5, (3, 4, 5))


def test_seeds_are_derived_from_umbrella():
    assert TrainConfig(seed=1).seeds() == TrainConfig(seed=1).seeds()
    assert TrainConfig(seed=1).seeds() != TrainConfig(seed=2).seeds()


def test_pos_label_mode(toy_corpus):
    model, history = train(small_config(label="pos", max_epochs=2, patience=1), toy_corpus, toy_corpus)
    assert set(model.config.tag_set) == set(toy_corpus.pos_vocab)
    s = toy_corpus.sentences[0]
    assert len(model.predict(s)) == len(s)
    assert 0.0 <= history.best.dev_f1 <= 100.0


def test_frozen_vs_trainable_embeddings(toy_corpus, tmp_path):
    vocab = sorted({t.surface for s in toy_corpus for t in s})
    path = tmp_path / "vec.txt"
    rng = np.random.default_rng(0)
    path.write_text("".join(f"{w} " + " ".join(f"{x:.6f}" for x in rng.normal(size=4)) + "\n" for w in vocab),
                    encoding="utf-8")
    frozen = small_config(embeddings=str(path), embeddings_trainable=False, max_epochs=2, patience=1)
    m_frozen, _ = train(frozen, toy_corpus, toy_corpus)
    m_train, _ = train(frozen.with_overrides(embeddings_trainable=True), toy_corpus, toy_corpus)
    w = vocab[0]
    row = m_frozen.word_vocab[w]
    original = np.array([float(x) for x in path.read_text(encoding="utf-8").splitlines()[0].split()[1:]])
    assert np.array_equal(m_frozen.params["word_emb"].value[row], original)
    assert not np.array_equal(m_train.params["word_emb"].value[m_train.word_vocab[w]], original)
