"""``devseq`` command line interface."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .analysis import nearest_neighbors, pca_project
from .conll_eval import score_corpora
from .corpus import (
    Corpus,
    Sentence,
    TagScheme,
    Token,
    corpus_stats,
    parse_conll,
    read_conll,
    split_corpus,
    write_conll,
)
from .embeddings import read_embeddings
from .model import SequenceLabeler
from .morphology import default_postpositions, lemmatize_corpus, load_postpositions
from .pipeline import TrainConfig, dropout_sweep, evaluate, load_config, parse_config, sweep_csv, train
from .segmentation import segmenter_for

log = logging.getLogger("devseq")


def _open_in(path: str | None):
    if path in (None, "-"):
        return sys.stdin
    return open(path, encoding="utf-8")


def _write_out(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _read(path: str | None, scheme: str, columns: str | None = None) -> Corpus:
    with _open_in(path) as fh:
        return parse_conll(fh, scheme, columns)


# -- subcommands -------------------------------------------------------------
def cmd_segment(args) -> int:
    split = segmenter_for(args.mode)
    for line in sys.stdin:
        sys.stdout.write(args.delimiter.join(split(line.rstrip("\n"))) + "\n")
    return 0


def cmd_lemmatize(args) -> int:
    if args.postpositions:
        with open(args.postpositions, encoding="utf-8") as fh:
            pp = load_postpositions(fh, args.min_stem)
    else:
        pp = default_postpositions()
    corpus = _read(args.input, args.scheme, args.columns)
    _write_out(args.output, write_conll(lemmatize_corpus(corpus, pp)))
    return 0


def cmd_split(args) -> int:
    corpus = _read(args.input, args.scheme, args.columns)
    ratios = tuple(float(r) for r in args.ratios.split(","))
    parts = split_corpus(corpus, ratios, args.seed)
    for name, part in zip(("train", "dev", "test"), parts):
        path = f"{args.out_prefix}.{name}.conll"
        Path(path).write_text(write_conll(part), encoding="utf-8")
        print(f"{name}: {len(part)} sentences, {corpus_stats(part).entity_tokens} entity tokens -> {path}")
    return 0


def cmd_stats(args) -> int:
    print(corpus_stats(_read(args.input, args.scheme, args.columns)).format())
    return 0


def cmd_embed_analyze(args) -> int:
    table = read_embeddings(args.vectors)
    result = nearest_neighbors(table, args.word, args.k)
    if result.truncated:
        log.warning("only %d neighbours available", len(result.items))
    for w, sim in result.items:
        print(f"{w}\t{sim:.6f}")
    if args.pca_out:
        words = [args.word] + [w for w, _ in result.items]
        proj = pca_project([table.lookup(w) for w in words], 2, words)
        Path(args.pca_out).write_text(proj.to_csv(), encoding="utf-8")
        ratios = ", ".join(f"{r:.4f}" for r in proj.explained_variance_ratio)
        log.info("explained variance ratio: %s", ratios)
    return 0


def _train_config(args) -> TrainConfig:
    cfg = load_config(args.config) if args.config else TrainConfig()
    if args.set:
        cfg = parse_config(args.set, cfg)
    if args.seed is not None:
        cfg = cfg.with_overrides(seed=args.seed)
    return cfg


def cmd_train(args) -> int:
    cfg = _train_config(args)
    train_set = read_conll(args.train, args.scheme, args.columns)
    dev_set = read_conll(args.dev, args.scheme, args.columns)
    model, history = train(cfg, train_set, dev_set)
    model.save(args.out)
    lines = "\n".join(history.to_lines()) + "\n"
    if args.history:
        Path(args.history).write_text(lines, encoding="utf-8")
    sys.stdout.write(lines)
    return 0


def _read_unlabeled(fh) -> list[list[tuple[str, str]]]:
    sents, cur = [], []
    for line in fh:
        cols = line.split()
        if not cols:
            if cur:
                sents.append(cur)
                cur = []
            continue
        cur.append((cols[0], cols[1] if len(cols) > 1 else "_"))
    if cur:
        sents.append(cur)
    return sents


def cmd_predict(args) -> int:
    model = SequenceLabeler.load(args.model)
    with _open_in(args.input) as fh:
        raw = _read_unlabeled(fh)
    out = []
    for toks in raw:
        sent = Sentence(tuple(Token(w, p, "O") for w, p in toks))
        for (w, p), tag in zip(toks, model.predict(sent)):
            out.append(f"{w} {p} {tag}\n")
        out.append("\n")
    _write_out(args.output, "".join(out))
    return 0


def cmd_eval(args) -> int:
    gold = read_conll(args.gold, args.scheme, args.columns)
    pred = read_conll(args.pred, args.scheme, args.columns)
    report = score_corpora(gold, pred)
    print(report.format_table())
    print(f"token accuracy (diagnostic): {report.token_accuracy:.2f}")
    if args.csv:
        _write_out(args.csv, report.to_csv())
    return 0


def cmd_evaluate_model(args) -> int:
    model = SequenceLabeler.load(args.model)
    corpus = read_conll(args.corpus, model.scheme.value, args.columns)
    print(evaluate(model, corpus).format_table())
    return 0


def cmd_sweep(args) -> int:
    cfg = _train_config(args)
    rates = [float(r) for r in args.rates.split(",") if r.strip()]
    rows = dropout_sweep(cfg, rates, read_conll(args.train, args.scheme), read_conll(args.dev, args.scheme))
    _write_out(args.out, sweep_csv(rows))
    return 0


# -- parser --------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="devseq", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def corpus_opts(sp, positional=True):
        if positional:
            sp.add_argument("input", nargs="?", help="CoNLL file (default stdin)")
        sp.add_argument("--scheme", choices=[s.value for s in TagScheme], default="io")
        sp.add_argument("--columns", help="surface,pos,entity column indices, e.g. 0,1,3")

    sp = sub.add_parser("segment", help="split stdin lines into characters or graphemes")
    sp.add_argument("--mode", choices=["char", "grapheme"], default="grapheme")
    sp.add_argument("--delimiter", default=" ")
    sp.set_defaults(func=cmd_segment)

    sp = sub.add_parser("lemmatize", help="strip attached post-positions")
    corpus_opts(sp)
    sp.add_argument("--postpositions", help="suffix list, one per line (default: bundled list)")
    sp.add_argument("--min-stem", type=int, default=1, help="minimum stem length in graphemes")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_lemmatize)

    sp = sub.add_parser("split", help="sentence-level train/dev/test split")
    corpus_opts(sp)
    sp.add_argument("--ratios", default="0.64,0.16,0.20")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out-prefix", required=True)
    sp.set_defaults(func=cmd_split)

    sp = sub.add_parser("stats", help="token- and span-level entity counts")
    corpus_opts(sp)
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("embed-analyze", help="nearest neighbours and PCA coordinates")
    sp.add_argument("--vectors", required=True)
    sp.add_argument("--word", required=True)
    sp.add_argument("--k", type=int, default=10)
    sp.add_argument("--pca-out")
    sp.set_defaults(func=cmd_embed_analyze)

    def train_opts(sp):
        sp.add_argument("--config", help="flat key = value config file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config entry")
        sp.add_argument("--seed", type=int, help="umbrella seed for init, shuffle, dropout and OOV")
        sp.add_argument("--train", required=True)
        sp.add_argument("--dev", required=True)
        corpus_opts(sp, positional=False)

    sp = sub.add_parser("train", help="train a sequence labeler")
    train_opts(sp)
    sp.add_argument("--out", required=True, help="checkpoint path")
    sp.add_argument("--history", help="write per-epoch key=value log here")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("predict", help="tag a file with a trained model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--in", dest="input")
    sp.add_argument("--out", dest="output")
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("eval", help="CoNLL entity-level scoring of a prediction file")
    sp.add_argument("--gold", required=True)
    sp.add_argument("--pred", required=True)
    sp.add_argument("--scheme", choices=[s.value for s in TagScheme], default="io")
    sp.add_argument("--columns")
    sp.add_argument("--csv", help="also write machine-readable CSV ('-' for stdout)")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("evaluate", help="run a checkpoint on a labelled corpus and score it")
    sp.add_argument("--model", required=True)
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--columns")
    sp.set_defaults(func=cmd_evaluate_model)

    sp = sub.add_parser("sweep-dropout", help="train once per dropout rate, report dev F1")
    train_opts(sp)
    sp.add_argument("--rates", default="0,0.1,0.2,0.3,0.4,0.5,0.6,0.7")
    sp.add_argument("--out", help="CSV output (default stdout)")
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"devseq: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
