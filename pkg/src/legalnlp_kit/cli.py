"""Command-line front end: one binary, one subcommand per pipeline stage.

Exit codes: 0 success, 1 runtime failure (missing file, bad data), 2 usage.
Every subcommand that writes an output file also writes a ``run.json``
config echo next to it, so any artifact can be reproduced from its
directory listing alone. All
randomness flows from ``--seed``; single-worker runs are bitwise
reproducible. Set LEGALNLP_LOG={error,info,debug} to control logging.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from .classify import (
    ClassifierConfig,
    evaluate,
    featurize,
    fit_classifier,
    run_demo,
)
from .cleaner import ENTITY_NAMES, CleanConfig, clean, clean_bert
from .embeddings import (
    VARIANTS,
    TrainConfig,
    load_model,
    save_model,
    save_text,
    train,
)
from .exceptions import LegalNlpError
from .phraser import (
    PhraseModel,
    apply_all,
    fit_two_pass,
    load_models,
    save_models,
)
from .query import KeyedVectors, most_similar, neighborhood_report, pca_project

logger = logging.getLogger(__name__)

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging() -> None:
    raw = os.environ.get("LEGALNLP_LOG", "").lower()
    level = _LOG_LEVELS.get(raw, logging.WARNING)
    if raw and raw not in _LOG_LEVELS:
        print(f"warning: unknown LEGALNLP_LOG value {raw!r}", file=sys.stderr)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _write_run_config(out_path: str, args: argparse.Namespace) -> None:
    """Echo the resolved config next to the output artifact."""
    config = {k: v for k, v in vars(args).items() if k != "func"}
    config["subcommand"] = args.func.__name__.removeprefix("_cmd_").replace("_", "-")
    path = Path(out_path).resolve().parent / "run.json"
    path.write_text(json.dumps(config, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _ensure_parent(path: str) -> None:
    parent = Path(path).resolve().parent
    parent.mkdir(parents=True, exist_ok=True)


def _read_token_lines(path: str, fmt: str) -> list[list[str]]:
    records = list(corpus_mod.ingest(path, fmt))
    return [r.text.split() for r in records]


def _cmd_clean(args: argparse.Namespace) -> None:
    config = CleanConfig(
        lowercase=not args.keep_case,
        mask_entities=frozenset(args.mask.split(",")) if args.mask else frozenset(ENTITY_NAMES),
    )
    cleaner = clean_bert if args.mode == "bert" else lambda text: clean(text, config)
    with open(args.infile, "r", encoding="utf-8") as src:
        lines = src.read().splitlines()
    _ensure_parent(args.out)
    with open(args.out, "w", encoding="utf-8") as dst:
        for line in lines:
            dst.write(cleaner(line) + "\n")
    _write_run_config(args.out, args)


def _cmd_train_phraser(args: argparse.Namespace) -> None:
    sentences = _read_token_lines(args.infile, args.format)
    if args.passes == 2:
        models = fit_two_pass(
            sentences,
            min_count=args.min_count,
            threshold=args.threshold,
            delimiter=args.delimiter,
        )
    else:
        models = [
            PhraseModel.fit(
                sentences,
                min_count=args.min_count,
                threshold=args.threshold,
                delimiter=args.delimiter,
            )
        ]
    _ensure_parent(args.out)
    save_models(list(models), args.out)
    if args.dump_text:
        _ensure_parent(args.dump_text)
        if len(models) == 1:
            models[0].dump_text(args.dump_text)
        else:
            for i, model in enumerate(models, start=1):
                model.dump_text(f"{args.dump_text}.pass{i}")
    _write_run_config(args.out, args)
    logger.info("saved %d phraser pass(es) to %s", len(models), args.out)


def _cmd_apply_phraser(args: argparse.Namespace) -> None:
    models = load_models(args.model)
    records = list(corpus_mod.ingest(args.infile, args.format))
    merged = [
        corpus_mod.TextRecord(
            id=r.id, text=" ".join(apply_all(models, r.text.split())), label=r.label
        )
        for r in records
    ]
    _ensure_parent(args.out)
    corpus_mod.write_records(merged, args.out, args.format)
    _write_run_config(args.out, args)


def _cmd_train_embeddings(args: argparse.Namespace) -> None:
    sentences = _read_token_lines(args.infile, args.format)
    config = TrainConfig(
        dim=args.dim,
        window=args.window,
        epochs=args.epochs,
        min_count=args.min_count,
        negative_samples=args.negative,
        initial_lr=args.lr,
        seed=args.seed,
        variant=args.variant,
        sample=args.sample,
        subword_min_n=args.subword_min_n,
        subword_max_n=args.subword_max_n,
        subword_buckets=args.subword_buckets,
        dbow_words=args.dbow_words,
    )
    model = train(sentences, config, workers=args.workers)
    _ensure_parent(args.out)
    save_model(model, args.out)
    if args.text_out:
        save_text(model, args.text_out)
    _write_run_config(args.out, args)
    logger.info(
        "trained %s on %d sentences, final mean pair loss %.6f",
        config.variant,
        len(sentences),
        model.epoch_losses[-1],
    )


def _cmd_similar(args: argparse.Namespace) -> None:
    model = load_model(args.model)
    kv = KeyedVectors.from_model(model)
    results = most_similar(kv, args.token, args.k, model=model)
    lines = [f"{token}\t{score:.6f}" for token, score in results]
    text = "\n".join(lines) + "\n"
    if args.out:
        _ensure_parent(args.out)
        Path(args.out).write_text(text, encoding="utf-8")
        _write_run_config(args.out, args)
    else:
        sys.stdout.write(text)


def _cmd_project(args: argparse.Namespace) -> None:
    model = load_model(args.model)
    kv = KeyedVectors.from_model(model)
    if args.centers:
        text = neighborhood_report(kv, args.centers.split(","), args.k)
    else:
        coords = pca_project(kv, 2)
        rows = ["token\tx\ty"]
        rows += [
            f"{token}\t{coords[i, 0]:.6f}\t{coords[i, 1]:.6f}"
            for i, token in enumerate(kv.tokens)
        ]
        text = "\n".join(rows) + "\n"
    if args.out:
        _ensure_parent(args.out)
        Path(args.out).write_text(text, encoding="utf-8")
        _write_run_config(args.out, args)
    else:
        sys.stdout.write(text)


def _cmd_classify(args: argparse.Namespace) -> None:
    records = list(corpus_mod.ingest(args.infile, "json-lines"))
    unlabeled = [r.id for r in records if r.label is None]
    if unlabeled:
        raise LegalNlpError(
            f"{len(unlabeled)} record(s) lack labels (first: {unlabeled[0]})"
        )
    model = load_model(args.embeddings)
    train_recs, test_recs = corpus_mod.train_test_split(
        records, args.train_fraction, seed=args.seed, stratify=True
    )
    train_x, oov_train = featurize(train_recs, model, infer_steps=args.infer_steps, seed=args.seed)
    test_x, oov_test = featurize(test_recs, model, infer_steps=args.infer_steps, seed=args.seed)
    if oov_train or oov_test:
        logger.warning("zero-vector docs: %d train, %d test", oov_train, oov_test)
    clf = fit_classifier(
        train_x,
        [r.label for r in train_recs],
        ClassifierConfig(lr=args.lr, epochs=args.epochs, l2=args.l2, seed=args.seed),
    )
    report = evaluate(clf, test_x, [r.label for r in test_recs])
    _ensure_parent(args.out)
    Path(args.out).write_text(report.to_json() + "\n", encoding="utf-8")
    _write_run_config(args.out, args)
    print(f"accuracy {report.accuracy:.4f} macro-F1 {report.f1_macro:.4f}")


def _cmd_demo(args: argparse.Namespace) -> None:
    result = run_demo(n=args.n, seed=args.seed)
    report = result["report"]
    text = report.to_json() + "\n"
    if args.out:
        _ensure_parent(args.out)
        Path(args.out).write_text(text, encoding="utf-8")
        _write_run_config(args.out, args)
    else:
        sys.stdout.write(text)
    print(
        f"demo: n={args.n} train={result['train_size']} test={result['test_size']} "
        f"accuracy={report.accuracy:.4f} macro-F1={report.f1_macro:.4f}",
        file=sys.stderr,
    )


def _add_io(parser: argparse.ArgumentParser, out_required: bool = True) -> None:
    parser.add_argument("--in", dest="infile", required=True, help="input file")
    parser.add_argument("--out", required=out_required, help="output file")


def _add_format(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format",
        choices=("plain-lines", "json-lines"),
        default="plain-lines",
        help="corpus file format",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="legalnlp",
        description="Brazilian legal text pipeline: cleaning, collocations, "
        "embeddings, queries, and a classification demo.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("clean", help="mask entities and normalize raw text")
    _add_io(p)
    p.add_argument("--mode", choices=("word", "bert"), default="word")
    p.add_argument("--keep-case", action="store_true", help="skip lowercasing")
    p.add_argument("--mask", default="", help="comma-separated entity classes (default: all)")
    p.set_defaults(func=_cmd_clean)

    p = sub.add_parser("train-phraser", help="fit collocation models on a token corpus")
    _add_io(p)
    _add_format(p)
    p.add_argument("--passes", type=int, choices=(1, 2), default=2)
    p.add_argument("--min-count", type=int, default=5)
    p.add_argument("--threshold", type=float, default=10.0)
    p.add_argument("--delimiter", default="_")
    p.add_argument("--dump-text", default="", help="also dump counts as text here")
    p.set_defaults(func=_cmd_train_phraser)

    p = sub.add_parser("apply-phraser", help="merge collocations in a corpus")
    _add_io(p)
    _add_format(p)
    p.add_argument("--model", required=True, help="phraser model file")
    p.set_defaults(func=_cmd_apply_phraser)

    p = sub.add_parser("train-embeddings", help="train word/document embeddings")
    _add_io(p)
    _add_format(p)
    p.add_argument("--variant", choices=VARIANTS, default="w2v-sg")
    p.add_argument("--dim", type=int, default=100)
    p.add_argument("--window", type=int, default=15)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--min-count", type=int, default=50)
    p.add_argument("--negative", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.025)
    p.add_argument("--sample", type=float, default=0.0)
    p.add_argument("--subword-min-n", type=int, default=3)
    p.add_argument("--subword-max-n", type=int, default=6)
    p.add_argument("--subword-buckets", type=int, default=2_000_000)
    p.add_argument("--dbow-words", action="store_true")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--text-out", default="", help="also save text-format vectors here")
    p.set_defaults(func=_cmd_train_embeddings)

    p = sub.add_parser("similar", help="top-k nearest tokens by cosine")
    p.add_argument("--model", required=True)
    p.add_argument("--token", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out", default="", help="write TSV here instead of stdout")
    p.set_defaults(func=_cmd_similar)

    p = sub.add_parser("project", help="PCA 2D projection / neighborhood report")
    p.add_argument("--model", required=True)
    p.add_argument("--centers", default="", help="comma-separated center tokens")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out", default="", help="write TSV here instead of stdout")
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("classify", help="train/evaluate a classifier on labeled docs")
    _add_io(p)
    p.add_argument("--embeddings", required=True, help="embedding model file")
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--infer-steps", type=int, default=50)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("demo", help="synthetic end-to-end classification demo")
    p.add_argument("--n", type=int, default=1200)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", default="", help="write report JSON here instead of stdout")
    p.set_defaults(func=_cmd_demo)

    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (LegalNlpError, ValueError, KeyError, OSError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        return 1
    except np.linalg.LinAlgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
