"""Command-line pipeline: train, augment, parse, selftrain, evaluate, experiment.

Every command logs its fully-resolved configuration and takes all randomness
from explicit seeds, so identical inputs + flags reproduce identical outputs.
Flags may also be supplied through a flat KEY=VALUE config file
(``--config``); command-line values win.  Exit codes: 0 success, 1 runtime
failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import statistics
import sys
from pathlib import Path

import numpy as np

from .augment import AugmentConfig, augment_corpus
from .evaluation import EvalConfig, score_corpus
from .scorer import ScorerConfig, ScorerModel, init_model
from .selftrain import SelfTrainConfig, self_train
from .trainer import TrainConfig, predict_corpus, train
from .treebank import (build_vocabulary, normalize_corpus, read_raw_sentences,
                       read_treebank, write_treebank)
from .trees import Corpus

log = logging.getLogger("fsparse")


class UsageError(Exception):
    """Bad arguments or missing inputs; exits with status 2."""


def _require_file(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} not found: {path}")
    return p


def _read_config_file(path: str) -> dict[str, str]:
    values = {}
    with _require_file(path, "config file").open("r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}: line {line_number}: expected KEY=VALUE")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Pull --config out of argv and turn its entries into parser defaults."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return argv
    values = _read_config_file(known.config)
    valid = {action.dest for action in parser._actions}
    for key in values:
        if key not in valid:
            raise UsageError(f"{known.config}: unknown configuration key {key!r}")
    typed = {}
    for key, raw in values.items():
        action = next(a for a in parser._actions if a.dest == key)
        value = action.type(raw) if action.type is not None else raw
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            value = raw.lower() in ("1", "true", "yes", "on")
        elif isinstance(action, argparse._AppendAction):
            value = [value]
        typed[key] = value
    parser.set_defaults(**typed)
    return argv


def _log_resolved(args: argparse.Namespace) -> None:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    log.info("resolved config: %s", resolved)


def _add_scorer_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--encoder", choices=("bilstm", "embedding"), default="bilstm",
                        help="span encoder (default: bilstm)")
    parser.add_argument("--emb-dim", type=int, default=100)
    parser.add_argument("--hidden-dim", type=int, default=200)
    parser.add_argument("--ff-dim", type=int, default=250)
    parser.add_argument("--dropout", type=float, default=0.0)
    parser.add_argument("--max-positions", type=int, default=512)


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--epochs", type=int, default=50)
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--patience", type=int, default=5)
    parser.add_argument("--eval-every", type=int, default=1)
    parser.add_argument("--max-train-len", type=int, default=60,
                        help="skip longer training sentences")


def _scorer_config(args: argparse.Namespace, seed: int) -> ScorerConfig:
    return ScorerConfig(emb_dim=args.emb_dim, encoder=args.encoder,
                        hidden_dim=args.hidden_dim, ff_dim=args.ff_dim,
                        dropout=args.dropout, max_positions=args.max_positions,
                        seed=seed)


def _train_config(args: argparse.Namespace, seed: int) -> TrainConfig:
    return TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                       learning_rate=args.lr, patience=args.patience,
                       eval_every=args.eval_every,
                       max_train_len=args.max_train_len, seed=seed)


def _build_vocab(corpus: Corpus, cap: int, extra_sentences=()):
    if cap <= 0:  # keep every token
        tokens = {t for tree in corpus for t in tree.sentence.tokens}
        tokens.update(t for s in extra_sentences for t in s.tokens)
        cap = len(tokens)
    return build_vocabulary(corpus, cap, extra_sentences)


def _parse_split(spec: str) -> tuple[int, int]:
    try:
        a, b = spec.split("/")
        a, b = int(a), int(b)
    except ValueError:
        raise UsageError(f"--split expects A/B with integers, got {spec!r}") from None
    if a < 1 or b < 1:
        raise UsageError("--split sizes must be >= 1")
    return a, b


def cmd_train(args: argparse.Namespace) -> int:
    corpus = read_treebank(_require_file(args.train, "train file"))
    if args.take_first is not None:
        if args.take_first > len(corpus):
            raise UsageError(f"--take-first {args.take_first} but the file has "
                             f"only {len(corpus)} trees")
        corpus = corpus[:args.take_first]
    if args.split:
        n_train, n_dev = _parse_split(args.split)
        if n_train + n_dev > len(corpus):
            raise UsageError(f"--split {args.split} needs {n_train + n_dev} trees, "
                             f"have {len(corpus)}")
        train_corpus = corpus[:n_train]
        dev_corpus = corpus[n_train:n_train + n_dev]
    elif args.dev:
        train_corpus = corpus
        dev_corpus = read_treebank(_require_file(args.dev, "dev file"))
    else:
        raise UsageError("provide --dev FILE or --split A/B")

    train_corpus = normalize_corpus(train_corpus)
    dev_corpus = normalize_corpus(dev_corpus)
    vocab = _build_vocab(train_corpus, args.vocab_size)
    log.info("vocabulary: %d entries (cap %s)", len(vocab),
             args.vocab_size if args.vocab_size > 0 else "none")
    pretrained = None
    if args.pretrained:
        pretrained = str(_require_file(args.pretrained, "pretrained embedding file"))
    model = init_model(_scorer_config(args, args.seed), vocab, pretrained)
    model, report = train(model, train_corpus, dev_corpus, _train_config(args, args.seed))
    model.save(args.model_out)
    log.info("best dev F1 %.2f at epoch %d; model written to %s",
             report.best_dev_f1, report.best_epoch, args.model_out)
    if args.metrics_out:
        Path(args.metrics_out).write_text(report.to_csv(), encoding="utf-8")
    print(f"best_dev_f1={report.best_dev_f1:.4f} best_epoch={report.best_epoch}")
    return 0


def cmd_augment(args: argparse.Namespace) -> int:
    base = normalize_corpus(read_treebank(_require_file(args.input, "input treebank")))
    if args.size < len(base):
        raise UsageError(f"--size {args.size} is smaller than the input ({len(base)} trees)")
    config = AugmentConfig(target_size=args.size, seed=args.seed,
                           source_policy=args.source_policy,
                           max_sentence_len=args.max_sentence_len)
    grown = augment_corpus(base, config)
    write_treebank(grown, args.output)
    log.info("wrote %d trees (%d generated) to %s",
             len(grown), len(grown) - len(base), args.output)
    return 0


def cmd_parse(args: argparse.Namespace) -> int:
    model = ScorerModel.load(_require_file(args.model, "model file"))
    sentences = read_raw_sentences(_require_file(args.input, "sentence file"))
    predicted = predict_corpus(model, sentences)
    write_treebank(predicted, args.output)
    log.info("parsed %d sentences to %s", len(sentences), args.output)
    return 0


def cmd_selftrain(args: argparse.Namespace) -> int:
    model = ScorerModel.load(_require_file(args.model, "model file"))
    if args.steps > 0 and not args.pool:
        raise UsageError("self-training with --steps >= 1 needs at least one --pool file")
    pool = []
    for path in args.pool or []:
        pool.extend(read_raw_sentences(_require_file(path, "pool file")))
    dev_pool = None
    if args.dev_pool:
        dev_pool = read_raw_sentences(_require_file(args.dev_pool, "dev pool file"))
    config = SelfTrainConfig(steps=args.steps, train=_train_config(args, args.seed),
                             dev_fraction=args.dev_fraction,
                             from_scratch=not args.warm_start, seed=args.seed,
                             dump_dir=args.dump_dir)
    model, reports = self_train(model, pool, dev_pool, config)
    model.save(args.model_out)
    if args.metrics_out:
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(["step", "teacher_fit_f1", "best_dev_f1", "best_epoch"])
        for r in reports:
            writer.writerow([r.step, f"{r.teacher_fit_f1:.4f}",
                             f"{r.train_report.best_dev_f1:.4f}",
                             r.train_report.best_epoch])
        Path(args.metrics_out).write_text(out.getvalue(), encoding="utf-8")
    for r in reports:
        print(f"step={r.step} teacher_fit_f1={r.teacher_fit_f1:.4f}")
    log.info("self-trained model written to %s", args.model_out)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    gold = read_treebank(_require_file(args.gold, "gold file"))
    predicted = read_treebank(_require_file(args.predicted, "predicted file"))
    config = EvalConfig(mode=args.mode, exclude_trivial=args.exclude_trivial,
                        max_len=args.max_len)
    result = score_corpus(gold, predicted, config)
    print(result.report())
    if args.csv_out:
        Path(args.csv_out).write_text(result.to_csv(), encoding="utf-8")
    return 0


def cmd_experiment(args: argparse.Namespace) -> int:
    data = normalize_corpus(read_treebank(_require_file(args.data, "data file")))
    test = read_treebank(_require_file(args.test, "test file"))
    pool = None
    if args.pool:
        pool = read_raw_sentences(_require_file(args.pool, "pool file"))

    budgets = _int_list(args.budgets, "budgets")
    augment_flags = _int_list(args.augment, "augment")
    st_steps_list = _int_list(args.st_steps, "st_steps")
    vocab_sizes = _int_list(args.vocab_sizes, "vocab_sizes")
    seeds = _int_list(args.seeds, "seeds")
    if any(f not in (0, 1) for f in augment_flags):
        raise UsageError("augment entries must be 0 or 1")
    if max(st_steps_list, default=0) > 0 and pool is None:
        raise UsageError("st_steps > 0 needs --pool")

    rows = []
    for budget in budgets:
        for aug_on in augment_flags:
            for steps in st_steps_list:
                for vocab_size in vocab_sizes:
                    f1s = [
                        _experiment_cell(data, test, pool, budget, aug_on, steps,
                                         vocab_size, seed, args)
                        for seed in seeds
                    ]
                    mean = statistics.fmean(f1s)
                    std = statistics.pstdev(f1s) if len(f1s) > 1 else 0.0
                    rows.append((budget, aug_on, steps, vocab_size, len(f1s), mean, std))
                    log.info("cell budget=%d aug=%d st=%d vocab=%d: F1 %.2f +- %.2f",
                             budget, aug_on, steps, vocab_size, mean, std)
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["budget", "augment", "st_steps", "vocab_size",
                     "n_seeds", "mean_f1", "std_f1"])
    for row in sorted(rows):
        writer.writerow([*row[:5], f"{row[5]:.4f}", f"{row[6]:.4f}"])
    text = out.getvalue()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    print(text, end="")
    return 0


def _int_list(raw: str, key: str) -> list[int]:
    try:
        return [int(part) for part in str(raw).split(",") if part.strip() != ""]
    except ValueError:
        raise UsageError(f"{key}: expected comma-separated integers, got {raw!r}") from None


def _experiment_cell(data: Corpus, test: Corpus, pool, budget: int, aug_on: int,
                     steps: int, vocab_size: int, seed: int,
                     args: argparse.Namespace) -> float:
    if budget > len(data):
        raise UsageError(f"budget {budget} exceeds the data file ({len(data)} trees)")
    dev_size = args.dev_size
    if dev_size >= budget:
        raise UsageError(f"dev_size {dev_size} must be smaller than budget {budget}")
    labeled = data[:budget]
    train_corpus = labeled[:budget - dev_size]
    dev_corpus = labeled[budget - dev_size:]
    seq = np.random.SeedSequence([seed, budget, aug_on, steps, vocab_size])
    aug_seed, model_seed, train_seed, st_seed = (int(s) for s in seq.generate_state(4))
    if aug_on:
        train_corpus = augment_corpus(
            train_corpus, AugmentConfig(target_size=args.augment_size, seed=aug_seed,
                                        max_sentence_len=args.max_sentence_len))
    # unlabeled pool text counts toward the vocabulary (no trees involved)
    vocab = _build_vocab(train_corpus, vocab_size, pool or ())
    model = init_model(_scorer_config(args, model_seed), vocab)
    model, _ = train(model, train_corpus, dev_corpus, _train_config(args, train_seed))
    if steps > 0:
        st_config = SelfTrainConfig(steps=steps, train=_train_config(args, train_seed),
                                    seed=st_seed)
        model, _ = self_train(model, pool, None, st_config)
    predicted = predict_corpus(model, test.sentences)
    return score_corpus(test, predicted, EvalConfig()).f1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fsparse",
        description="Few-shot constituency parsing: train a span-scoring parser "
                    "on a handful of trees, augment by subtree substitution, "
                    "self-train on raw sentences, and evaluate bracketing F1.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="errors only")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a parser on a labeled treebank")
    p.add_argument("train", help="treebank file (one bracketed tree per line)")
    p.add_argument("--dev", help="dev treebank for model selection")
    p.add_argument("--split", help="carve train/dev from the train file, e.g. 10/5")
    p.add_argument("--take-first", type=int,
                   help="use only the first N trees of the train file")
    p.add_argument("--vocab-size", type=int, default=0,
                   help="keep the N most frequent tokens (0 = keep all)")
    p.add_argument("--pretrained", help="text embedding file to initialize from")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="flat KEY=VALUE config file (flags override)")
    p.add_argument("--model-out", required=True)
    p.add_argument("--metrics-out", help="write per-epoch loss/dev-F1 CSV here")
    _add_scorer_flags(p)
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("augment", help="grow a treebank by subtree substitution")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--size", type=int, required=True, help="desired total tree count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--source-policy", choices=("original", "growing"), default="original")
    p.add_argument("--max-sentence-len", type=int, default=100)
    p.add_argument("--config", help="flat KEY=VALUE config file (flags override)")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("parse", help="parse raw sentences with a trained model")
    p.add_argument("model")
    p.add_argument("input", help="one whitespace-tokenized sentence per line")
    p.add_argument("output", help="treebank file to write")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("selftrain", help="iterative self-training on raw sentences")
    p.add_argument("--model", required=True, help="initial model file")
    p.add_argument("--pool", action="append", help="raw-sentence pool file (repeatable)")
    p.add_argument("--dev-pool", help="raw sentences for model selection "
                                      "(default: held-out pool slice)")
    p.add_argument("--steps", type=int, default=5)
    p.add_argument("--dev-fraction", type=float, default=0.1)
    p.add_argument("--warm-start", action="store_true",
                   help="continue from the previous step's parameters")
    p.add_argument("--dump-dir", help="write per-step predicted treebanks here")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="flat KEY=VALUE config file (flags override)")
    p.add_argument("--model-out", required=True)
    p.add_argument("--metrics-out")
    _add_train_flags(p)
    p.set_defaults(func=cmd_selftrain)

    p = sub.add_parser("evaluate", help="unlabeled bracketing F1 of two treebanks")
    p.add_argument("gold")
    p.add_argument("predicted")
    p.add_argument("--mode", choices=("corpus", "sentence"), default="corpus")
    p.add_argument("--exclude-trivial", action="store_true",
                   help="do not count the root bracket")
    p.add_argument("--max-len", type=int, help="evaluate only sentences up to N tokens")
    p.add_argument("--csv-out", help="write per-sentence counts CSV here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("experiment", help="run a (budget x augment x self-train x "
                                          "vocab) x seeds grid")
    p.add_argument("--config", help="flat KEY=VALUE config file (flags override)")
    p.add_argument("--data", required=False, help="labeled treebank to carve budgets from")
    p.add_argument("--test", required=False, help="gold test treebank")
    p.add_argument("--pool", help="raw sentences for self-training")
    p.add_argument("--budgets", default="15")
    p.add_argument("--dev-size", type=int, default=5)
    p.add_argument("--augment", default="0,1")
    p.add_argument("--augment-size", type=int, default=10000)
    p.add_argument("--max-sentence-len", type=int, default=100)
    p.add_argument("--st-steps", default="0")
    p.add_argument("--vocab-sizes", default="0")
    p.add_argument("--seeds", default="1,2,3,4,5")
    p.add_argument("--out", help="write the results CSV here")
    _add_scorer_flags(p)
    _add_train_flags(p)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        # config files supply defaults for the subcommand's parser
        choices = parser._subparsers._group_actions[0].choices
        command = next((a for a in argv if a in choices), None)
        if command in ("train", "augment", "selftrain", "experiment"):
            _apply_config_file(choices[command], argv)
        args = parser.parse_args(argv)
        level = logging.DEBUG if args.verbose else (logging.ERROR if args.quiet
                                                    else logging.INFO)
        logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s",
                            stream=sys.stderr, force=True)
        if args.command == "experiment":
            if not args.data or not args.test:
                raise UsageError("experiment needs data=... and test=... "
                                 "(flags or config file)")
        _log_resolved(args)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
