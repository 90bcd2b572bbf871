"""Max-margin training with loss-augmented inference and dev-F1 model selection.

The per-sentence loss is the structured hinge
``max(0, score(worst) + delta(gold, worst) - score(gold))`` where ``worst``
comes from loss-augmented decoding; its subgradient puts weight +1 on the
violating tree's spans and -1 on the gold spans.  Updates are Adam over
mini-batch means.  The best checkpoint by dev F1 is kept in memory and
restored at the end; everything is deterministic under the seed.
"""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .decoder import decode, decode_loss_augmented, hamming_delta, tree_score
from .evaluation import EvalConfig, score_corpus
from .scorer import ScorerModel, backprop, score_spans
from .treebank import normalize_numbers
from .trees import Corpus, Sentence, Tree

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    epochs: int = 50
    batch_size: int = 8
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    patience: int = 5
    eval_every: int = 1
    max_train_len: int = 60
    seed: int = 0

    def __post_init__(self):
        for name in ("epochs", "batch_size", "patience", "eval_every", "max_train_len"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass
class TrainReport:
    epoch_losses: list[float] = field(default_factory=list)
    evaluations: list[tuple[int, float]] = field(default_factory=list)  # (epoch, dev F1)
    best_epoch: int = 0
    best_dev_f1: float = float("-inf")
    stopped_early: bool = False
    n_skipped_long: int = 0
    wall_time: float = 0.0

    def to_csv(self) -> str:
        """Per-epoch metrics as CSV (wall time excluded: it is not reproducible)."""
        dev_by_epoch = dict(self.evaluations)
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(["epoch", "train_loss", "dev_f1"])
        for epoch, loss in enumerate(self.epoch_losses, start=1):
            dev = dev_by_epoch.get(epoch)
            writer.writerow([epoch, f"{loss:.6f}", "" if dev is None else f"{dev:.4f}"])
        return out.getvalue()


def hinge_loss(model: ScorerModel, ids: np.ndarray, gold: Tree,
               dropout_rng: np.random.Generator | None = None):
    """Structured hinge loss for one sentence; returns (loss, grads).

    grads is None when the margin constraint already holds (zero subgradient).
    """
    scores = score_spans(model, ids, train_mode=True, dropout_rng=dropout_rng)
    worst = decode_loss_augmented(scores, gold)
    delta = hamming_delta(gold, worst, scores.length)
    loss = tree_score(scores, worst) + delta - tree_score(scores, gold)
    if loss <= 0.0:
        return 0.0, None
    weights: dict[tuple[int, int], float] = {}
    for span in worst.spans:
        weights[span] = weights.get(span, 0.0) + 1.0
    for span in gold.spans:
        weights[span] = weights.get(span, 0.0) - 1.0
    weights = {s: w for s, w in weights.items() if w != 0.0}
    grads = backprop(model, scores.tape, weights) if weights else None
    return loss, grads


class AdamState:
    """Adam accumulators over a parameter dict."""

    def __init__(self, params: dict[str, np.ndarray]):
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
             config: TrainConfig) -> None:
        self.t += 1
        b1, b2 = config.beta1, config.beta2
        correction = np.sqrt(1.0 - b2 ** self.t) / (1.0 - b1 ** self.t)
        alpha = config.learning_rate * correction
        for name, grad in grads.items():
            m = self.m[name]
            v = self.v[name]
            m *= b1
            m += (1.0 - b1) * grad
            v *= b2
            v += (1.0 - b2) * grad * grad
            params[name] -= alpha * m / (np.sqrt(v) + config.adam_eps)


def predict_tree(model: ScorerModel, sentence: Sentence) -> Tree:
    """Parse one sentence with the model (dropout off, deterministic)."""
    ids = model.vocab.encode(normalize_numbers(sentence).tokens)
    scores = score_spans(model, ids)
    return decode(scores, sentence)


def predict_corpus(model: ScorerModel, sentences) -> Corpus:
    return Corpus(predict_tree(model, s) for s in sentences)


def dev_f1(model: ScorerModel, dev: Corpus) -> float:
    predicted = predict_corpus(model, dev.sentences)
    return score_corpus(dev, predicted, EvalConfig()).f1


def train(model: ScorerModel, train_corpus: Corpus, dev_corpus: Corpus,
          config: TrainConfig) -> tuple[ScorerModel, TrainReport]:
    """Train in place and return the model holding the best-dev-F1 parameters.

    Evaluates every ``eval_every`` epochs; stops after ``patience``
    evaluations without improvement; ties keep the earlier checkpoint.
    """
    if len(train_corpus) == 0:
        raise ValueError("training corpus is empty")
    if len(dev_corpus) == 0:
        raise ValueError("dev corpus is empty")
    started = time.perf_counter()
    report = TrainReport()

    items = []
    for tree in train_corpus:
        if len(tree.sentence) > config.max_train_len:
            report.n_skipped_long += 1
            continue
        ids = model.vocab.encode(normalize_numbers(tree.sentence).tokens)
        items.append((ids, tree))
    if not items:
        raise ValueError(f"no training sentence is <= {config.max_train_len} tokens")
    if report.n_skipped_long:
        log.info("skipping %d sentences longer than %d tokens",
                 report.n_skipped_long, config.max_train_len)

    rng = np.random.default_rng(config.seed)
    adam = AdamState(model.params)
    best_params = model.copy_params()
    evals_since_best = 0

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(items))
        epoch_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = order[start:start + config.batch_size]
            batch_grads: dict[str, np.ndarray] | None = None
            for idx in batch:
                ids, gold = items[idx]
                loss, grads = hinge_loss(model, ids, gold, dropout_rng=rng)
                epoch_loss += loss
                if grads is None:
                    continue
                if batch_grads is None:
                    batch_grads = grads
                else:
                    for name, g in grads.items():
                        batch_grads[name] += g
            if batch_grads is not None:
                scale = 1.0 / len(batch)
                for g in batch_grads.values():
                    g *= scale
                adam.step(model.params, batch_grads, config)
        report.epoch_losses.append(epoch_loss / len(items))

        if epoch % config.eval_every == 0 or epoch == config.epochs:
            f1 = dev_f1(model, dev_corpus)
            report.evaluations.append((epoch, f1))
            if f1 > report.best_dev_f1:
                report.best_dev_f1 = f1
                report.best_epoch = epoch
                best_params = model.copy_params()
                evals_since_best = 0
            else:
                evals_since_best += 1
                if evals_since_best >= config.patience:
                    report.stopped_early = True
                    break

    model.set_params(best_params)
    report.wall_time = time.perf_counter() - started
    return model, report
