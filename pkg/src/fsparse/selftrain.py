"""Iterative self-training: fit fresh models to a predecessor's predictions.

Each step parses an unlabeled sentence pool with the current model, then
trains a new model on those predictions, selecting checkpoints on a
held-out slice of the pool that was parsed the same way.  No gold trees
enter anywhere: the pool interface accepts sentences only.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .evaluation import EvalConfig, score_corpus
from .scorer import ScorerModel, init_model
from .trainer import TrainConfig, TrainReport, predict_corpus, train
from .treebank import write_treebank
from .trees import Corpus, Sentence

log = logging.getLogger(__name__)


@dataclass
class SelfTrainConfig:
    steps: int = 5
    train: TrainConfig = field(default_factory=TrainConfig)
    dev_fraction: float = 0.1   # pool slice held out for model selection
    from_scratch: bool = True   # fresh init per step (warm start otherwise)
    seed: int = 0
    dump_dir: str | None = None  # write per-step predicted treebanks here

    def __post_init__(self):
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if not 0.0 < self.dev_fraction < 1.0:
            raise ValueError("dev_fraction must be in (0, 1)")


@dataclass
class SelfTrainStepReport:
    step: int
    teacher_fit_f1: float       # student vs. teacher predictions on the training pool
    train_report: TrainReport


def relabel(model: ScorerModel, pool: list[Sentence]) -> Corpus:
    """Parse every pool sentence with the model; deterministic."""
    return predict_corpus(model, pool)


def self_train(initial: ScorerModel, pool: list[Sentence],
               dev_pool: list[Sentence] | None,
               config: SelfTrainConfig) -> tuple[ScorerModel, list[SelfTrainStepReport]]:
    """Run ``config.steps`` rounds of self-training and return the final model.

    When ``dev_pool`` is None, the trailing ``dev_fraction`` of the pool is
    held out for model selection (it is parsed, never treated as gold).
    """
    if config.steps == 0:
        return initial, []
    if not pool:
        raise ValueError("self-training needs a non-empty sentence pool")
    if dev_pool is None:
        n_dev = max(1, int(round(len(pool) * config.dev_fraction)))
        if n_dev >= len(pool):
            raise ValueError("pool too small to hold out a dev slice; pass dev_pool")
        dev_pool = pool[-n_dev:]
        pool = pool[:-n_dev]

    model = initial
    reports: list[SelfTrainStepReport] = []
    for step in range(1, config.steps + 1):
        train_preds = relabel(model, pool)
        dev_preds = relabel(model, dev_pool)
        if config.dump_dir is not None:
            dump = Path(config.dump_dir)
            dump.mkdir(parents=True, exist_ok=True)
            write_treebank(train_preds, dump / f"step{step}_pool.trees")
            write_treebank(dev_preds, dump / f"step{step}_dev.trees")
        if config.from_scratch:
            step_config = replace(initial.config, seed=_derived_seed(config.seed, step, 0))
            student = init_model(step_config, initial.vocab)
        else:
            student = ScorerModel(model.config, model.vocab, model.copy_params())
        inner = replace(config.train, seed=_derived_seed(config.seed, step, 1))
        student, train_report = train(student, train_preds, dev_preds, inner)
        fit = score_corpus(train_preds, relabel(student, pool), EvalConfig()).f1
        reports.append(SelfTrainStepReport(step, fit, train_report))
        log.info("self-training step %d: teacher-fit F1 %.2f (best dev %.2f)",
                 step, fit, train_report.best_dev_f1)
        model = student
    return model, reports


def _derived_seed(base: int, step: int, salt: int) -> int:
    return int(np.random.SeedSequence([base, step, salt]).generate_state(1)[0])
