"""Few-shot constituency parsing toolkit.

A span-scoring parser trained with a structured max-margin objective and
decoded with label-aware CKY, plus the two tricks that make tiny treebanks
go further: subtree-substitution data augmentation and iterative
self-training.  Evaluation is PARSEVAL-style unlabeled bracketing F1 with
punctuation discarded.
"""

from .augment import AugmentConfig, augment_corpus, substitute
from .decoder import (Chart, decode, decode_loss_augmented, fill_chart,
                      get_backend, hamming_delta, set_backend, tree_score)
from .evaluation import EvalConfig, EvalResult, discard_punctuation, score_corpus, score_pair
from .scorer import (ScorerConfig, ScorerModel, SpanScores, backprop, init_model,
                     load_model, save_model, score_spans)
from .selftrain import SelfTrainConfig, relabel, self_train
from .trainer import TrainConfig, TrainReport, hinge_loss, predict_corpus, predict_tree, train
from .treebank import (NUM_TOKEN, Vocabulary, apply_vocabulary, build_vocabulary,
                       normalize_corpus, normalize_numbers, read_raw_sentences,
                       read_treebank, write_treebank)
from .trees import Corpus, Sentence, Span, Tree, TreeError

__version__ = "0.1.0"

__all__ = [
    "AugmentConfig", "Chart", "Corpus", "EvalConfig", "EvalResult", "NUM_TOKEN",
    "ScorerConfig", "ScorerModel", "SelfTrainConfig", "Sentence", "Span",
    "SpanScores", "TrainConfig", "TrainReport", "Tree", "TreeError", "Vocabulary",
    "apply_vocabulary", "augment_corpus", "backprop", "build_vocabulary", "decode",
    "decode_loss_augmented", "discard_punctuation", "fill_chart", "get_backend",
    "hamming_delta", "hinge_loss", "init_model", "load_model", "normalize_corpus",
    "normalize_numbers", "predict_corpus", "predict_tree", "read_raw_sentences",
    "read_treebank", "relabel", "save_model", "score_corpus", "score_pair",
    "score_spans", "self_train", "set_backend", "substitute", "train",
    "tree_score", "write_treebank",
]
