"""Unlabeled bracketing precision/recall/F1 with punctuation discarding.

Counting follows the usual PARSEVAL conventions: brackets are compared as
spans after removing punctuation tokens; duplicate brackets over one span
count once; the root bracket counts unless ``exclude_trivial`` is set;
single-token brackets never count.  Corpus mode pools matched/gold/predicted
counts before computing P/R/F1; sentence mode averages per-sentence F1.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .trees import Corpus, Sentence, Span, Tree

# evalb-style deletion conventions: tags as used by PTB annotation, plus a
# surface-form set for trees that carry no tags.
PUNCT_TAGS = frozenset({".", ",", ":", "``", "''", "-NONE-", "-LRB-", "-RRB-"})
PUNCT_TOKENS = frozenset({
    ".", ",", ":", ";", "?", "!", "...", "--", "-", "`", "``", "'", "''",
    "-LRB-", "-RRB-", "-LSB-", "-RSB-", "-LCB-", "-RCB-",
})

MODES = ("corpus", "sentence")


@dataclass
class EvalConfig:
    mode: str = "corpus"
    punct_tokens: frozenset[str] = PUNCT_TOKENS
    punct_tags: frozenset[str] = PUNCT_TAGS
    use_tags: bool = True        # use a token's tag to spot punctuation when present
    exclude_trivial: bool = False  # drop the root bracket (length-1 never counts)
    max_len: int | None = None   # evaluate only sentences up to this raw length

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.max_len is not None and self.max_len < 1:
            raise ValueError("max_len must be >= 1")

    def is_punct(self, token: str, tag: str | None) -> bool:
        if self.use_tags and tag is not None:
            return tag in self.punct_tags
        return token in self.punct_tokens


@dataclass
class SentenceCounts:
    index: int
    matched: int
    gold: int
    predicted: int
    skipped: bool = False

    @property
    def precision(self) -> float:
        return 100.0 * self.matched / self.predicted if self.predicted else 0.0

    @property
    def recall(self) -> float:
        return 100.0 * self.matched / self.gold if self.gold else 0.0

    @property
    def f1(self) -> float:
        if self.gold == 0 and self.predicted == 0:
            return 100.0
        p, r = self.precision, self.recall
        return 2.0 * p * r / (p + r) if p + r > 0 else 0.0


@dataclass
class EvalResult:
    precision: float
    recall: float
    f1: float
    matched: int
    gold: int
    predicted: int
    mode: str
    n_scored: int
    n_skipped: int
    per_sentence: list[SentenceCounts] = field(default_factory=list)

    def report(self) -> str:
        lines = [
            f"sentences scored:   {self.n_scored}",
            f"sentences skipped:  {self.n_skipped}",
            f"gold brackets:      {self.gold}",
            f"predicted brackets: {self.predicted}",
            f"matched brackets:   {self.matched}",
            f"precision:          {self.precision:.2f}",
            f"recall:             {self.recall:.2f}",
            f"F1 ({self.mode:>8}):    {self.f1:.2f}",
        ]
        return "\n".join(lines)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(["index", "matched", "gold", "predicted",
                         "precision", "recall", "f1", "skipped"])
        for row in self.per_sentence:
            writer.writerow([row.index, row.matched, row.gold, row.predicted,
                             f"{row.precision:.4f}", f"{row.recall:.4f}",
                             f"{row.f1:.4f}", int(row.skipped)])
        return out.getvalue()


def _punct_positions(tree: Tree, config: EvalConfig) -> set[int]:
    sent = tree.sentence
    return {i for i, tok in enumerate(sent.tokens) if config.is_punct(tok, sent.tag_of(i))}


def _remove_positions(tree: Tree, positions: set[int]) -> Tree | None:
    """Drop the given token positions, re-indexing spans; None if nothing is left."""
    if not positions:
        return tree
    sent = tree.sentence
    L = len(sent)
    keep = [i for i in range(L) if i not in positions]
    if not keep:
        return None
    # new_pos[i] = number of kept tokens strictly before position i
    new_pos = [0] * (L + 1)
    n = 0
    for i in range(L):
        new_pos[i] = n
        if i not in positions:
            n += 1
    new_pos[L] = n
    new_tokens = [sent.tokens[i] for i in keep]
    new_tags = [sent.tags[i] for i in keep] if sent.tags is not None else None
    new_spans = set()
    for b, e in tree.spans:
        nb, ne = new_pos[b], new_pos[e]
        if ne - nb >= 2:
            new_spans.add((nb, ne))
    return Tree(Sentence(new_tokens, new_tags), new_spans, validate=False)


def discard_punctuation(tree: Tree, config: EvalConfig | None = None) -> Tree | None:
    """Remove punctuation tokens and compact the tree; None when every token
    is punctuation (such sentences are excluded from scoring)."""
    config = config or EvalConfig()
    return _remove_positions(tree, _punct_positions(tree, config))


def _counted_spans(tree: Tree, config: EvalConfig) -> set[Span]:
    root = tree.root
    spans = {s for s in tree.spans if s[1] - s[0] >= 2}
    if config.exclude_trivial:
        spans.discard(root)
    else:
        spans.add(root)  # a single-token root still counts by default
    return spans


def score_pair(gold: Tree, predicted: Tree, config: EvalConfig | None = None,
               index: int = 0) -> SentenceCounts:
    """Bracket counts for one (gold, predicted) pair.

    Punctuation positions are decided once, from the gold tree (which may
    carry tags), and removed from both trees, so both always compact to the
    same token sequence.
    """
    config = config or EvalConfig()
    if gold.sentence.tokens != predicted.sentence.tokens:
        raise ValueError("gold and predicted trees are over different token sequences")
    positions = _punct_positions(gold, config)
    gold_clean = _remove_positions(gold, positions)
    pred_clean = _remove_positions(predicted, positions)
    if gold_clean is None or pred_clean is None:
        return SentenceCounts(index, 0, 0, 0, skipped=True)
    gold_spans = _counted_spans(gold_clean, config)
    pred_spans = _counted_spans(pred_clean, config)
    return SentenceCounts(index, len(gold_spans & pred_spans),
                          len(gold_spans), len(pred_spans))


def score_corpus(gold: Corpus, predicted: Corpus, config: EvalConfig | None = None) -> EvalResult:
    """Micro-aggregated (corpus mode) or mean per-sentence (sentence mode) F1."""
    config = config or EvalConfig()
    if len(gold) == 0:
        raise ValueError("cannot evaluate an empty corpus")
    if len(gold) != len(predicted):
        raise ValueError(f"corpus length mismatch: {len(gold)} gold vs "
                         f"{len(predicted)} predicted trees")
    rows = []
    for i, (g, p) in enumerate(zip(gold, predicted)):
        if config.max_len is not None and len(g.sentence) > config.max_len:
            rows.append(SentenceCounts(i, 0, 0, 0, skipped=True))
            continue
        rows.append(score_pair(g, p, config, index=i))
    scored = [r for r in rows if not r.skipped]
    n_skipped = len(rows) - len(scored)
    if not scored:
        raise ValueError("no sentence left to score (all skipped)")
    matched = sum(r.matched for r in scored)
    n_gold = sum(r.gold for r in scored)
    n_pred = sum(r.predicted for r in scored)
    precision = 100.0 * matched / n_pred if n_pred else 0.0
    recall = 100.0 * matched / n_gold if n_gold else 0.0
    if config.mode == "corpus":
        f1 = 2.0 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        if n_gold == 0 and n_pred == 0:
            f1 = 100.0
    else:
        f1 = sum(r.f1 for r in scored) / len(scored)
    return EvalResult(precision, recall, f1, matched, n_gold, n_pred,
                      config.mode, len(scored), n_skipped, rows)
