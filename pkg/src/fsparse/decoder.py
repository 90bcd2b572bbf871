"""CKY decoding over span scores, plus loss-augmented inference.

A candidate tree is any laminar set of spans containing the root; its score
is the sum of its span scores (non-constituent spans contribute nothing).
``decode`` finds the maximizer with a cubic-time chart over binary splits,
then collapses non-kept spans, which yields n-ary trees.  Ties resolve to
the smallest split point, and a span is kept only when its score is
strictly positive, so an all-zero table decodes to the flat tree.

The chart fill is the hot loop of training and self-training; a compiled
kernel is used when available, with a pure-numpy fallback selected at
import time (FSPARSE_FORCE_PURE=1 forces the fallback).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _ckypure
from .scorer import SpanScores
from .trees import Sentence, Span, Tree

try:
    from . import _ckycore
except ImportError:
    _ckycore = None

_backend_name = "pure"
_kernel = _ckypure.cky_fill
if _ckycore is not None and os.environ.get("FSPARSE_FORCE_PURE") != "1":
    _backend_name = "compiled"
    _kernel = _ckycore.cky_fill


def available_backends() -> list[str]:
    return ["pure"] + (["compiled"] if _ckycore is not None else [])


def get_backend() -> str:
    return _backend_name


def set_backend(name: str) -> None:
    """Select the chart-fill kernel ('compiled' or 'pure'); mainly for tests
    and benchmarks."""
    global _backend_name, _kernel
    if name == "pure":
        _kernel = _ckypure.cky_fill
    elif name == "compiled":
        if _ckycore is None:
            raise ValueError("compiled kernel is not available")
        _kernel = _ckycore.cky_fill
    else:
        raise ValueError(f"unknown backend {name!r}")
    _backend_name = name


@dataclass
class Chart:
    """Filled CKY tables: best score, argmax split, and keep decision per span."""
    length: int
    best: np.ndarray
    split: np.ndarray
    keep: np.ndarray


def fill_chart(scores: SpanScores) -> Chart:
    L = scores.length
    table = np.ascontiguousarray(scores.table, dtype=np.float64)
    if not np.isfinite(table[np.triu_indices(L + 1, k=1)]).all():
        raise ValueError("span scores contain non-finite values")
    best = np.zeros((L + 1, L + 1))
    split = np.full((L + 1, L + 1), -1, dtype=np.int32)
    keep = np.zeros((L + 1, L + 1), dtype=np.uint8)
    _kernel(table, best, split, keep, L)
    return Chart(L, best, split, keep)


def _backtrack(chart: Chart) -> frozenset[Span]:
    L = chart.length
    if L == 1:
        return frozenset({(0, 1)})
    spans = {(0, L)}
    stack = [(0, L)]
    while stack:
        b, e = stack.pop()
        if e - b == 1:
            continue
        if chart.keep[b, e]:
            spans.add((b, e))
        k = int(chart.split[b, e])
        stack.append((b, k))
        stack.append((k, e))
    return frozenset(spans)


def decode(scores: SpanScores, sentence: Sentence) -> Tree:
    """Highest-scoring tree for the sentence under the given span scores."""
    if scores.length != len(sentence):
        raise ValueError(f"scores cover length {scores.length}, "
                         f"sentence has {len(sentence)} tokens")
    chart = fill_chart(scores)
    return Tree(sentence, _backtrack(chart), validate=False)


def tree_score(scores: SpanScores, tree: Tree) -> float:
    """Sum of the tree's span scores; equals chart best at the root for a
    decoded tree."""
    total = 0.0
    for span in tree.spans:
        total += scores.score(span)
    return total


def hamming_delta(gold: Tree | frozenset[Span], other: Tree | frozenset[Span],
                  length: int) -> int:
    """Number of spans whose constituent/non-constituent status differs.

    Only spans of two or more tokens are counted, the root excluded (it is a
    constituent in every tree); spans in neither tree agree and contribute 0.
    """
    root = (0, length)
    a = gold.spans if isinstance(gold, Tree) else gold
    b = other.spans if isinstance(other, Tree) else other
    counted_a = {s for s in a if s[1] - s[0] >= 2 and s != root}
    counted_b = {s for s in b if s[1] - s[0] >= 2 and s != root}
    return len(counted_a ^ counted_b)


def decode_loss_augmented(scores: SpanScores, gold: Tree) -> Tree:
    """Most-violating tree: argmax over trees of score(tree) + delta(gold, tree).

    Achieved by a plain decode over per-span adjusted scores: every non-root
    span of length >= 2 gets +1, gold constituents get -2 more (disagreeing
    with the gold label earns the +1, agreeing forfeits it).
    """
    L = scores.length
    if len(gold.sentence) != L:
        raise ValueError(f"gold tree has length {len(gold.sentence)}, scores cover {L}")
    table = scores.table.copy()
    bs, es = np.triu_indices(L + 1, k=2)
    table[bs, es] += 1.0
    for b, e in gold.spans:
        if e - b >= 2:
            table[b, e] -= 2.0
    root = (0, L)
    table[root] = scores.table[root]  # root label is fixed, no disagreement possible
    return decode(SpanScores(L, table), gold.sentence)
