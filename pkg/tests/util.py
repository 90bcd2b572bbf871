"""Shared test helpers: enumeration oracles, random trees, gradient probes.

The oracles here enumerate structures explicitly and never call the chart
code, so they stay independent of the implementation they check.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import numpy as np

from fsparse import Corpus, ScorerConfig, Sentence, Tree, build_vocabulary, init_model, score_spans

Span = tuple[int, int]


@lru_cache(maxsize=None)
def binary_structures(length: int) -> tuple[frozenset[Span], ...]:
    """All full binary bracketings of ``length`` tokens, as span sets
    (every span of length >= 2 in the derivation, root included)."""

    def over(b: int, e: int) -> list[frozenset[Span]]:
        if e - b == 1:
            return [frozenset()]
        out = []
        for k in range(b + 1, e):
            for left in over(b, k):
                for right in over(k, e):
                    out.append(left | right | {(b, e)})
        return out

    return tuple(over(0, length))


@lru_cache(maxsize=None)
def all_tree_span_sets(length: int) -> tuple[frozenset[Span], ...]:
    """Every laminar span set containing the root: all possible decoded trees."""
    root = (0, length)
    if length == 1:
        return (frozenset({root}),)
    seen: set[frozenset[Span]] = set()
    for structure in binary_structures(length):
        optional = sorted(structure - {root})
        for r in range(len(optional) + 1):
            for kept in combinations(optional, r):
                seen.add(frozenset(kept) | {root})
    return tuple(sorted(seen, key=sorted))


def enum_best_score(table: np.ndarray, length: int) -> float:
    """Brute-force maximum tree score: maximize over binary structures with
    each non-root span contributing max(score, 0)."""
    if length == 1:
        return float(table[0, 1])
    root = (0, length)
    best = -np.inf
    for structure in binary_structures(length):
        total = table[root]
        for b, e in structure:
            if (b, e) != root and table[b, e] > 0.0:
                total += table[b, e]
        best = max(best, total)
    return float(best)


def enum_best_augmented(table: np.ndarray, length: int, gold: frozenset[Span]) -> float:
    """Brute-force maximum of score(tree) + hamming(gold, tree) over all trees."""
    root = (0, length)
    gold_counted = {s for s in gold if s[1] - s[0] >= 2 and s != root}
    best = -np.inf
    for spans in all_tree_span_sets(length):
        counted = {s for s in spans if s[1] - s[0] >= 2 and s != root}
        value = sum(table[s] for s in spans) + len(counted ^ gold_counted)
        best = max(best, value)
    return float(best)


def random_table(rng: np.random.Generator, length: int, scale: float = 2.0) -> np.ndarray:
    table = np.zeros((length + 1, length + 1))
    for b in range(length + 1):
        for e in range(b + 1, length + 1):
            table[b, e] = scale * rng.normal()
    return table


def random_structure(rng: np.random.Generator, b: int, e: int) -> set[Span]:
    """Random binary bracketing over (b, e), spans of length >= 2 only."""
    if e - b == 1:
        return set()
    k = int(rng.integers(b + 1, e))
    return {(b, e)} | random_structure(rng, b, k) | random_structure(rng, k, e)


def random_tree(rng: np.random.Generator, tokens: list[str], p_keep: float = 0.6,
                tags: list[str | None] | None = None) -> Tree:
    """Random n-ary tree: random binary structure, spans kept independently."""
    length = len(tokens)
    spans = {s for s in random_structure(rng, 0, length)
             if s == (0, length) or rng.random() < p_keep}
    return Tree(Sentence(tokens, tags), spans)


def tiny_model(encoder: str, tokens: list[str], seed: int = 0, **kwargs):
    """Small model over a vocabulary covering ``tokens``."""
    vocab = build_vocabulary(Corpus([Tree(Sentence(tokens))]), max(len(set(tokens)), 1))
    defaults = dict(emb_dim=6, hidden_dim=5, ff_dim=4, max_positions=64)
    defaults.update(kwargs)
    config = ScorerConfig(encoder=encoder, seed=seed, **defaults)
    return init_model(config, vocab)


def relative_error(analytic: float, numeric: float, floor: float = 1e-7) -> float:
    """Gradcheck-style relative error; values at the FD noise floor agree."""
    scale = max(abs(analytic), abs(numeric))
    if scale < floor:
        return 0.0
    return abs(analytic - numeric) / scale


def fd_gradient(model, ids, weights, name: str, index, step: float = 1e-5) -> float:
    """Central finite difference of sum(w * score) along one parameter coordinate."""
    param = model.params[name]
    original = param[index]

    def objective() -> float:
        scores = score_spans(model, ids)
        return float(sum(w * scores.table[b, e] for (b, e), w in weights.items()))

    param[index] = original + step
    up = objective()
    param[index] = original - step
    down = objective()
    param[index] = original
    return (up - down) / (2.0 * step)
