"""Data augmentation by subtree substitution.

One step replaces a constituent of a target tree (tokens and internal
subtree) with a constituent drawn from a source tree, shifting every span
to the right of, or containing, the edit site.  Generated sentences are
kept whether or not they are grammatical; only a length cap filters them.
The growing set is seeded with the originals, and each step draws its
target uniformly from the growing set and its replacement from the original
set (a config switch allows drawing replacements from the growing set too).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .trees import Corpus, Sentence, Span, Tree, TreeError

SOURCE_POLICIES = ("original", "growing")


@dataclass
class AugmentConfig:
    target_size: int
    seed: int = 0
    source_policy: str = "original"
    max_sentence_len: int = 100
    max_retry_factor: int = 1000

    def __post_init__(self):
        if self.target_size < 0:
            raise ValueError("target_size must be non-negative")
        if self.max_sentence_len < 1:
            raise ValueError("max_sentence_len must be >= 1")
        if self.source_policy not in SOURCE_POLICIES:
            raise ValueError(f"source_policy must be one of {SOURCE_POLICIES}")


class AugmentError(RuntimeError):
    """Augmentation could not reach the requested size."""


def target_spans(tree: Tree) -> list[Span]:
    """Constituents eligible for replacement: non-root spans (sorted)."""
    root = tree.root
    return sorted(s for s in tree.spans if s != root and s[1] - s[0] >= 2)


def source_spans(tree: Tree) -> list[Span]:
    """Constituents eligible as replacements: any span of >= 2 tokens (sorted)."""
    return sorted(s for s in tree.spans if s[1] - s[0] >= 2)


def substitute(target: Tree, target_span: Span, source: Tree, source_span: Span) -> Tree:
    """Replace ``target_span`` of ``target`` with ``source_span`` of ``source``.

    Spans inside the edit move with the replacement subtree; spans containing
    it stretch; spans to its right shift.  The root is not a valid target.
    """
    if target_span not in target.spans:
        raise TreeError(f"target span {target_span} not in target tree")
    if source_span not in source.spans:
        raise TreeError(f"source span {source_span} not in source tree")
    if target_span == target.root:
        raise TreeError("cannot substitute at the root span")
    tb, te = target_span
    sb, se = source_span
    shift = (se - sb) - (te - tb)

    tokens = (target.sentence.tokens[:tb] + source.sentence.tokens[sb:se]
              + target.sentence.tokens[te:])
    t_tags = target.sentence.tags or (None,) * len(target.sentence)
    s_tags = source.sentence.tags or (None,) * len(source.sentence)
    tags = t_tags[:tb] + s_tags[sb:se] + t_tags[te:]
    sentence = Sentence(tokens, None if all(t is None for t in tags) else tags)

    spans: set[Span] = set()
    for b, e in target.spans:
        if (b, e) == target_span:
            continue
        if tb <= b and e <= te:       # strictly inside the edit: dropped
            continue
        if b <= tb and te <= e:       # contains the edit: stretch
            spans.add((b, e + shift))
        elif b >= te:                 # right of the edit: shift
            spans.add((b + shift, e + shift))
        else:                         # left of the edit: unchanged
            spans.add((b, e))
    for b, e in source.spans:
        if sb <= b and e <= se:       # the replacement subtree, its own root included
            spans.add((b - sb + tb, e - sb + tb))
    return Tree(sentence, spans)


def augment_corpus(base: Corpus, config: AugmentConfig) -> Corpus:
    """Grow the corpus to ``config.target_size`` by repeated substitution.

    The first ``len(base)`` items are the originals in order; generation is
    deterministic under the seed.  Draws hitting the root, a tree without an
    eligible target, or the length cap are resampled, up to
    ``max_retry_factor * target_size`` attempts.
    """
    if len(base) == 0:
        raise ValueError("base corpus is empty")
    if config.target_size < len(base):
        raise ValueError(f"target size {config.target_size} is smaller than "
                         f"the corpus ({len(base)} trees)")
    rng = np.random.default_rng(config.seed)
    grown = Corpus(list(base))
    source_pool = grown.trees if config.source_policy == "growing" else list(base)
    attempts_left = config.max_retry_factor * max(config.target_size, 1)

    while len(grown) < config.target_size:
        if attempts_left <= 0:
            raise AugmentError(
                f"gave up growing the corpus at {len(grown)}/{config.target_size} "
                f"items: every recent draw was rejected (length cap "
                f"{config.max_sentence_len})")
        attempts_left -= 1
        target = grown.trees[int(rng.integers(len(grown)))]
        eligible = target_spans(target)
        if not eligible:
            continue
        t_span = eligible[int(rng.integers(len(eligible)))]
        source = source_pool[int(rng.integers(len(source_pool)))]
        candidates = source_spans(source)
        if not candidates:
            continue
        s_span = candidates[int(rng.integers(len(candidates)))]
        new_len = len(target.sentence) + (s_span[1] - s_span[0]) - (t_span[1] - t_span[0])
        if new_len > config.max_sentence_len:
            continue
        grown.append(substitute(target, t_span, source, s_span))
    return grown
