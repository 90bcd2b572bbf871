"""Pure-numpy CKY chart kernel; fallback when the compiled core is absent.

Must stay behaviorally identical to ``_ckycore`` (the test suite compares
the two cell by cell).
"""

from __future__ import annotations

import numpy as np


def cky_fill(scores: np.ndarray, best: np.ndarray, split: np.ndarray,
             keep: np.ndarray, length: int) -> None:
    """Fill best/split/keep over all spans of a sentence of ``length`` tokens.

    A non-root cell contributes max(score, 0) and is kept only when its score
    is strictly positive; the root always contributes its score and is kept.
    Split ties resolve to the smallest split point (first argmax).
    """
    if length == 1:
        best[0, 1] = scores[0, 1]
        split[0, 1] = -1
        keep[0, 1] = True
        return
    for b in range(length):
        best[b, b + 1] = 0.0
        split[b, b + 1] = -1
        keep[b, b + 1] = False
    for span_len in range(2, length + 1):
        for b in range(length - span_len + 1):
            e = b + span_len
            cand = best[b, b + 1:e] + best[b + 1:e, e]
            k = int(np.argmax(cand))
            s = scores[b, e]
            if span_len == length:
                best[b, e] = cand[k] + s
                keep[b, e] = True
            else:
                keep[b, e] = s > 0.0
                best[b, e] = cand[k] + (s if s > 0.0 else 0.0)
            split[b, e] = b + 1 + k
