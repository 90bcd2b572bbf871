# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled CKY chart kernel; behaviorally identical to ``_ckypure``."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def cky_fill(double[:, ::1] scores, double[:, ::1] best, int[:, ::1] split,
             unsigned char[:, ::1] keep, int length):
    """Fill best/split/keep over all spans; see _ckypure.cky_fill."""
    cdef int b, e, k, span_len, best_k
    cdef double cand, best_val, s

    if length == 1:
        best[0, 1] = scores[0, 1]
        split[0, 1] = -1
        keep[0, 1] = 1
        return
    for b in range(length):
        best[b, b + 1] = 0.0
        split[b, b + 1] = -1
        keep[b, b + 1] = 0
    with nogil:
        for span_len in range(2, length + 1):
            for b in range(length - span_len + 1):
                e = b + span_len
                best_k = b + 1
                best_val = best[b, b + 1] + best[b + 1, e]
                for k in range(b + 2, e):
                    cand = best[b, k] + best[k, e]
                    if cand > best_val:
                        best_val = cand
                        best_k = k
                s = scores[b, e]
                if span_len == length:
                    best[b, e] = best_val + s
                    keep[b, e] = 1
                else:
                    if s > 0.0:
                        best[b, e] = best_val + s
                        keep[b, e] = 1
                    else:
                        best[b, e] = best_val
                        keep[b, e] = 0
                split[b, e] = best_k
