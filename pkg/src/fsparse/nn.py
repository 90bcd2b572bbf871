"""Low-level float64 layers with hand-written backward passes.

Everything here is plain numpy; no framework.  Forward functions return a
cache that the matching backward function consumes.  Gradients are exact
(verified against central finite differences in the test suite).
"""

from __future__ import annotations

import numpy as np


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def lstm_forward(x: np.ndarray, W: np.ndarray, U: np.ndarray, b: np.ndarray):
    """Run a single-layer LSTM over ``x`` (T, E), zero initial state.

    W: (4H, E), U: (4H, H), b: (4H,); gate order [input, forget, cell, output].
    Returns (h, cache) where h is (T+1, H) with h[0] = 0 and h[t] the state
    after consuming x[t-1].
    """
    T = x.shape[0]
    H = U.shape[1]
    h = np.zeros((T + 1, H))
    c = np.zeros((T + 1, H))
    gi = np.empty((T, H))
    gf = np.empty((T, H))
    gg = np.empty((T, H))
    go = np.empty((T, H))
    tc = np.empty((T, H))
    xW = x @ W.T
    for t in range(T):
        z = xW[t] + U @ h[t] + b
        gi[t] = sigmoid(z[:H])
        gf[t] = sigmoid(z[H:2 * H])
        gg[t] = np.tanh(z[2 * H:3 * H])
        go[t] = sigmoid(z[3 * H:])
        c[t + 1] = gf[t] * c[t] + gi[t] * gg[t]
        tc[t] = np.tanh(c[t + 1])
        h[t + 1] = go[t] * tc[t]
    cache = {"x": x, "h": h, "c": c, "gi": gi, "gf": gf, "gg": gg, "go": go, "tc": tc}
    return h, cache


def lstm_backward(dh: np.ndarray, cache: dict, W: np.ndarray, U: np.ndarray):
    """Backpropagate through lstm_forward.

    dh: (T+1, H) gradients w.r.t. every state h[0..T]; dh[0] is ignored
    (the initial state is a constant).  Returns (dx, dW, dU, db).
    """
    x, h, c = cache["x"], cache["h"], cache["c"]
    gi, gf, gg, go, tc = cache["gi"], cache["gf"], cache["gg"], cache["go"], cache["tc"]
    T, H = gi.shape
    dx = np.zeros_like(x)
    dW = np.zeros_like(W)
    dU = np.zeros_like(U)
    db = np.zeros(4 * H)
    dh_rec = np.zeros(H)
    dc_rec = np.zeros(H)
    dz = np.empty(4 * H)
    for t in range(T - 1, -1, -1):
        dht = dh[t + 1] + dh_rec
        dc = dc_rec + dht * go[t] * (1.0 - tc[t] ** 2)
        dz[:H] = dc * gg[t] * gi[t] * (1.0 - gi[t])
        dz[H:2 * H] = dc * c[t] * gf[t] * (1.0 - gf[t])
        dz[2 * H:3 * H] = dc * gi[t] * (1.0 - gg[t] ** 2)
        dz[3 * H:] = dht * tc[t] * go[t] * (1.0 - go[t])
        dW += np.outer(dz, x[t])
        dU += np.outer(dz, h[t])
        db += dz
        dx[t] = W.T @ dz
        dh_rec = U.T @ dz
        dc_rec = dc * gf[t]
    return dx, dW, dU, db


def ff_forward(feat: np.ndarray, W1: np.ndarray, b1: np.ndarray, w2: np.ndarray, b2: float):
    """Two-layer feedforward with tanh hidden layer and scalar output per row.

    feat: (N, D) -> scores (N,).
    """
    h1 = np.tanh(feat @ W1.T + b1)
    scores = h1 @ w2 + b2
    return scores, (feat, h1)


def ff_backward(dscores: np.ndarray, cache, W1: np.ndarray, w2: np.ndarray):
    feat, h1 = cache
    dw2 = h1.T @ dscores
    db2 = float(dscores.sum())
    da1 = np.outer(dscores, w2) * (1.0 - h1 ** 2)
    dW1 = da1.T @ feat
    db1 = da1.sum(axis=0)
    dfeat = da1 @ W1
    return dfeat, dW1, db1, dw2, db2


def dropout_mask(rng: np.random.Generator, shape, rate: float) -> np.ndarray:
    """Inverted-dropout mask: zeros with probability ``rate``, else 1/(1-rate)."""
    keep = 1.0 - rate
    return (rng.random(shape) < keep).astype(np.float64) / keep


def reverse_cumsum(a: np.ndarray) -> np.ndarray:
    return np.cumsum(a[::-1], axis=0)[::-1]
