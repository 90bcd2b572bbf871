"""Span scoring model: embeddings, a light encoder, and a feedforward head.

For a sentence of length L the model assigns one real score to every span
0 <= b < e <= L.  A span's score is read as the evidence that it is a
constituent; the non-constituent alternative is fixed at 0, so the score of
a whole tree is literally the sum of its span scores.

Span features are fencepost differences: the encoder produces one state per
between-token position (with boundary markers at both ends), and the span
(b, e) is represented by [forward[e] - forward[b]; backward[b] - backward[e]].
Two encoders are available: a single-layer bidirectional LSTM, and a fast
embedding-only encoder (prefix sums of token + position embeddings) meant
for tests and quick experiments.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import nn
from .treebank import BOS_ID, EOS_ID, Vocabulary
from .trees import Span

FORMAT_VERSION = 1

ENCODERS = ("bilstm", "embedding")


@dataclass
class ScorerConfig:
    emb_dim: int = 100
    encoder: str = "bilstm"
    hidden_dim: int = 200
    ff_dim: int = 250
    dropout: float = 0.0
    max_positions: int = 512
    seed: int = 0

    def __post_init__(self):
        if self.encoder not in ENCODERS:
            raise ValueError(f"unknown encoder {self.encoder!r}; choose from {ENCODERS}")
        for name in ("emb_dim", "hidden_dim", "ff_dim", "max_positions"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")

    @property
    def state_dim(self) -> int:
        """Dimension of one encoder fencepost state."""
        return self.hidden_dim if self.encoder == "bilstm" else self.emb_dim


@dataclass
class SpanScores:
    """Dense per-span scores for one sentence.

    ``table[b, e]`` holds the score of span (b, e) for every 0 <= b < e <= L;
    ``tape`` carries forward-pass intermediates when scoring ran in train mode.
    """
    length: int
    table: np.ndarray
    tape: dict | None = field(default=None, repr=False)

    def score(self, span: Span) -> float:
        b, e = span
        if not (0 <= b < e <= self.length):
            raise ValueError(f"span {span} out of range for length {self.length}")
        return float(self.table[b, e])

    @property
    def n_spans(self) -> int:
        return self.length * (self.length + 1) // 2


class ScorerModel:
    """Learnable parameters plus configuration and vocabulary."""

    def __init__(self, config: ScorerConfig, vocab: Vocabulary, params: dict[str, np.ndarray]):
        self.config = config
        self.vocab = vocab
        self.params = params

    def copy_params(self) -> dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self.params.items()}

    def set_params(self, params: dict[str, np.ndarray]) -> None:
        if set(params) != set(self.params):
            raise ValueError("parameter set mismatch")
        self.params = {k: v.copy() for k, v in params.items()}

    @property
    def n_params(self) -> int:
        return sum(p.size for p in self.params.values())

    def save(self, path) -> None:
        save_model(self, path)

    @classmethod
    def load(cls, path) -> "ScorerModel":
        return load_model(path)


def _init_params(config: ScorerConfig, vocab_size: int) -> dict[str, np.ndarray]:
    rng = np.random.default_rng(config.seed)
    E, H, F = config.emb_dim, config.hidden_dim, config.ff_dim
    D = config.state_dim
    params: dict[str, np.ndarray] = {}
    params["emb"] = rng.normal(0.0, 0.1, (vocab_size, E))
    if config.encoder == "embedding":
        params["pos"] = rng.normal(0.0, 0.1, (config.max_positions, E))
    else:
        for direction in ("fw", "bw"):
            params[f"lstm_{direction}_W"] = rng.normal(0.0, np.sqrt(1.0 / E), (4 * H, E))
            params[f"lstm_{direction}_U"] = rng.normal(0.0, np.sqrt(1.0 / H), (4 * H, H))
            bias = np.zeros(4 * H)
            bias[H:2 * H] = 1.0  # forget-gate bias
            params[f"lstm_{direction}_b"] = bias
    params["ff_W1"] = rng.normal(0.0, np.sqrt(2.0 / (2 * D + F)), (F, 2 * D))
    params["ff_b1"] = np.zeros(F)
    params["ff_w2"] = rng.normal(0.0, np.sqrt(2.0 / (F + 1)), F)
    params["ff_b2"] = np.zeros(())
    return params


def load_pretrained_embeddings(path) -> dict[str, np.ndarray]:
    """Read a text embedding file: one line per token, token then floats."""
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with Path(path).open("r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if not values:
                raise ValueError(f"{path}: line {line_number} has no vector components")
            vec = np.array([float(v) for v in values])
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise ValueError(f"{path}: line {line_number} has dimension {vec.size}, expected {dim}")
            vectors[token] = vec
    return vectors


def init_model(config: ScorerConfig, vocab: Vocabulary, pretrained=None) -> ScorerModel:
    """Create a model with seeded random parameters.

    ``pretrained`` may be a path to a text embedding file or a token->vector
    dict; covered tokens get the file's vector verbatim, the rest keep their
    sampled initialization.  The vector dimension must equal ``emb_dim``.
    """
    params = _init_params(config, len(vocab))
    if pretrained is not None:
        if not isinstance(pretrained, dict):
            pretrained = load_pretrained_embeddings(pretrained)
        for token, vec in pretrained.items():
            vec = np.asarray(vec, dtype=np.float64)
            if vec.shape != (config.emb_dim,):
                raise ValueError(f"pretrained vector for {token!r} has dimension "
                                 f"{vec.size}, config expects {config.emb_dim}")
            if token in vocab:
                params["emb"][vocab.stoi[token]] = vec
    return ScorerModel(config, vocab, params)


def _span_indices(length: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(length + 1, k=1)


def score_spans(model: ScorerModel, ids: np.ndarray, train_mode: bool = False,
                dropout_rng: np.random.Generator | None = None) -> SpanScores:
    """Score all spans of one sentence given its token ids.

    In train mode the returned SpanScores carries a tape for backprop;
    dropout (if configured) requires ``dropout_rng`` then.  Eval-mode scoring
    is a pure function of (parameters, ids).
    """
    ids = np.asarray(ids, dtype=np.int64)
    if ids.ndim != 1 or ids.size == 0:
        raise ValueError("ids must be a non-empty 1-d array")
    vocab_size = model.params["emb"].shape[0]
    if ids.min() < 0 or ids.max() >= vocab_size:
        raise ValueError("token id out of range for the model vocabulary")
    cfg = model.config
    p = model.params
    L = ids.size

    seq = np.concatenate(([BOS_ID], ids, [EOS_ID]))
    x = p["emb"][seq]
    if cfg.encoder == "embedding":
        if seq.size > cfg.max_positions:
            raise ValueError(f"sentence needs {seq.size} positions, "
                             f"model supports {cfg.max_positions}")
        x = x + p["pos"][:seq.size]

    mask = None
    if train_mode and cfg.dropout > 0.0:
        if dropout_rng is None:
            raise ValueError("train-mode scoring with dropout needs dropout_rng")
        mask = nn.dropout_mask(dropout_rng, x.shape, cfg.dropout)
        x = x * mask

    tape: dict = {"model": model, "ids": ids, "seq": seq, "mask": mask, "length": L}
    if cfg.encoder == "bilstm":
        fwd_in = x[:L + 1]          # boundary marker + tokens
        bwd_in = x[1:][::-1]        # end marker + tokens reversed
        h_f, cache_f = nn.lstm_forward(fwd_in, p["lstm_fw_W"], p["lstm_fw_U"], p["lstm_fw_b"])
        h_b, cache_b = nn.lstm_forward(bwd_in, p["lstm_bw_W"], p["lstm_bw_U"], p["lstm_bw_b"])
        fence_f = h_f[1:]
        fence_b = h_b[1:][::-1]
        tape["cache_f"], tape["cache_b"] = cache_f, cache_b
    else:
        fence_f = np.cumsum(x[:L + 1], axis=0)
        fence_b = nn.reverse_cumsum(x[1:])

    bs, es = _span_indices(L)
    feat = np.concatenate([fence_f[es] - fence_f[bs], fence_b[bs] - fence_b[es]], axis=1)
    scores, ff_cache = nn.ff_forward(feat, p["ff_W1"], p["ff_b1"], p["ff_w2"], float(p["ff_b2"]))

    table = np.zeros((L + 1, L + 1))
    table[bs, es] = scores
    if not train_mode:
        return SpanScores(L, table)
    tape["bs"], tape["es"], tape["ff_cache"] = bs, es, ff_cache
    return SpanScores(L, table, tape)


def backprop(model: ScorerModel, tape: dict, span_weights: dict[Span, float]) -> dict[str, np.ndarray]:
    """Gradient of sum_s weight(s) * score(s) w.r.t. every parameter.

    ``tape`` must come from score_spans(train_mode=True) on the same model.
    """
    if tape is None or tape.get("model") is not model:
        raise ValueError("tape does not belong to this model")
    cfg = model.config
    p = model.params
    L = tape["length"]
    bs, es = tape["bs"], tape["es"]

    span_to_idx = {(int(b), int(e)): i for i, (b, e) in enumerate(zip(bs, es))}
    dscores = np.zeros(bs.size)
    for span, weight in span_weights.items():
        idx = span_to_idx.get((int(span[0]), int(span[1])))
        if idx is None:
            raise ValueError(f"span {span} out of range for length {L}")
        dscores[idx] += weight

    dfeat, dW1, db1, dw2, db2 = nn.ff_backward(dscores, tape["ff_cache"], p["ff_W1"], p["ff_w2"])
    D = cfg.state_dim
    dff, dbf = dfeat[:, :D], dfeat[:, D:]
    d_fence_f = np.zeros((L + 1, D))
    np.add.at(d_fence_f, es, dff)
    np.add.at(d_fence_f, bs, -dff)
    d_fence_b = np.zeros((L + 1, D))
    np.add.at(d_fence_b, bs, dbf)
    np.add.at(d_fence_b, es, -dbf)

    dx = np.zeros((L + 2, cfg.emb_dim))
    grads: dict[str, np.ndarray] = {}
    if cfg.encoder == "bilstm":
        dh_f = np.zeros((L + 2, cfg.hidden_dim))
        dh_f[1:] = d_fence_f
        dx_f, dWf, dUf, dbfw = nn.lstm_backward(dh_f, tape["cache_f"], p["lstm_fw_W"], p["lstm_fw_U"])
        dh_b = np.zeros((L + 2, cfg.hidden_dim))
        dh_b[1:] = d_fence_b[::-1]
        dx_b, dWb, dUb, dbbw = nn.lstm_backward(dh_b, tape["cache_b"], p["lstm_bw_W"], p["lstm_bw_U"])
        dx[:L + 1] += dx_f
        dx[1:] += dx_b[::-1]
        grads.update(lstm_fw_W=dWf, lstm_fw_U=dUf, lstm_fw_b=dbfw,
                     lstm_bw_W=dWb, lstm_bw_U=dUb, lstm_bw_b=dbbw)
    else:
        dx[:L + 1] += nn.reverse_cumsum(d_fence_f)
        dx[1:] += np.cumsum(d_fence_b, axis=0)
        dpos = np.zeros_like(p["pos"])
        # position gradient accumulates below, after the dropout mask

    if tape["mask"] is not None:
        dx = dx * tape["mask"]

    demb = np.zeros_like(p["emb"])
    np.add.at(demb, tape["seq"], dx)
    grads["emb"] = demb
    if cfg.encoder == "embedding":
        dpos[:L + 2] = dx
        grads["pos"] = dpos
    grads.update(ff_W1=dW1, ff_b1=db1, ff_w2=dw2, ff_b2=np.asarray(db2))
    return grads


def save_model(model: ScorerModel, path) -> None:
    """Write a single-file container: config, vocabulary, parameter tensors."""
    meta = {
        "format_version": FORMAT_VERSION,
        "config": asdict(model.config),
        "vocab": model.vocab.to_dict(),
        "param_names": sorted(model.params),
    }
    meta_bytes = np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8)
    arrays = {f"param_{k}": v for k, v in model.params.items()}
    with Path(path).open("wb") as handle:
        np.savez(handle, meta=meta_bytes, **arrays)


def load_model(path) -> ScorerModel:
    with np.load(Path(path), allow_pickle=False) as data:
        meta = json.loads(bytes(data["meta"]).decode("utf-8"))
        if meta.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model format {meta.get('format_version')!r}")
        config = ScorerConfig(**meta["config"])
        vocab = Vocabulary.from_dict(meta["vocab"])
        params = {name: data[f"param_{name}"] for name in meta["param_names"]}
    return ScorerModel(config, vocab, params)
