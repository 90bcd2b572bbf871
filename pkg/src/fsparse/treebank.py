"""Bracketed treebank I/O, token normalization, and vocabulary building.

File format: UTF-8, one bracketed tree per line, PTB-style S-expressions.
Internal node labels are arbitrary; a bracket wrapping a single bare token
is treated as a preterminal (its label becomes the token's tag, and it does
not contribute a constituent span).  ``-LRB-``/``-RRB-`` are the accepted
escapes for literal parentheses inside tokens.
"""

from __future__ import annotations

import logging
import re
from collections import Counter
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .trees import Corpus, Sentence, Span, Tree, TreeError

log = logging.getLogger(__name__)

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
NUM_TOKEN = "<num>"
BOS_TOKEN = "<s>"
EOS_TOKEN = "</s>"
SPECIAL_TOKENS = (PAD_TOKEN, UNK_TOKEN, NUM_TOKEN, BOS_TOKEN, EOS_TOKEN)

PAD_ID, UNK_ID, NUM_ID, BOS_ID, EOS_ID = range(len(SPECIAL_TOKENS))

# Optional sign, digits, optional decimal part, commas ignored: 1  3.5  1,200  -7
_NUMBER_RE = re.compile(r"[+-]?[0-9]+(\.[0-9]+)?")

_SEXPR_TOKEN_RE = re.compile(r"\(|\)|[^\s()]+")


class TreebankParseError(TreeError):
    """A line of a treebank file could not be parsed."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


def is_number_token(token: str) -> bool:
    return _NUMBER_RE.fullmatch(token.replace(",", "")) is not None


def normalize_numbers(sentence: Sentence) -> Sentence:
    """Replace every numeric token with the ``<num>`` special token.

    Length-preserving and idempotent; tags are kept.
    """
    tokens = tuple(NUM_TOKEN if is_number_token(t) else t for t in sentence.tokens)
    if tokens == sentence.tokens:
        return sentence
    return Sentence(tokens, sentence.tags)


def normalize_corpus(corpus: Corpus) -> Corpus:
    """Apply number normalization to every sentence, keeping all spans."""
    out = []
    for tree in corpus:
        sent = normalize_numbers(tree.sentence)
        if sent is tree.sentence:
            out.append(tree)
        else:
            out.append(Tree(sent, tree.spans, validate=False))
    return Corpus(out)


def _parse_sexpr(line: str, line_number: int | None = None):
    """Parse one bracketed line into a nested (label, children) structure,
    where children are sub-nodes or bare token strings."""
    toks = _SEXPR_TOKEN_RE.findall(line)
    if not toks:
        raise TreebankParseError("empty line", line_number)
    pos = 0

    def parse_node():
        nonlocal pos
        if toks[pos] != "(":
            raise TreebankParseError(f"expected '(' but found {toks[pos]!r}", line_number)
        pos += 1
        if pos >= len(toks):
            raise TreebankParseError("unbalanced brackets", line_number)
        label = ""
        if toks[pos] not in ("(", ")"):
            label = toks[pos]
            pos += 1
        children = []
        while pos < len(toks) and toks[pos] != ")":
            if toks[pos] == "(":
                children.append(parse_node())
            else:
                children.append(toks[pos])
                pos += 1
        if pos >= len(toks):
            raise TreebankParseError("unbalanced brackets", line_number)
        pos += 1  # consume ')'
        if not children:
            raise TreebankParseError(f"empty constituent ({label})", line_number)
        return (label, children)

    node = parse_node()
    if pos != len(toks):
        raise TreebankParseError("trailing material after tree", line_number)
    return node


def bracketed_to_tree(line: str, line_number: int | None = None) -> Tree:
    """Parse one bracketed line into a Tree.

    Preterminal brackets (a label wrapping exactly one token) supply tags but
    no spans; unary chains collapse; the root span is always present.
    """
    node = _parse_sexpr(line, line_number)
    tokens: list[str] = []
    tags: list[str | None] = []
    spans: set[Span] = set()

    def walk(n) -> Span:
        label, children = n
        begin = len(tokens)
        if len(children) == 1 and isinstance(children[0], str):
            tokens.append(children[0])
            tags.append(label or None)
            return (begin, begin + 1)
        for child in children:
            if isinstance(child, str):
                tokens.append(child)
                tags.append(None)
            else:
                walk(child)
        end = len(tokens)
        if end == begin:
            raise TreebankParseError("constituent spans no tokens", line_number)
        if end - begin >= 2:
            spans.add((begin, end))
        return (begin, end)

    walk(node)
    try:
        sentence = Sentence(tokens, tags)
        return Tree(sentence, spans)
    except TreeError as exc:
        raise TreebankParseError(str(exc), line_number) from exc


def read_treebank(path, strict: bool = True) -> Corpus:
    """Read a treebank file (one bracketed tree per line).

    In strict mode any malformed line raises TreebankParseError with its line
    number; in lenient mode bad lines are skipped with a warning.
    """
    path = Path(path)
    corpus = Corpus()
    with path.open("r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                if strict:
                    raise TreebankParseError("blank line", line_number)
                log.warning("%s: skipping blank line %d", path, line_number)
                continue
            try:
                corpus.append(bracketed_to_tree(line, line_number))
            except TreeError as exc:
                if strict:
                    raise
                log.warning("%s: skipping line %d (%s)", path, line_number, exc)
    return corpus


def write_treebank(corpus: Corpus, path) -> None:
    """Write one bracketed tree per line; inverse of read_treebank on spans
    and tokens."""
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8") as handle:
            for tree in corpus:
                handle.write(tree.to_bracketed())
                handle.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write treebank to {path}: {exc}") from exc


def read_raw_sentences(path) -> list[Sentence]:
    """Read whitespace-tokenized sentences, one per line.

    Literal parentheses are escaped to -LRB-/-RRB-; empty lines are an error
    (files are aligned line-by-line downstream).
    """
    path = Path(path)
    sentences = []
    with path.open("r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            tokens = [t.replace("(", "-LRB-").replace(")", "-RRB-") for t in line.split()]
            if not tokens:
                raise TreebankParseError("empty sentence", line_number)
            sentences.append(Sentence(tokens))
    return sentences


def write_raw_sentences(sentences: Sequence[Sentence], path) -> None:
    with Path(path).open("w", encoding="utf-8") as handle:
        for sent in sentences:
            handle.write(" ".join(sent.tokens))
            handle.write("\n")


class Vocabulary:
    """Frequency-ranked token-to-id map with fixed special tokens.

    The ``size_cap`` most frequent tokens are kept (ties broken by first
    occurrence); everything else maps to ``<unk>``.
    """

    __slots__ = ("itos", "stoi", "size_cap")

    def __init__(self, tokens: Iterable[str], size_cap: int):
        self.itos: list[str] = list(SPECIAL_TOKENS) + [t for t in tokens if t not in SPECIAL_TOKENS]
        self.stoi: dict[str, int] = {t: i for i, t in enumerate(self.itos)}
        self.size_cap = size_cap
        if len(self.stoi) != len(self.itos):
            raise ValueError("duplicate tokens in vocabulary")

    def __len__(self) -> int:
        return len(self.itos)

    def __contains__(self, token: str) -> bool:
        return token in self.stoi

    def id(self, token: str) -> int:
        return self.stoi.get(token, UNK_ID)

    def encode(self, tokens: Sequence[str]) -> np.ndarray:
        return np.array([self.stoi.get(t, UNK_ID) for t in tokens], dtype=np.int64)

    def to_dict(self) -> dict:
        return {"tokens": self.itos[len(SPECIAL_TOKENS):], "size_cap": self.size_cap}

    @classmethod
    def from_dict(cls, data: dict) -> "Vocabulary":
        return cls(data["tokens"], data["size_cap"])


def build_vocabulary(corpus: Corpus, size_cap: int,
                     extra_sentences: Sequence[Sentence] = ()) -> Vocabulary:
    """Keep the ``size_cap`` most frequent tokens of the corpus.

    Deterministic: ties broken by first occurrence order.  Number
    normalization is expected to have been applied already.
    ``extra_sentences`` lets unlabeled text (e.g. a self-training pool)
    contribute tokens, the usual cure for vocabulary sparsity when the
    labeled corpus is tiny.
    """
    if size_cap <= 0:
        raise ValueError("size_cap must be positive")
    if len(corpus) == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    counts: Counter[str] = Counter()
    first_seen: dict[str, int] = {}
    position = 0
    token_streams = [tree.sentence.tokens for tree in corpus]
    token_streams.extend(normalize_numbers(s).tokens for s in extra_sentences)
    for tokens in token_streams:
        for token in tokens:
            counts[token] += 1
            if token not in first_seen:
                first_seen[token] = position
            position += 1
    ranked = sorted(counts, key=lambda t: (-counts[t], first_seen[t]))
    ranked = [t for t in ranked if t not in SPECIAL_TOKENS]
    return Vocabulary(ranked[:size_cap], size_cap)


def apply_vocabulary(sentence: Sentence, vocab: Vocabulary) -> np.ndarray:
    """Map tokens to ids, unknown tokens to the UNK id; length preserved."""
    return vocab.encode(sentence.tokens)
