"""Core data types: sentences, spans, unlabeled constituency trees, corpora.

A tree is stored as a set of ``(begin, end)`` spans over its sentence
(0-based, end-exclusive).  The full-sentence span is always present; the
n-ary child structure is derived from span nesting.  Category labels are
not part of the tree; per-token preterminal tags may be kept on the
sentence because evaluation uses them to spot punctuation.
"""

from __future__ import annotations

from typing import Iterable, Iterator

Span = tuple[int, int]

LRB = "-LRB-"
RRB = "-RRB-"


class TreeError(ValueError):
    """A sentence, span set, or tree violates a structural invariant."""


def escape_token(token: str) -> str:
    """Replace literal parentheses so the token is safe in bracketed files."""
    return token.replace("(", LRB).replace(")", RRB)


class Sentence:
    """A tokenized sentence, optionally with per-token preterminal tags."""

    __slots__ = ("tokens", "tags")

    def __init__(self, tokens: Iterable[str], tags: Iterable[str | None] | None = None):
        self.tokens: tuple[str, ...] = tuple(tokens)
        self.tags: tuple[str | None, ...] | None = tuple(tags) if tags is not None else None
        if not self.tokens:
            raise TreeError("sentence must contain at least one token")
        for tok in self.tokens:
            if not tok or any(c.isspace() for c in tok) or "(" in tok or ")" in tok:
                raise TreeError(f"bad token {tok!r}: tokens must be non-empty, "
                                "whitespace-free, and use -LRB-/-RRB- for parentheses")
        if self.tags is not None and len(self.tags) != len(self.tokens):
            raise TreeError("tags length does not match tokens length")

    def __len__(self) -> int:
        return len(self.tokens)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Sentence) and self.tokens == other.tokens

    def __hash__(self) -> int:
        return hash(self.tokens)

    def __repr__(self) -> str:
        return f"Sentence({' '.join(self.tokens)!r})"

    def tag_of(self, i: int) -> str | None:
        return self.tags[i] if self.tags is not None else None


def check_span(span: Span, length: int) -> None:
    b, e = span
    if not (0 <= b < e <= length):
        raise TreeError(f"span {span} out of range for sentence of length {length}")


def spans_cross(a: Span, b: Span) -> bool:
    """True if the two spans overlap without one containing the other."""
    (ab, ae), (bb, be) = a, b
    return (ab < bb < ae < be) or (bb < ab < be < ae)


class Tree:
    """An unlabeled constituency tree: a sentence plus a laminar span set.

    The root span ``(0, len(sentence))`` is added automatically.  Spans must
    be pairwise nested or disjoint (no crossing brackets).
    """

    __slots__ = ("sentence", "spans")

    def __init__(self, sentence: Sentence, spans: Iterable[Span] = (), validate: bool = True):
        self.sentence = sentence
        length = len(sentence)
        span_set = {(int(b), int(e)) for b, e in spans}
        span_set.add((0, length))
        self.spans: frozenset[Span] = frozenset(span_set)
        if validate:
            self.validate()

    def validate(self) -> None:
        length = len(self.sentence)
        for span in self.spans:
            check_span(span, length)
        ordered = self.sorted_spans()
        for i, a in enumerate(ordered):
            for b in ordered[i + 1:]:
                if b[0] >= a[1]:
                    break
                if spans_cross(a, b):
                    raise TreeError(f"crossing spans {a} and {b}")

    @property
    def root(self) -> Span:
        return (0, len(self.sentence))

    def __len__(self) -> int:
        return len(self.sentence)

    def __contains__(self, span: Span) -> bool:
        return span in self.spans

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Tree)
                and self.sentence.tokens == other.sentence.tokens
                and self.spans == other.spans)

    def __hash__(self) -> int:
        return hash((self.sentence.tokens, self.spans))

    def __repr__(self) -> str:
        return f"Tree({self.to_bracketed()!r})"

    def sorted_spans(self) -> list[Span]:
        """Spans in pre-order: by begin ascending, then end descending."""
        return sorted(self.spans, key=lambda s: (s[0], -s[1]))

    def child_map(self) -> dict[Span, list[Span | int]]:
        """Map every span to its ordered children: maximal proper subspans
        interleaved with leaf token indices."""
        ordered = self.sorted_spans()
        sub_spans: dict[Span, list[Span]] = {s: [] for s in ordered}
        stack: list[Span] = []
        for s in ordered:
            while stack and stack[-1][1] <= s[0]:
                stack.pop()
            if stack:
                sub_spans[stack[-1]].append(s)
            stack.append(s)
        children: dict[Span, list[Span | int]] = {}
        for s in ordered:
            items: list[Span | int] = []
            pos = s[0]
            for sub in sub_spans[s]:
                items.extend(range(pos, sub[0]))
                items.append(sub)
                pos = sub[1]
            items.extend(range(pos, s[1]))
            children[s] = items
        return children

    def children(self, span: Span) -> list[Span | int]:
        """Ordered children of ``span``: maximal proper subspans and leaf token indices."""
        if span not in self.spans:
            raise TreeError(f"span {span} not in tree")
        return self.child_map()[span]

    def to_bracketed(self, label: str = "NT") -> str:
        """Serialize to a single-line bracketed string with uniform labels."""
        child_map = self.child_map()

        def render(item: Span | int) -> str:
            if isinstance(item, int):
                return escape_token(self.sentence.tokens[item])
            parts = " ".join(render(c) for c in child_map[item])
            return f"({label} {parts})"

        return render(self.root)


class Corpus:
    """An ordered collection of trees (each tree carries its sentence)."""

    __slots__ = ("trees",)

    def __init__(self, trees: Iterable[Tree] = ()):
        self.trees: list[Tree] = list(trees)

    def __len__(self) -> int:
        return len(self.trees)

    def __iter__(self) -> Iterator[Tree]:
        return iter(self.trees)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Corpus(self.trees[i])
        return self.trees[i]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Corpus) and self.trees == other.trees

    def append(self, tree: Tree) -> None:
        self.trees.append(tree)

    @property
    def sentences(self) -> list[Sentence]:
        return [t.sentence for t in self.trees]
