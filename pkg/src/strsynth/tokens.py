"""Closed token vocabulary used by the position logics.

A token is a tiny character-class matcher.  The vocabulary is fixed: the
empty token (matches the empty string at every boundary), the two string
anchors, six character classes that match maximal runs, and one
single-character token per supported punctuation mark.  Each token carries
a specificity weight used by the ranker: broad classes earn the largest
bonus and hyper-specific tokens (single characters, the empty token) the
smallest, so position logics that overfit to one exact character rank
below ones anchored on general structure.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache

Span = tuple[int, int]

EMPTY = "Empty"
START = "Start"
END = "End"


@dataclass(frozen=True)
class Token:
    name: str
    kind: str  # "empty" | "anchor" | "class" | "char"
    specificity: float
    pattern: re.Pattern | None = field(default=None, compare=False)
    char: str | None = None


def _class(name: str, spec: float, regex: str) -> Token:
    return Token(name, "class", spec, pattern=re.compile(regex))


def escape_char(c: str) -> str:
    """Single-quoted character literal with the DSL escape rules."""
    if c == "\\":
        body = "\\\\"
    elif c == "'":
        body = "\\'"
    elif c == "\n":
        body = "\\n"
    elif c == "\t":
        body = "\\t"
    elif 0x20 <= ord(c) <= 0x7E:
        body = c
    else:
        body = "\\x%02x" % ord(c)
    return "'%s'" % body


def char_token_name(c: str) -> str:
    return "Char(%s)" % escape_char(c)


# Punctuation marks with single-character tokens, in canonical order.
PUNCTUATION = "()-.,:;/@_\"' "

# Single-character tokens sit at the bottom of the specificity scale; the
# per-character offset keeps specificity sums distinct across different
# punctuation tokens, which keeps cross-branch rank ties rare.
_CHAR_TOKENS = tuple(
    Token(char_token_name(c), "char", 1.0 + ord(c) / 1000.0, char=c) for c in PUNCTUATION
)

VOCABULARY: tuple[Token, ...] = (
    Token(EMPTY, "empty", 0.0),
    Token(START, "anchor", 2.53),
    Token(END, "anchor", 2.47),
    _class("Digits", 4.29, r"[0-9]+"),
    _class("Letters", 4.87, r"[A-Za-z]+"),
    _class("Lowercase", 3.61, r"[a-z]+"),
    _class("Uppercase", 3.53, r"[A-Z]+"),
    _class("Alphanumeric", 5.19, r"[A-Za-z0-9]+"),
    _class("Whitespace", 3.11, r"[ \t\n\r\f\v]+"),
) + _CHAR_TOKENS

TOKEN_BY_NAME: dict[str, Token] = {t.name: t for t in VOCABULARY}
TOKEN_ORDER: dict[str, int] = {t.name: i for i, t in enumerate(VOCABULARY)}


def token_specificity(name: str) -> float:
    return TOKEN_BY_NAME[name].specificity


def find_token_occurrences(token_name: str, x: str) -> list[Span]:
    """All occurrence spans of a token in x, left to right.

    Class tokens match maximal non-overlapping runs.  Char tokens match
    each occurrence of their character.  The empty token yields a
    zero-width span at every boundary; anchors yield a single zero-width
    span at their end of the string.
    """
    return list(_occurrences_cached(token_name, x))


@lru_cache(maxsize=65536)
def _occurrences_cached(token_name: str, x: str) -> tuple[Span, ...]:
    token = TOKEN_BY_NAME[token_name]
    if token.kind == "empty":
        return tuple((i, i) for i in range(len(x) + 1))
    if token.kind == "anchor":
        return ((0, 0),) if token.name == START else ((len(x), len(x)),)
    if token.kind == "char":
        c = token.char
        return tuple((i, i + 1) for i, ch in enumerate(x) if ch == c)
    return tuple(m.span() for m in token.pattern.finditer(x))


@lru_cache(maxsize=16384)
def boundary_tables(x: str) -> tuple[tuple[frozenset[str], ...], tuple[frozenset[str], ...]]:
    """Per-boundary token sets: tokens ending at p, tokens starting at p."""
    n = len(x)
    ending: list[set[str]] = [set() for _ in range(n + 1)]
    starting: list[set[str]] = [set() for _ in range(n + 1)]
    for token in VOCABULARY:
        for start, end in _occurrences_cached(token.name, x):
            ending[end].add(token.name)
            starting[start].add(token.name)
    return tuple(frozenset(s) for s in ending), tuple(frozenset(s) for s in starting)


@lru_cache(maxsize=262144)
def pair_boundaries(x: str, left: str, right: str) -> tuple[int, ...]:
    """Boundaries p where `left` matches immediately left of p and `right`
    immediately right of p, in increasing order."""
    ends = {e for _, e in _occurrences_cached(left, x)}
    starts = {s for s, _ in _occurrences_cached(right, x)}
    return tuple(sorted(ends & starts))
