"""Witness functions: invert one production step against an output constraint.

Each function answers "what must the parameters produce so that this
operator produces the required value".  They are pure, per-example where
possible, and return order-canonical results.  Atoms are never asked to
produce the empty string; concatenation splits only at non-empty proper
prefixes, which keeps the search finite.
"""

from __future__ import annotations

from .programs import InputState
from .specs import OutputConstraint, Spec
from .tokens import (
    TOKEN_ORDER,
    VOCABULARY,
    boundary_tables,
    find_token_occurrences,
    pair_boundaries,
)

Span = tuple[int, int]


def witness_concat_prefix(values: OutputConstraint) -> OutputConstraint:
    """Every non-empty proper prefix of any admissible value."""
    prefixes = set()
    for v in values.values:
        for cut in range(1, len(v)):
            prefixes.add(v[:cut])
    if not prefixes:
        return OutputConstraint.unsatisfiable()
    return OutputConstraint.of(*prefixes)


def witness_concat_suffix(values: OutputConstraint, chosen_prefix: str) -> OutputConstraint:
    """What remains of each admissible value once the atom produced the
    chosen prefix."""
    suffixes = {
        v[len(chosen_prefix):]
        for v in values.values
        if v.startswith(chosen_prefix) and len(v) > len(chosen_prefix)
    }
    if not suffixes:
        return OutputConstraint.unsatisfiable()
    return OutputConstraint.of(*suffixes)


def witness_conststr(spec: Spec) -> list[str]:
    """Literals admissible for every example: the intersection of the
    per-example disjunctions, empty string excluded."""
    common: set | None = None
    for _, constraint in spec.constraints:
        values = {v for v in constraint.values if v != ""}
        common = values if common is None else common & values
        if not common:
            return []
    return sorted(common)


def find_value_spans(x: str, value: str) -> list[Span]:
    """All spans where value occurs in x, left to right (overlaps allowed)."""
    if value == "":
        return []
    spans = []
    start = 0
    while True:
        i = x.find(value, start)
        if i < 0:
            return spans
        spans.append((i, i + len(value)))
        start = i + 1


def witness_substring(state: InputState, values: OutputConstraint) -> dict[int, OutputConstraint]:
    """Per input index, the spans that produce an admissible value.

    Indexes whose input contains no admissible value map to an
    unsatisfiable constraint.
    """
    out: dict[int, OutputConstraint] = {}
    for idx, x in enumerate(state.inputs):
        spans: set[Span] = set()
        for v in values.values:
            spans.update(find_value_spans(x, v))
        out[idx] = OutputConstraint.of(*spans) if spans else OutputConstraint.unsatisfiable()
    return out


def witness_abs_position(x: str, p: int) -> OutputConstraint:
    """Both absolute encodings of boundary p: from the left and from the
    right."""
    return OutputConstraint.of(p, p - len(x) - 1)


def _signed(idx: int, count: int) -> tuple[int, int]:
    return idx + 1, idx - count


def witness_regex_position(x: str, p: int) -> list[tuple[str, str, int]]:
    """Token pairs matching around boundary p, each with its from-left and
    from-right occurrence index among the boundaries that pair matches.
    The (Empty, Empty) pair is excluded."""
    ending, starting = boundary_tables(x)
    triples = []
    for left in ending[p]:
        for right in starting[p]:
            if left == "Empty" and right == "Empty":
                continue
            boundaries = pair_boundaries(x, left, right)
            idx = boundaries.index(p)
            for occ in _signed(idx, len(boundaries)):
                triples.append((left, right, occ))
    triples.sort(key=lambda t: (TOKEN_ORDER[t[0]], TOKEN_ORDER[t[1]], t[2]))
    return triples


def witness_regex_occurrence(x: str, span: Span) -> list[tuple[str, int]]:
    """Tokens whose occurrence list contains exactly this span, with both
    occurrence indices."""
    out = []
    for token in VOCABULARY:
        occs = find_token_occurrences(token.name, x)
        if span in occs:
            idx = occs.index(span)
            for occ in _signed(idx, len(occs)):
                out.append((token.name, occ))
    out.sort(key=lambda t: (TOKEN_ORDER[t[0]], t[1]))
    return out
