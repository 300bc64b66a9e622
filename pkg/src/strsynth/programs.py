"""Program representation and evaluation for the string-transformation DSL.

A program is a right-linear concatenation of atoms.  An atom either emits a
constant string or extracts a substring of one of the inputs, with the
substring span given either by a pair of position expressions or by the
k-th occurrence of a token.  Position expressions resolve to boundaries
(0..len inclusive) of the selected input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

from .tokens import TOKEN_BY_NAME, find_token_occurrences, pair_boundaries


class EvalError(Exception):
    """Evaluation failed on the given input state."""


class IndexOutOfRange(EvalError):
    pass


class EmptyValue(EvalError):
    """An atom evaluated to the empty string.

    Atoms are required to make progress: a concatenation piece that
    contributes nothing is treated as inapplicable on that state, the same
    way an out-of-range position is.  Without this rule a program whose
    pieces silently collapse on unseen inputs would look healthy to the
    ranker."""


@dataclass(frozen=True)
class InputState:
    """One row of input strings a program runs against."""

    inputs: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.inputs:
            raise ValueError("input state needs at least one string")
        if not all(isinstance(value, str) for value in self.inputs):
            raise TypeError("inputs must be strings")


def _check_occurrence(occurrence: int) -> None:
    if occurrence == 0:
        raise ValueError("occurrence index is 1-based from the left, -1-based from the right")


@dataclass(frozen=True)
class AbsPosNode:
    """Absolute boundary: k from the left when k >= 0, len+k+1 when k < 0."""

    k: int


@dataclass(frozen=True)
class RegexPosNode:
    """The j-th boundary whose left context matches `left` and right
    context matches `right`."""

    left: str
    right: str
    occurrence: int

    def __post_init__(self) -> None:
        _check_occurrence(self.occurrence)
        for name in (self.left, self.right):
            if name not in TOKEN_BY_NAME:
                raise ValueError("unknown token %r" % name)


PosExpr = Union[AbsPosNode, RegexPosNode]


@dataclass(frozen=True)
class PairNode:
    start: PosExpr
    end: PosExpr


@dataclass(frozen=True)
class RegexOccNode:
    """Span of the j-th occurrence of a token."""

    token: str
    occurrence: int

    def __post_init__(self) -> None:
        _check_occurrence(self.occurrence)
        if self.token not in TOKEN_BY_NAME:
            raise ValueError("unknown token %r" % self.token)


PosPair = Union[PairNode, RegexOccNode]


@dataclass(frozen=True)
class ConstStrNode:
    literal: str


@dataclass(frozen=True)
class SubstrNode:
    input_index: int
    pair: PosPair

    def __post_init__(self) -> None:
        if self.input_index < 0:
            raise ValueError("input index must be non-negative")


@dataclass(frozen=True)
class ConcatNode:
    atom: Union[ConstStrNode, SubstrNode]
    rest: "Program"


Program = Union[ConcatNode, ConstStrNode, SubstrNode]
Node = Union[Program, PairNode, RegexOccNode, AbsPosNode, RegexPosNode]


def resolve_position(expr: PosExpr, x: str) -> int:
    """Resolve a position expression to a boundary in [0, len(x)]."""
    if isinstance(expr, AbsPosNode):
        pos = expr.k if expr.k >= 0 else len(x) + expr.k + 1
        if not 0 <= pos <= len(x):
            raise IndexOutOfRange("position %d outside %r" % (expr.k, x))
        return pos
    boundaries = pair_boundaries(x, expr.left, expr.right)
    idx = expr.occurrence - 1 if expr.occurrence > 0 else len(boundaries) + expr.occurrence
    if not 0 <= idx < len(boundaries):
        raise IndexOutOfRange(
            "no boundary %d for (%s, %s) in %r" % (expr.occurrence, expr.left, expr.right, x)
        )
    return boundaries[idx]


def resolve_span(pair: PosPair, x: str) -> tuple[int, int]:
    """Resolve a position pair to a span (start, end), start <= end."""
    if isinstance(pair, PairNode):
        start = resolve_position(pair.start, x)
        end = resolve_position(pair.end, x)
        if start > end:
            raise IndexOutOfRange("span starts after it ends (%d > %d)" % (start, end))
        return start, end
    occs = find_token_occurrences(pair.token, x)
    idx = pair.occurrence - 1 if pair.occurrence > 0 else len(occs) + pair.occurrence
    if not 0 <= idx < len(occs):
        raise IndexOutOfRange("no occurrence %d of %s in %r" % (pair.occurrence, pair.token, x))
    return occs[idx]


def eval_program(program: Program, state: InputState) -> str:
    """Run a transform-level program on an input state."""
    if isinstance(program, ConcatNode):
        return eval_program(program.atom, state) + eval_program(program.rest, state)
    if isinstance(program, ConstStrNode):
        if program.literal == "":
            raise EmptyValue("constant atom is empty")
        return program.literal
    if isinstance(program, SubstrNode):
        if program.input_index >= len(state.inputs):
            raise IndexOutOfRange("input %d missing (arity %d)" % (program.input_index, len(state.inputs)))
        x = state.inputs[program.input_index]
        start, end = resolve_span(program.pair, x)
        if start == end:
            raise EmptyValue("substring atom collapsed to width zero at %d" % start)
        return x[start:end]
    raise TypeError("not a transform-level program: %r" % (program,))


def eval_node(node: Node, state: InputState):
    """Evaluate any grammar-level node.  Transform/atom nodes yield a
    string; position pairs yield a span over the state's first input;
    position expressions yield a boundary."""
    if isinstance(node, (ConcatNode, ConstStrNode, SubstrNode)):
        return eval_program(node, state)
    if isinstance(node, (PairNode, RegexOccNode)):
        return resolve_span(node, state.inputs[0])
    if isinstance(node, (AbsPosNode, RegexPosNode)):
        return resolve_position(node, state.inputs[0])
    raise TypeError("cannot evaluate %r" % (node,))


def value_is_empty(value) -> bool:
    if isinstance(value, str):
        return value == ""
    if isinstance(value, tuple):
        return value[0] == value[1]
    return False


def iter_nodes(node: Node) -> Iterator[Node]:
    yield node
    if isinstance(node, ConcatNode):
        yield from iter_nodes(node.atom)
        yield from iter_nodes(node.rest)
    elif isinstance(node, SubstrNode):
        yield from iter_nodes(node.pair)
    elif isinstance(node, PairNode):
        yield from iter_nodes(node.start)
        yield from iter_nodes(node.end)


def program_size(node: Node) -> int:
    return sum(1 for _ in iter_nodes(node))
