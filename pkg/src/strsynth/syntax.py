"""Concrete syntax: canonical printing and parsing of programs.

Every operator prints as its name followed by parenthesized, comma-separated
arguments.  String literals are double-quoted with \\\" \\\\ \\n \\t and
\\xNN escapes (plus \\uNNNN / \\UNNNNNNNN for code points past 0xFF).
Tokens print by their canonical names, e.g. Digits or Char('(').
print_program . parse_program is the identity on ASTs.
"""

from __future__ import annotations

from .programs import (
    AbsPosNode,
    ConcatNode,
    ConstStrNode,
    Node,
    PairNode,
    Program,
    RegexOccNode,
    RegexPosNode,
    SubstrNode,
)
from .tokens import TOKEN_BY_NAME, char_token_name


class ParseError(Exception):
    def __init__(self, offset: int, message: str):
        super().__init__("offset %d: %s" % (offset, message))
        self.offset = offset
        self.reason = message


_SIMPLE_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t"}


def escape_string(s: str) -> str:
    out = ['"']
    for c in s:
        if c in _SIMPLE_ESCAPES:
            out.append(_SIMPLE_ESCAPES[c])
        elif 0x20 <= ord(c) <= 0x7E:
            out.append(c)
        elif ord(c) <= 0xFF:
            out.append("\\x%02x" % ord(c))
        elif ord(c) <= 0xFFFF:
            out.append("\\u%04x" % ord(c))
        else:
            out.append("\\U%08x" % ord(c))
    out.append('"')
    return "".join(out)


def print_program(node: Node) -> str:
    if isinstance(node, ConcatNode):
        return "Concat(%s, %s)" % (print_program(node.atom), print_program(node.rest))
    if isinstance(node, ConstStrNode):
        return "ConstStr(%s)" % escape_string(node.literal)
    if isinstance(node, SubstrNode):
        return "Substr(%d, %s)" % (node.input_index, print_program(node.pair))
    if isinstance(node, PairNode):
        return "Pair(%s, %s)" % (print_program(node.start), print_program(node.end))
    if isinstance(node, RegexOccNode):
        return "RegexOcc(%s, %d)" % (node.token, node.occurrence)
    if isinstance(node, AbsPosNode):
        return "AbsPos(%d)" % node.k
    if isinstance(node, RegexPosNode):
        return "RegexPos(%s, %s, %d)" % (node.left, node.right, node.occurrence)
    raise TypeError("cannot print %r" % (node,))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> ParseError:
        return ParseError(self.pos, message)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r\n":
            self.pos += 1

    def expect(self, literal: str) -> None:
        self.skip_ws()
        if not self.text.startswith(literal, self.pos):
            raise self.error("expected %r" % literal)
        self.pos += len(literal)

    def ident(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isalpha():
            self.pos += 1
        if self.pos == start:
            raise self.error("expected an operator or token name")
        return self.text[start:self.pos]

    def integer(self) -> int:
        self.skip_ws()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] == "-":
            self.pos += 1
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start or self.text[start:self.pos] == "-":
            raise self.error("expected an integer")
        return int(self.text[start:self.pos])

    def _escape(self, quote: str) -> str:
        # self.pos sits just past a backslash
        if self.pos >= len(self.text):
            raise self.error("unterminated escape")
        c = self.text[self.pos]
        self.pos += 1
        if c == "n":
            return "\n"
        if c == "t":
            return "\t"
        if c in ("\\", '"', "'"):
            return c
        if c in ("x", "u", "U"):
            width = {"x": 2, "u": 4, "U": 8}[c]
            digits = self.text[self.pos:self.pos + width]
            if len(digits) != width:
                raise self.error("truncated \\%s escape" % c)
            try:
                code = int(digits, 16)
            except ValueError:
                raise self.error("bad hex digits in \\%s escape" % c) from None
            self.pos += width
            return chr(code)
        raise self.error("unknown escape \\%s" % c)

    def quoted(self, quote: str) -> str:
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != quote:
            raise self.error("expected %s-quoted literal" % quote)
        self.pos += 1
        out = []
        while True:
            if self.pos >= len(self.text):
                raise self.error("unterminated literal")
            c = self.text[self.pos]
            self.pos += 1
            if c == quote:
                return "".join(out)
            if c == "\\":
                out.append(self._escape(quote))
            else:
                out.append(c)

    def token_name(self) -> str:
        name = self.ident()
        if name == "Char":
            self.expect("(")
            c = self.quoted("'")
            if len(c) != 1:
                raise self.error("Char literal must hold exactly one character")
            self.expect(")")
            name = char_token_name(c)
            if name not in TOKEN_BY_NAME:
                raise self.error("character %r has no token" % c)
            return name
        if name not in TOKEN_BY_NAME or TOKEN_BY_NAME[name].kind == "char":
            raise self.error("unknown token %r" % name)
        return name

    def occurrence(self) -> int:
        value = self.integer()
        if value == 0:
            raise self.error("occurrence index cannot be 0")
        return value

    def pos_expr(self):
        self.skip_ws()
        mark = self.pos
        name = self.ident()
        if name == "AbsPos":
            self.expect("(")
            k = self.integer()
            self.expect(")")
            return AbsPosNode(k)
        if name == "RegexPos":
            self.expect("(")
            left = self.token_name()
            self.expect(",")
            right = self.token_name()
            self.expect(",")
            occ = self.occurrence()
            self.expect(")")
            return RegexPosNode(left, right, occ)
        self.pos = mark
        raise self.error("expected AbsPos or RegexPos")

    def pos_pair(self):
        self.skip_ws()
        mark = self.pos
        name = self.ident()
        if name == "Pair":
            self.expect("(")
            start = self.pos_expr()
            self.expect(",")
            end = self.pos_expr()
            self.expect(")")
            return PairNode(start, end)
        if name == "RegexOcc":
            self.expect("(")
            token = self.token_name()
            self.expect(",")
            occ = self.occurrence()
            self.expect(")")
            return RegexOccNode(token, occ)
        self.pos = mark
        raise self.error("expected Pair or RegexOcc")

    def program(self) -> Program:
        self.skip_ws()
        mark = self.pos
        name = self.ident()
        if name == "Concat":
            self.expect("(")
            atom = self.program()
            if not isinstance(atom, (ConstStrNode, SubstrNode)):
                self.pos = mark
                raise self.error("Concat's first argument must be an atom")
            self.expect(",")
            rest = self.program()
            self.expect(")")
            return ConcatNode(atom, rest)
        if name == "ConstStr":
            self.expect("(")
            literal = self.quoted('"')
            self.expect(")")
            return ConstStrNode(literal)
        if name == "Substr":
            self.expect("(")
            index = self.integer()
            if index < 0:
                raise self.error("input index must be non-negative")
            self.expect(",")
            pair = self.pos_pair()
            self.expect(")")
            return SubstrNode(index, pair)
        self.pos = mark
        raise self.error("expected Concat, ConstStr or Substr")


def parse_program(text: str) -> Program:
    parser = _Parser(text)
    program = parser.program()
    parser.skip_ws()
    if parser.pos != len(parser.text):
        raise parser.error("trailing input after program")
    return program
