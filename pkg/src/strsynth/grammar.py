"""The DSL grammar as data.

Four nonterminals, two productions each:

    transform -> atom | Concat(atom, transform)
    atom      -> ConstStr(literal) | Substr(input k, pp)
    pp        -> Pair(pos, pos) | RegexOcc(token, occurrence)
    pos       -> AbsPos(k) | RegexPos(token, token, occurrence)

The search engine walks this table; witness logic is dispatched by
production id.  Symbol depth is the distance from the start symbol and
doubles as the level tag on trace records.
"""

from __future__ import annotations

from dataclasses import dataclass

TRANSFORM = "transform"
ATOM = "atom"
PP = "pp"
POS = "pos"


@dataclass(frozen=True)
class Symbol:
    name: str
    value_type: str  # "string" | "span" | "position"
    depth: int


@dataclass(frozen=True)
class Production:
    id: str
    symbol: str
    operator: str
    params: tuple[str, ...]  # nonterminal parameters, in order


@dataclass(frozen=True)
class Grammar:
    symbols: tuple[Symbol, ...]
    productions: tuple[Production, ...]
    start: str

    def symbol(self, name: str) -> Symbol:
        for s in self.symbols:
            if s.name == name:
                return s
        raise KeyError(name)

    def productions_of(self, symbol: str) -> tuple[Production, ...]:
        return tuple(p for p in self.productions if p.symbol == symbol)

    def production(self, production_id: str) -> Production:
        for p in self.productions:
            if p.id == production_id:
                return p
        raise KeyError(production_id)


GRAMMAR = Grammar(
    symbols=(
        Symbol(TRANSFORM, "string", 0),
        Symbol(ATOM, "string", 1),
        Symbol(PP, "span", 2),
        Symbol(POS, "position", 3),
    ),
    productions=(
        Production("transform:=atom", TRANSFORM, "atom", (ATOM,)),
        Production("transform:=Concat", TRANSFORM, "Concat", (ATOM, TRANSFORM)),
        Production("atom:=ConstStr", ATOM, "ConstStr", ()),
        Production("atom:=Substr", ATOM, "Substr", (PP,)),
        Production("pp:=Pair", PP, "Pair", (POS, POS)),
        Production("pp:=RegexOcc", PP, "RegexOcc", ()),
        Production("pos:=AbsPos", POS, "AbsPos", ()),
        Production("pos:=RegexPos", POS, "RegexPos", ()),
    ),
    start=TRANSFORM,
)

PRODUCTION_IDS = tuple(p.id for p in GRAMMAR.productions)
