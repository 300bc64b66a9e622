"""Top-down deductive search over the grammar.

Learning a symbol against a spec means: for every production of the symbol,
invert one operator application with a witness function, learn the parameter
symbols against the deduced sub-specs, and combine the results.  Everything
returned satisfies the spec by construction.  Result sets are bounded,
deduplicated, and canonically ordered (score descending, print string
ascending), so searches are deterministic.

Sub-results for a production are paired best-first by the sum of child
scores through a lazy product that stops once enough parent candidates
exist.  Multi-example concatenation and span pairs are split conditionally:
the first parameter is learned against the disjunctive constraint, and each
resulting program's actual outputs pick the sub-spec for the second
parameter.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .grammar import ATOM, GRAMMAR, POS, PP, TRANSFORM, Grammar, Production
from .programs import (
    AbsPosNode,
    ConcatNode,
    ConstStrNode,
    InputState,
    PairNode,
    Program,
    RegexOccNode,
    RegexPosNode,
    SubstrNode,
    eval_node,
    eval_program,
    program_size,
)
from .ranking import DEFAULT_RANKER, RankingFunction
from .specs import OutputConstraint, Spec
from .syntax import print_program
from .tokens import TOKEN_ORDER
from .witness import (
    witness_abs_position,
    witness_concat_prefix,
    witness_concat_suffix,
    witness_conststr,
    witness_regex_occurrence,
    witness_regex_position,
    witness_substring,
)

NEG_INF = float("-inf")


@dataclass(frozen=True)
class Entry:
    program: Program
    score: float
    text: str
    size: int


@dataclass(frozen=True)
class ProgramSet:
    """Bounded, canonically ordered set of spec-satisfying programs."""

    entries: tuple[Entry, ...]

    @property
    def best_score(self) -> float:
        return self.entries[0].score if self.entries else NEG_INF

    @property
    def top(self) -> Entry | None:
        return self.entries[0] if self.entries else None

    def truncated(self, k: int) -> "ProgramSet":
        if k < 1:
            raise ValueError("k must be at least 1")
        return ProgramSet(self.entries[:k])

    def __len__(self) -> int:
        return len(self.entries)


EMPTY_SET = ProgramSet(())


@dataclass
class SearchStats:
    """Counters for one synthesis run."""

    node_expansions: int = 0
    branches_total: int = 0
    branches_explored: int = 0
    guided_decisions: int = 0
    guided_selected: int = 0
    guided_explored: int = 0
    fallbacks: int = 0
    wall_clock: float = 0.0
    decisions: list = field(default_factory=list)  # (symbol, spec, explored ids)


class DeductiveEngine:
    """Baseline search: explores every production at every decision point.

    capacity bounds every intermediate result set.  max_size, when given,
    drops programs with more AST nodes.  keep_all disables all bounding
    (used by desk-scale completeness checks).  trace_sink, when given, is
    called at every multi-production decision with the per-production
    result sets.
    """

    def __init__(
        self,
        ranker: RankingFunction | None = None,
        capacity: int = 10,
        max_size: int | None = None,
        keep_all: bool = False,
        stats: SearchStats | None = None,
        trace_sink=None,
        grammar: Grammar = GRAMMAR,
    ):
        if capacity < 1:
            raise ValueError("capacity must be at least 1")
        self.ranker = ranker or DEFAULT_RANKER
        self.capacity = capacity
        self.max_size = max_size
        self.keep_all = keep_all
        self.stats = stats if stats is not None else SearchStats()
        self.trace_sink = trace_sink
        self.grammar = grammar
        self._symbol_memo: dict = {}
        self._production_memo: dict = {}
        self._learners = {
            "transform:=Concat": self._learn_concat,
            "atom:=ConstStr": self._learn_conststr,
            "atom:=Substr": self._learn_substr,
            "pp:=Pair": self._learn_pair,
            "pp:=RegexOcc": self._learn_regex_occ,
            "pos:=AbsPos": self._learn_abs_pos,
            "pos:=RegexPos": self._learn_regex_pos,
        }

    # ------------------------------------------------------------------
    # public API

    def learn(self, symbol: str, spec: Spec, k: int | None = None) -> ProgramSet:
        """Top-k spec-satisfying programs for a grammar symbol."""
        if k is not None and k < 1:
            raise ValueError("k must be at least 1")
        result = self._symbol_set(symbol, spec)
        if self.keep_all and k is None:
            return result
        return result.truncated(min(k if k is not None else self.capacity,
                                    self.capacity))

    def best_score(self, symbol: str, production_id: str, spec: Spec) -> float:
        """Best attainable rank via one production; -inf when unsatisfiable."""
        production = self.grammar.production(production_id)
        if production.symbol != symbol:
            raise ValueError("production %s does not derive %s" % (production_id, symbol))
        return self._production_set(production, spec).best_score

    # ------------------------------------------------------------------
    # core recursion

    def _symbol_set(self, symbol: str, spec: Spec) -> ProgramSet:
        key = (symbol, spec)
        hit = self._symbol_memo.get(key)
        if hit is not None:
            return hit
        self.stats.node_expansions += 1
        productions = self.grammar.productions_of(symbol)
        result = self._expand(symbol, spec, productions)
        self._symbol_memo[key] = result
        return result

    def _expand(self, symbol: str, spec: Spec, productions) -> ProgramSet:
        sets = [self._production_set(p, spec) for p in productions]
        if len(productions) > 1:
            self.stats.branches_total += len(productions)
            self.stats.branches_explored += len(productions)
            self.stats.decisions.append((symbol, spec, tuple(p.id for p in productions)))
            if self.trace_sink is not None:
                self.trace_sink(symbol, spec, tuple(zip(productions, sets)))
        return self._merge_sets(sets)

    def _production_set(self, production: Production, spec: Spec) -> ProgramSet:
        key = (production.id, spec)
        hit = self._production_memo.get(key)
        if hit is not None:
            return hit
        self.stats.node_expansions += 1
        if production.id == "transform:=atom":
            result = self._symbol_set(ATOM, spec)
        elif not spec.satisfiable_everywhere:
            result = EMPTY_SET
        else:
            result = self._make_set(self._learners[production.id](spec), spec)
        self._production_memo[key] = result
        return result

    # ------------------------------------------------------------------
    # result-set plumbing

    def _entry(self, program: Program, spec: Spec) -> Entry:
        return Entry(
            program=program,
            score=self.ranker.rank(program, spec.states()),
            text=print_program(program),
            size=program_size(program),
        )

    def _make_set(self, programs, spec: Spec) -> ProgramSet:
        seen = set()
        entries = []
        for program in programs:
            entry = self._entry(program, spec)
            if entry.text in seen:
                continue
            if self.max_size is not None and entry.size > self.max_size:
                continue
            seen.add(entry.text)
            entries.append(entry)
        entries.sort(key=lambda e: (-e.score, e.text))
        if not self.keep_all:
            entries = entries[: self.capacity]
        return ProgramSet(tuple(entries))

    def _merge_sets(self, sets) -> ProgramSet:
        seen = set()
        entries = []
        for s in sets:
            for e in s.entries:
                if e.text not in seen:
                    seen.add(e.text)
                    entries.append(e)
        entries.sort(key=lambda e: (-e.score, e.text))
        if not self.keep_all:
            entries = entries[: self.capacity]
        return ProgramSet(tuple(entries))

    def _cross(self, left: ProgramSet, right: ProgramSet, overhead: int):
        """Pairs of entries by descending score sum (lazy bounded product).

        overhead is the parent's extra AST size on top of the children,
        used to prune oversize combinations up front.
        """
        a, b = left.entries, right.entries
        if not a or not b:
            return
        budget = None if self.max_size is None else self.max_size - overhead
        if self.keep_all:
            for ea in a:
                for eb in b:
                    if budget is None or ea.size + eb.size <= budget:
                        yield ea, eb
            return
        heap = [(-(a[0].score + b[0].score), 0, 0)]
        seen = {(0, 0)}
        yielded = 0
        while heap and yielded < self.capacity:
            _, i, j = heapq.heappop(heap)
            if budget is None or a[i].size + b[j].size <= budget:
                yield a[i], b[j]
                yielded += 1
            for ni, nj in ((i + 1, j), (i, j + 1)):
                if ni < len(a) and nj < len(b) and (ni, nj) not in seen:
                    seen.add((ni, nj))
                    heapq.heappush(heap, (-(a[ni].score + b[nj].score), ni, nj))

    # ------------------------------------------------------------------
    # per-production deduction

    def _learn_concat(self, spec: Spec):
        prefix_pairs = []
        for state, constraint in spec.constraints:
            prefixes = witness_concat_prefix(constraint)
            if not prefixes.satisfiable:
                return
            prefix_pairs.append((state, prefixes))
        atom_spec = Spec(tuple(prefix_pairs), spec.unlabeled)
        atoms = self._symbol_set(ATOM, atom_spec)
        for atom_entry in atoms.entries:
            rest_pairs = []
            ok = True
            for state, constraint in spec.constraints:
                produced = eval_program(atom_entry.program, state)
                suffixes = witness_concat_suffix(constraint, produced)
                if not suffixes.satisfiable:
                    ok = False
                    break
                rest_pairs.append((state, suffixes))
            if not ok:
                continue
            rest_spec = Spec(tuple(rest_pairs), spec.unlabeled)
            rests = self._symbol_set(TRANSFORM, rest_spec)
            single = ProgramSet((atom_entry,))
            for ea, er in self._cross(single, rests, overhead=1):
                yield ConcatNode(ea.program, er.program)

    def _learn_conststr(self, spec: Spec):
        for literal in witness_conststr(spec):
            yield ConstStrNode(literal)

    def _learn_substr(self, spec: Spec):
        arity = min(len(state.inputs) for state, _ in spec.constraints)
        for idx in range(arity):
            pp_pairs = []
            ok = True
            for state, constraint in spec.constraints:
                spans = witness_substring(state, constraint)[idx]
                if not spans.satisfiable:
                    ok = False
                    break
                pp_pairs.append((InputState((state.inputs[idx],)), spans))
            if not ok:
                continue
            unlabeled = tuple(
                InputState((u.inputs[idx],)) for u in spec.unlabeled if idx < len(u.inputs)
            )
            pp_spec = Spec(tuple(pp_pairs), unlabeled)
            for entry in self._symbol_set(PP, pp_spec).entries:
                yield SubstrNode(idx, entry.program)

    def _learn_pair(self, spec: Spec):
        start_pairs = []
        for state, constraint in spec.constraints:
            starts = OutputConstraint.of(*(span[0] for span in constraint.values))
            start_pairs.append((state, starts))
        start_spec = Spec(tuple(start_pairs), spec.unlabeled)
        starts = self._symbol_set(POS, start_spec)
        for start_entry in starts.entries:
            end_pairs = []
            for state, constraint in spec.constraints:
                produced = eval_node(start_entry.program, state)
                ends = OutputConstraint.of(
                    *(span[1] for span in constraint.values if span[0] == produced)
                )
                end_pairs.append((state, ends))
            if not all(c.satisfiable for _, c in end_pairs):
                continue
            end_spec = Spec(tuple(end_pairs), spec.unlabeled)
            ends = self._symbol_set(POS, end_spec)
            single = ProgramSet((start_entry,))
            for es, ee in self._cross(single, ends, overhead=1):
                yield PairNode(es.program, ee.program)

    def _learn_regex_occ(self, spec: Spec):
        common = None
        for state, constraint in spec.constraints:
            x = state.inputs[0]
            admissible = set()
            for span in constraint.values:
                admissible.update(witness_regex_occurrence(x, span))
            common = admissible if common is None else common & admissible
            if not common:
                return
        for token, occurrence in sorted(common, key=lambda t: (TOKEN_ORDER[t[0]], t[1])):
            yield RegexOccNode(token, occurrence)

    def _learn_abs_pos(self, spec: Spec):
        common = None
        for state, constraint in spec.constraints:
            x = state.inputs[0]
            admissible = set()
            for p in constraint.values:
                admissible.update(witness_abs_position(x, p).values)
            common = admissible if common is None else common & admissible
            if not common:
                return
        for k in sorted(common):
            yield AbsPosNode(k)

    def _learn_regex_pos(self, spec: Spec):
        common = None
        for state, constraint in spec.constraints:
            x = state.inputs[0]
            admissible = set()
            for p in constraint.values:
                admissible.update(witness_regex_position(x, p))
            common = admissible if common is None else common & admissible
            if not common:
                return
        ordered = sorted(common, key=lambda t: (TOKEN_ORDER[t[0]], TOKEN_ORDER[t[1]], t[2]))
        for left, right, occurrence in ordered:
            yield RegexPosNode(left, right, occurrence)


def learn(spec: Spec, k: int = 1, **engine_kwargs) -> ProgramSet:
    """Convenience wrapper: learn transform-level programs for a spec."""
    engine = DeductiveEngine(**engine_kwargs)
    return engine.learn(TRANSFORM, spec, k)
