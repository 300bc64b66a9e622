"""Ranking: a fixed scoring function over programs.

The score mixes structure and behavior.  Substring atoms are rewarded,
constants and absolute positions are taxed, token-anchored positions gain
their tokens' specificity, and any state on which the program errors or
produces an empty value costs a large penalty.  Higher is better; all
search-level decisions (truncation, branch-and-bound, labels) treat this
function as ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .programs import (
    AbsPosNode,
    ConcatNode,
    ConstStrNode,
    EvalError,
    InputState,
    Node,
    RegexOccNode,
    RegexPosNode,
    SubstrNode,
    eval_node,
    iter_nodes,
    value_is_empty,
)
from .tokens import token_specificity


@dataclass(frozen=True)
class RankingFunction:
    substr_atom_bonus: float = 10.0
    conststr_char_penalty: float = 2.0
    abs_pos_penalty: float = 4.0
    regex_node_bonus: float = 3.0
    # Must exceed substr_atom_bonus - 2*abs_pos_penalty, otherwise splitting
    # any extraction at an arbitrary cut point pays for itself and the best
    # program fragments into positionally brittle single-character pieces.
    # 6 (not the minimal 3) widens the one-atom-vs-split margin to 4 points,
    # which score models must resolve at every substring-extraction decision;
    # splits at genuine token boundaries still profit because each regular-
    # expression position contributes regex_node_bonus plus its two token
    # specificities, far more than the extra join costs.
    concat_penalty: float = 6.0
    bad_state_penalty: float = 50.0
    specificity_override: dict = field(default_factory=dict, hash=False, compare=False)

    def _specificity(self, token: str) -> float:
        if token in self.specificity_override:
            return self.specificity_override[token]
        return token_specificity(token)

    def structural_score(self, program: Node) -> float:
        score = 0.0
        for node in iter_nodes(program):
            if isinstance(node, SubstrNode):
                score += self.substr_atom_bonus
            elif isinstance(node, ConstStrNode):
                score -= self.conststr_char_penalty * len(node.literal)
            elif isinstance(node, ConcatNode):
                score -= self.concat_penalty
            elif isinstance(node, AbsPosNode):
                score -= self.abs_pos_penalty
            elif isinstance(node, RegexPosNode):
                score += self.regex_node_bonus
                score += self._specificity(node.left) + self._specificity(node.right)
            elif isinstance(node, RegexOccNode):
                score += self.regex_node_bonus + self._specificity(node.token)
        return score

    def behavior_penalty(self, program: Node, states) -> float:
        penalty = 0.0
        for state in states:
            try:
                value = eval_node(program, state)
            except EvalError:
                penalty += self.bad_state_penalty
                continue
            if value_is_empty(value):
                penalty += self.bad_state_penalty
        return penalty

    def rank(self, program: Node, states: tuple[InputState, ...]) -> float:
        """Score a program against the states it was learned from."""
        return self.structural_score(program) - self.behavior_penalty(program, states)


DEFAULT_RANKER = RankingFunction()
