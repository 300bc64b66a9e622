"""Inductive specifications: what a sub-program must produce, per example.

A constraint pairs an input state with a disjunction of admissible output
values.  Value types follow the grammar symbol: strings for transform and
atom, (start, end) spans for position pairs, boundary integers for position
expressions.  An empty disjunction marks the constraint unsatisfiable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .programs import InputState

Value = object  # str | tuple[int, int] | int


def _canonical(values) -> tuple:
    return tuple(sorted(set(values), key=lambda v: (0, v) if isinstance(v, str) else (1, v)))


@dataclass(frozen=True)
class OutputConstraint:
    """Disjunction of admissible values; no values means unsatisfiable."""

    values: tuple = ()

    @staticmethod
    def of(*values) -> "OutputConstraint":
        return OutputConstraint(_canonical(values))

    @staticmethod
    def unsatisfiable() -> "OutputConstraint":
        return OutputConstraint(())

    @property
    def satisfiable(self) -> bool:
        return bool(self.values)

    def admits(self, value) -> bool:
        return value in self.values


@dataclass(frozen=True)
class Spec:
    """Per-example constraints plus optional unlabeled inputs.

    Unlabeled inputs carry no output requirement; they only take part in
    ranking, where erroring or empty behavior is penalized.
    """

    constraints: tuple[tuple[InputState, OutputConstraint], ...]
    unlabeled: tuple[InputState, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.constraints:
            raise ValueError("a spec needs at least one constraint")

    @staticmethod
    def of(pairs, unlabeled=()) -> "Spec":
        constraints = []
        for state, values in pairs:
            if isinstance(state, str):
                state = InputState((state,))
            elif isinstance(state, (list, tuple)) and not isinstance(state, InputState):
                state = InputState(tuple(state))
            if not isinstance(values, OutputConstraint):
                if isinstance(values, (str, int, tuple)) and not (
                    isinstance(values, tuple) and values and isinstance(values[0], (str, tuple))
                ):
                    values = OutputConstraint.of(values)
                else:
                    values = OutputConstraint.of(*values)
            constraints.append((state, values))
        states = tuple(
            InputState((u,)) if isinstance(u, str) else (u if isinstance(u, InputState) else InputState(tuple(u)))
            for u in unlabeled
        )
        return Spec(tuple(constraints), states)

    @property
    def m(self) -> int:
        return len(self.constraints)

    def states(self) -> tuple[InputState, ...]:
        return tuple(state for state, _ in self.constraints) + self.unlabeled

    @property
    def satisfiable_everywhere(self) -> bool:
        return all(c.satisfiable for _, c in self.constraints)

    def satisfied_by_values(self, values) -> bool:
        return all(c.admits(v) for (_, c), v in zip(self.constraints, values))
