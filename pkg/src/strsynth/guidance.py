"""Model-guided search: branch-selection controllers over the deductive engine.

At every multi-production decision point where a score model is assigned to
the symbol, the controller turns predicted per-production scores into a
subset of productions to explore.  Three controllers exist:

* threshold: explore every branch whose prediction is within theta of the
  best prediction (theta = 0 degenerates to argmax, theta = infinity to the
  baseline explore-everything behavior);
* branch-and-bound: explore branches in descending predicted order, keep
  from each result only the prefix whose actual scores beat the next
  branch's prediction, and stop once the remaining result budget is spent;
* banded branch-and-bound: drop branches outside a 0.2-wide prediction band
  first, then run branch-and-bound on the survivors.

Mis-prediction can only lose candidate programs, never fabricate invalid
ones: everything returned still comes out of the witness-driven engine.
An empty controller result triggers one explore-everything retry at that
decision point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .search import DeductiveEngine, ProgramSet, SearchStats

NEG_INF = float("-inf")

THRESHOLD = "thr"
BRANCH_AND_BOUND = "bnb"
BANDED_BNB = "bb02"
CONTROLLER_KINDS = (THRESHOLD, BRANCH_AND_BOUND, BANDED_BNB)

# Symbols eligible for model guidance, keyed by the conventional model name.
MODEL_SYMBOLS = {"t1": "transform", "pp": "pp", "pos": "pos"}


@dataclass(frozen=True)
class ControllerConfig:
    kind: str = BRANCH_AND_BOUND
    theta: float = 0.2
    score_floor: float = NEG_INF

    def __post_init__(self) -> None:
        if self.kind not in CONTROLLER_KINDS:
            raise ValueError("unknown controller kind %r" % (self.kind,))
        if self.theta < 0:
            raise ValueError("theta must be nonnegative")


@dataclass(frozen=True)
class ModelAssignment:
    """Per-symbol score models; symbols without one explore all branches."""

    models: dict

    @staticmethod
    def by_name(**named_models) -> "ModelAssignment":
        mapping = {}
        for name, model in named_models.items():
            if name not in MODEL_SYMBOLS:
                raise ValueError("unknown model slot %r (expected one of %s)"
                                 % (name, ", ".join(sorted(MODEL_SYMBOLS))))
            if model is not None:
                mapping[MODEL_SYMBOLS[name]] = model
        return ModelAssignment(mapping)

    def get(self, symbol: str):
        return self.models.get(symbol)


def threshold_selection(scores, theta: float):
    """Indices of branches within theta of the best predicted score."""
    best = max(scores)
    return [i for i, s in enumerate(scores) if s >= best - theta]


def bnb_schedule(order, scores, learn_fn, k: int, floor: float = NEG_INF):
    """Branch-and-bound over branches already sorted by descending score.

    order: branch keys sorted descending by predicted score; scores: the
    matching predictions; learn_fn(key, k) -> ProgramSet.  Returns
    (explored keys, kept entries).  Branches predicted below the floor are
    pruned before exploration.
    """
    survivors = [(key, s) for key, s in zip(order, scores) if s >= floor]
    explored = []
    kept = []
    remaining = k
    for i, (key, _) in enumerate(survivors):
        result = learn_fn(key, remaining)
        explored.append(key)
        bound = survivors[i + 1][1] if i + 1 < len(survivors) else NEG_INF
        taken = [e for e in result.entries if e.score >= bound]
        kept.extend(taken)
        remaining -= len(taken)
        if remaining <= 0:
            break
    return explored, kept


class GuidedEngine(DeductiveEngine):
    """Deductive engine whose decision points consult score models.

    Decision points for symbols without an assigned model behave exactly
    like the baseline engine.  Recursive sub-searches stay guided.
    """

    def __init__(self, assignment: ModelAssignment,
                 controller: ControllerConfig | None = None, **engine_kwargs):
        super().__init__(**engine_kwargs)
        self.assignment = assignment
        self.controller = controller or ControllerConfig()

    def _expand(self, symbol: str, spec, productions) -> ProgramSet:
        model = self.assignment.get(symbol) if len(productions) > 1 else None
        if model is None:
            return super()._expand(symbol, spec, productions)

        self.stats.guided_decisions += 1
        self.stats.branches_total += len(productions)
        predictions = [model.predict(p.id, spec) for p in productions]
        # Canonical descending order; ties broken by production id so that
        # permuting the productions cannot change the outcome.
        order = sorted(range(len(productions)),
                       key=lambda i: (-predictions[i], productions[i].id))
        floor = getattr(model, "label_floor", self.controller.score_floor)

        config = self.controller
        if config.kind == THRESHOLD:
            chosen = [i for i in order
                      if predictions[i] >= max(predictions) - config.theta]
            if config.theta == 0:
                # Degenerate argmax mode explores exactly one branch even
                # when predictions tie; the canonical order decides.
                chosen = chosen[:1]
            entries = []
            for i in chosen:
                entries.extend(self._production_set(productions[i], spec).entries)
            explored = list(chosen)
        else:
            if config.kind == BANDED_BNB:
                best = max(predictions)
                order = [i for i in order if predictions[i] >= best - config.theta]
            explored, entries = bnb_schedule(
                order,
                [predictions[i] for i in order],
                lambda i, k: self._production_set(productions[i], spec).truncated(max(k, 1)),
                self.capacity,
                floor,
            )

        self.stats.guided_selected += len(explored)

        result = self._merge_sets((ProgramSet(tuple(entries)),))
        if not result.entries:
            # The controller came back empty-handed — either it skipped
            # branches outright or the bound filter discarded everything the
            # explored branches returned.  Explore everything at this
            # decision point once so guidance can only cost recall of
            # alternatives, never solvability.  Production sets are memoized,
            # so re-visiting an already-explored branch is a dictionary hit.
            self.stats.fallbacks += 1
            explored = list(range(len(productions)))
            sets = [self._production_set(p, spec) for p in productions]
            result = self._merge_sets(sets)

        self.stats.branches_explored += len(explored)
        self.stats.guided_explored += len(explored)
        self.stats.decisions.append(
            (symbol, spec, tuple(productions[i].id for i in sorted(explored))))
        return result
