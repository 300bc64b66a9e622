"""Search-decision traces: the supervised dataset for score models.

Every multi-production decision point the baseline engine passes through
yields one record per production: which production, at which grammar
symbol and depth, against which spec, and the best score actually attained
by any program derived through that production (the training label).
Unsatisfiable productions carry a negative-infinity label.

Records serialize to JSON Lines; a record's spec snapshot embeds the
constraint examples so the file stands alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .grammar import GRAMMAR
from .programs import InputState
from .specs import OutputConstraint, Spec

NEG_INF = float("-inf")

# One snapshot example: (inputs tuple, admissible output values tuple).
Snapshot = tuple[tuple[tuple[str, ...], tuple], ...]


@dataclass(frozen=True)
class TraceRecord:
    production: str
    symbol: str
    depth: int
    examples: Snapshot
    label: float

    @property
    def m(self) -> int:
        return len(self.examples)

    def group_key(self):
        """Records of one decision point share this key."""
        return (self.symbol, self.depth, self.examples)


def snapshot_of(spec: Spec) -> Snapshot:
    """Constraint examples only; unlabeled inputs are not part of a record."""
    return tuple(
        (state.inputs, constraint.values) for state, constraint in spec.constraints
    )


def spec_from_snapshot(snapshot: Snapshot) -> Spec:
    return Spec(
        tuple(
            (InputState(tuple(inputs)), OutputConstraint(tuple(values)))
            for inputs, values in snapshot
        )
    )


class TraceCollector:
    """Connects to the engine's trace sink and accumulates records."""

    def __init__(self) -> None:
        self.records: list[TraceRecord] = []

    def sink(self, symbol: str, spec: Spec, production_sets) -> None:
        depth = GRAMMAR.symbol(symbol).depth
        snapshot = snapshot_of(spec)
        for production, result in production_sets:
            self.records.append(
                TraceRecord(
                    production=production.id,
                    symbol=symbol,
                    depth=depth,
                    examples=snapshot,
                    label=result.best_score,
                )
            )


def collect_traces(tasks, capacity: int = 10) -> list[TraceRecord]:
    """Run baseline synthesis over tasks and harvest every decision point."""
    from .corpus import task_spec
    from .search import DeductiveEngine

    collector = TraceCollector()
    for task in sorted(tasks, key=lambda t: t.id):
        engine = DeductiveEngine(capacity=capacity, trace_sink=collector.sink)
        engine.learn("transform", task_spec(task), k=1)
    return collector.records


# ----------------------------------------------------------------------
# serialization

def _value_to_json(value):
    if isinstance(value, tuple):
        return list(value)
    return value


def _value_from_json(value):
    if isinstance(value, list):
        return tuple(value)
    return value


def record_to_json(record: TraceRecord) -> dict:
    return {
        "production": record.production,
        "symbol": record.symbol,
        "depth": record.depth,
        "spec": [
            {"inputs": list(inputs), "values": [_value_to_json(v) for v in values]}
            for inputs, values in record.examples
        ],
        "label": "-inf" if record.label == NEG_INF else record.label,
    }


def record_from_json(payload: dict) -> TraceRecord:
    label = payload["label"]
    return TraceRecord(
        production=payload["production"],
        symbol=payload["symbol"],
        depth=payload["depth"],
        examples=tuple(
            (tuple(ex["inputs"]), tuple(_value_from_json(v) for v in ex["values"]))
            for ex in payload["spec"]
        ),
        label=NEG_INF if label == "-inf" else float(label),
    )


def write_traces(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_json(record)) + "\n")


def read_traces(path) -> list[TraceRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(record_from_json(json.loads(line)))
    return records


# ----------------------------------------------------------------------
# labels and oracle prediction

@dataclass(frozen=True)
class LabelStats:
    """Denormalization constants shared by training and pruning."""

    mean: float
    scale: float
    min_finite: float

    @property
    def floor(self) -> float:
        """Predictions below this line are treated as prune-eligible."""
        return self.min_finite - self.scale

    @property
    def sentinel_value(self) -> float:
        """Raw-space training target standing in for negative infinity."""
        return self.min_finite - 2.0 * self.scale

    def normalize(self, raw: float) -> float:
        return (raw - self.mean) / self.scale

    def denormalize(self, normalized: float) -> float:
        return normalized * self.scale + self.mean


def label_statistics(records) -> LabelStats:
    finite = [r.label for r in records if math.isfinite(r.label)]
    if not finite:
        raise ValueError("no finite labels in the record set")
    n = len(finite)
    mean = sum(finite) / n
    variance = sum((x - mean) ** 2 for x in finite) / n
    scale = max(math.sqrt(variance), 1e-6)
    return LabelStats(mean=mean, scale=scale, min_finite=min(finite))


class OracleScores:
    """Predictor that replays recorded labels; the upper bound for guidance.

    Keyed by (production, spec snapshot).  Queries outside the recorded
    set raise, which in a guided run over the same tasks indicates a bug:
    guided searches only ever visit decision points the baseline visited.
    """

    def __init__(self, records) -> None:
        self._table = {}
        finite = [r.label for r in records if math.isfinite(r.label)]
        for record in records:
            self._table[(record.production, record.examples)] = record.label
        stats = label_statistics(records) if finite else None
        self.label_floor = stats.floor if stats else NEG_INF

    def __len__(self) -> int:
        return len(self._table)

    def predict(self, production_id: str, spec: Spec) -> float:
        key = (production_id, snapshot_of(spec))
        if key not in self._table:
            raise KeyError(
                "no recorded label for production %s at this decision point"
                % production_id
            )
        return self._table[key]


def flip_accuracy(predictor, records) -> float:
    """Fraction of correctly ordered finite-label pairs per decision group.

    Pairs whose labels tie are always counted correct; groups with fewer
    than two finite-label records contribute no pairs.  A record set with
    no eligible pairs scores 1.0 vacuously.
    """
    groups: dict = {}
    for record in records:
        groups.setdefault(record.group_key(), []).append(record)
    total = 0
    correct = 0
    for group in groups.values():
        finite = [r for r in group if math.isfinite(r.label)]
        if len(finite) < 2:
            continue
        spec = spec_from_snapshot(finite[0].examples)
        predictions = {r.production: predictor.predict(r.production, spec) for r in finite}
        for i in range(len(finite)):
            for j in range(i + 1, len(finite)):
                a, b = finite[i], finite[j]
                total += 1
                if a.label == b.label:
                    correct += 1
                elif (a.label - b.label) * (predictions[a.production] - predictions[b.production]) > 0:
                    correct += 1
    return correct / total if total else 1.0
