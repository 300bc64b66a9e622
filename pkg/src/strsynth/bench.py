"""Evaluation harness comparing engine configurations over a task corpus.

One :class:`EngineConfig` describes how to build a synthesis engine: the
baseline deductive engine, or a guided engine with a controller and a set
of score models.  :func:`evaluate` runs every configuration over a task
list and produces a :class:`MetricsReport` holding, per engine:

* generalization accuracy: the fraction of tasks whose top-1 program,
  synthesized from the spec examples only, reproduces every example in
  the task, including the held-out rows;
* per-task node-expansion counts and branch-exploration counts;
* per-task wall-clock medians over repeated runs.

Cross-engine numbers are computed against the first configuration, which
acts as the reference (conventionally the baseline):

* node speed-up: geometric mean of reference/engine expansion ratios over
  tasks where the reference spent at least ``gate_expansions`` expansions
  (node counts are deterministic, unlike timings, so they are the primary
  speed-up proxy);
* wall-clock speed-up: same shape, gated by ``gate_ms`` of reference time;
* branch fraction: branches the engine explored divided by branches the
  *reference* explored at its decision points, so the reference itself
  always reads 100%.

The report serializes to JSON (:meth:`MetricsReport.to_json`) and renders
as a fixed-width text table (:meth:`MetricsReport.render_table`) with
Accuracy / Speed-up / % of branches columns.
"""

from __future__ import annotations

import json
import math
import statistics
import time
from dataclasses import dataclass, field

from .corpus import Task, task_spec
from .guidance import (
    BANDED_BNB,
    BRANCH_AND_BOUND,
    CONTROLLER_KINDS,
    THRESHOLD,
    ControllerConfig,
    GuidedEngine,
    ModelAssignment,
)
from .programs import EvalError, InputState, eval_program
from .search import DeductiveEngine, SearchStats
from .specs import Spec
from .syntax import print_program

BASELINE = "baseline"

__all__ = [
    "BASELINE",
    "EngineConfig",
    "EngineReport",
    "MetricsReport",
    "TaskResult",
    "build_engine",
    "evaluate",
    "geometric_mean",
]


@dataclass(frozen=True)
class EngineConfig:
    """Recipe for one synthesis engine under evaluation.

    ``controller`` is ``None`` for the baseline engine or one of the
    controller kinds from :mod:`strsynth.guidance`; guided configurations
    take their score models from ``assignment``.
    """

    name: str
    controller: str | None = None
    theta: float = 0.2
    assignment: ModelAssignment | None = None
    k: int = 1
    capacity: int = 10

    def __post_init__(self) -> None:
        if self.controller is not None and self.controller not in CONTROLLER_KINDS:
            raise ValueError("unknown controller kind %r" % (self.controller,))
        if self.controller is not None and self.assignment is None:
            raise ValueError("guided configuration %r needs a model assignment"
                             % (self.name,))
        if self.k < 1:
            raise ValueError("k must be at least 1")


def build_engine(config: EngineConfig, stats: SearchStats | None = None):
    """Fresh engine for one run; never reuse engines across runs."""
    stats = stats if stats is not None else SearchStats()
    if config.controller is None:
        return DeductiveEngine(capacity=config.capacity, stats=stats)
    controller = ControllerConfig(kind=config.controller, theta=config.theta)
    return GuidedEngine(config.assignment, controller,
                        capacity=config.capacity, stats=stats)


@dataclass
class TaskResult:
    """Outcome of one engine on one task."""

    task_id: str
    solved: bool
    found: bool
    program: str | None
    score: float
    node_expansions: int
    branches_total: int
    branches_explored: int
    wall_clock: float

    def to_json(self) -> dict:
        return {
            "task_id": self.task_id,
            "solved": self.solved,
            "found": self.found,
            "program": self.program,
            "score": self.score if math.isfinite(self.score) else None,
            "node_expansions": self.node_expansions,
            "branches_total": self.branches_total,
            "branches_explored": self.branches_explored,
            "wall_clock": self.wall_clock,
        }


@dataclass
class EngineReport:
    """All per-task results for one engine configuration."""

    name: str
    results: list[TaskResult] = field(default_factory=list)

    @property
    def accuracy(self) -> float:
        if not self.results:
            return 0.0
        return sum(1 for r in self.results if r.solved) / len(self.results)

    def result_for(self, task_id: str) -> TaskResult:
        for r in self.results:
            if r.task_id == task_id:
                return r
        raise KeyError(task_id)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "accuracy": self.accuracy,
            "results": [r.to_json() for r in self.results],
        }


def geometric_mean(values) -> float:
    values = list(values)
    if not values:
        return float("nan")
    if any(v <= 0 for v in values):
        raise ValueError("geometric mean needs positive values")
    return math.exp(sum(math.log(v) for v in values) / len(values))


@dataclass
class MetricsReport:
    """Cross-engine comparison; the first engine is the reference."""

    engines: list[EngineReport]
    gate_expansions: int
    gate_ms: float

    @property
    def reference(self) -> EngineReport:
        return self.engines[0]

    def branch_fraction(self, name: str) -> float:
        """Branches explored by `name` / branches the reference explored."""
        engine = self._engine(name)
        denom = sum(r.branches_explored for r in self.reference.results)
        if denom == 0:
            return float("nan")
        return sum(r.branches_explored for r in engine.results) / denom

    def node_speedup(self, name: str) -> float:
        """Geomean of reference/engine expansions over gated tasks.

        Gated tasks are those where the reference spent at least
        ``gate_expansions`` node expansions; returns NaN when no task
        clears the gate.
        """
        engine = self._engine(name)
        ratios = []
        for ref in self.reference.results:
            if ref.node_expansions < self.gate_expansions:
                continue
            other = engine.result_for(ref.task_id)
            if other.node_expansions > 0:
                ratios.append(ref.node_expansions / other.node_expansions)
        return geometric_mean(ratios) if ratios else float("nan")

    def time_speedup(self, name: str) -> float:
        """Geomean of reference/engine wall-clock over time-gated tasks."""
        engine = self._engine(name)
        gate = self.gate_ms / 1000.0
        ratios = []
        for ref in self.reference.results:
            if ref.wall_clock < gate:
                continue
            other = engine.result_for(ref.task_id)
            if other.wall_clock > 0:
                ratios.append(ref.wall_clock / other.wall_clock)
        return geometric_mean(ratios) if ratios else float("nan")

    def _engine(self, name: str) -> EngineReport:
        for engine in self.engines:
            if engine.name == name:
                return engine
        raise KeyError(name)

    def to_json(self) -> dict:
        def num(value):
            # Strict JSON has no NaN/Infinity; gated-out ratios become null.
            return value if math.isfinite(value) else None
        return {
            "gate_expansions": self.gate_expansions,
            "gate_ms": self.gate_ms,
            "engines": [e.to_json() for e in self.engines],
            "comparison": {
                e.name: {
                    "accuracy": e.accuracy,
                    "branch_fraction": num(self.branch_fraction(e.name)),
                    "node_speedup": num(self.node_speedup(e.name)),
                    "time_speedup": num(self.time_speedup(e.name)),
                }
                for e in self.engines
            },
        }

    def render_table(self) -> str:
        headers = ("Engine", "Accuracy", "Speed-up", "% of branches")
        rows = []
        for engine in self.engines:
            speedup = self.node_speedup(engine.name)
            frac = self.branch_fraction(engine.name)
            rows.append((
                engine.name,
                "%.2f%%" % (engine.accuracy * 100),
                "---" if math.isnan(speedup) else "%.2fx" % speedup,
                "---" if math.isnan(frac) else "%.2f%%" % (frac * 100),
            ))
        widths = [max(len(headers[i]), *(len(r[i]) for r in rows))
                  for i in range(len(headers))]
        def fmt(row):
            return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
        lines = [fmt(headers), fmt(tuple("-" * w for w in widths))]
        lines.extend(fmt(row) for row in rows)
        return "\n".join(lines)


def _solves(program, task: Task) -> bool:
    for example in task.examples:
        try:
            if eval_program(program, InputState(example.inputs)) != example.output:
                return False
        except EvalError:
            return False
    return True


def _run_once(config: EngineConfig, spec: Spec):
    stats = SearchStats()
    engine = build_engine(config, stats)
    started = time.perf_counter()
    result = engine.learn("transform", spec, k=config.k)
    elapsed = time.perf_counter() - started
    return result, stats, elapsed


def evaluate(tasks, configs, runs: int = 5,
             gate_expansions: int = 100, gate_ms: float = 500.0) -> MetricsReport:
    """Run every engine configuration over every task.

    The first configuration is the comparison reference.  Accuracy, node
    counts, and branch counts come from the first run (they are
    deterministic); the reported wall-clock is the median over ``runs``
    fresh runs.  A task where synthesis finds nothing counts as
    unsolved, never as an error.
    """
    configs = list(configs)
    if not configs:
        raise ValueError("need at least one engine configuration")
    if runs < 1:
        raise ValueError("runs must be at least 1")
    names = [c.name for c in configs]
    if len(set(names)) != len(names):
        raise ValueError("engine names must be unique")

    report = MetricsReport([EngineReport(c.name) for c in configs],
                           gate_expansions=gate_expansions, gate_ms=gate_ms)
    for task in tasks:
        spec = task_spec(task)
        for config, engine_report in zip(configs, report.engines):
            result, stats, first_time = _run_once(config, spec)
            times = [first_time]
            for _ in range(runs - 1):
                times.append(_run_once(config, spec)[2])
            top = result.entries[0] if result.entries else None
            engine_report.results.append(TaskResult(
                task_id=task.id,
                solved=top is not None and _solves(top.program, task),
                found=top is not None,
                program=None if top is None else print_program(top.program),
                score=top.score if top is not None else float("-inf"),
                node_expansions=stats.node_expansions,
                branches_total=stats.branches_total,
                branches_explored=stats.branches_explored,
                wall_clock=statistics.median(times),
            ))
    return report


def write_report(report: MetricsReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_json(), fh, indent=2)
        fh.write("\n")
