"""Task corpus: loading, validation, and spec construction.

A corpus is one JSON document:

    { "tasks": [ { "id": str,
                   "examples": [ { "inputs": [str], "output": str } ],
                   "spec_count": int,
                   "split": "train" | "validation" | "test" } ] }

Each task gives the synthesizer its first `spec_count` examples as the
spec; the remaining examples stay held out, measuring generalization.
Held-out *inputs* (not outputs) ride along in the spec as unlabeled
states, mirroring how a spreadsheet synthesizer sees the column of
pending rows: the ranking can penalize programs that crash or go empty
on them, but never peeks at the expected outputs.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from importlib import resources

from .programs import InputState
from .specs import Spec

SPLITS = ("train", "validation", "test")
CORPUS_ENV = "STRSYNTH_CORPUS"


class FormatError(Exception):
    """Corpus file violates the documented schema."""


class DuplicateId(FormatError):
    """Two tasks share an id."""


@dataclass(frozen=True)
class Example:
    inputs: tuple[str, ...]
    output: str


@dataclass(frozen=True)
class Task:
    id: str
    examples: tuple[Example, ...]
    spec_count: int
    split: str

    @property
    def spec_examples(self) -> tuple[Example, ...]:
        return self.examples[: self.spec_count]

    @property
    def held_out(self) -> tuple[Example, ...]:
        return self.examples[self.spec_count :]


def _require(condition: bool, where: str, message: str) -> None:
    if not condition:
        raise FormatError("%s: %s" % (where, message))


def _parse_task(index: int, payload) -> Task:
    where = "tasks[%d]" % index
    _require(isinstance(payload, dict), where, "task must be an object")
    task_id = payload.get("id")
    _require(isinstance(task_id, str) and task_id != "", where, "missing or empty 'id'")
    where = "tasks[%d] (%s)" % (index, task_id)

    raw_examples = payload.get("examples")
    _require(isinstance(raw_examples, list) and len(raw_examples) >= 2,
             where, "'examples' must be a list with at least 2 entries")
    examples = []
    arity = None
    for j, ex in enumerate(raw_examples):
        ex_where = "%s examples[%d]" % (where, j)
        _require(isinstance(ex, dict), ex_where, "example must be an object")
        inputs = ex.get("inputs")
        output = ex.get("output")
        _require(isinstance(inputs, list) and len(inputs) >= 1
                 and all(isinstance(s, str) for s in inputs),
                 ex_where, "'inputs' must be a non-empty list of strings")
        _require(isinstance(output, str), ex_where, "'output' must be a string")
        if arity is None:
            arity = len(inputs)
        _require(len(inputs) == arity, ex_where,
                 "input arity %d differs from the task's %d" % (len(inputs), arity))
        examples.append(Example(tuple(inputs), output))

    spec_count = payload.get("spec_count")
    _require(isinstance(spec_count, int) and not isinstance(spec_count, bool),
             where, "'spec_count' must be an integer")
    _require(1 <= spec_count < len(examples), where,
             "'spec_count' must satisfy 1 <= spec_count < number of examples")

    split = payload.get("split")
    _require(split in SPLITS, where, "'split' must be one of %s" % (SPLITS,))
    return Task(task_id, tuple(examples), spec_count, split)


def load_tasks(path) -> tuple[Task, ...]:
    """Parse and validate a corpus file; tasks come back ordered by id."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            document = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError("%s: invalid JSON: %s" % (path, exc)) from exc
    _require(isinstance(document, dict) and isinstance(document.get("tasks"), list),
             str(path), "top level must be an object with a 'tasks' list")
    raw = document["tasks"]
    _require(len(raw) >= 1, str(path), "corpus has no tasks")
    tasks = [_parse_task(i, payload) for i, payload in enumerate(raw)]
    seen = set()
    for task in tasks:
        if task.id in seen:
            raise DuplicateId("task id %r appears more than once" % task.id)
        seen.add(task.id)
    return tuple(sorted(tasks, key=lambda t: t.id))


def task_spec(task: Task) -> Spec:
    """The synthesis spec: labeled spec examples plus unlabeled held-out inputs."""
    constraints = [(ex.inputs, ex.output) for ex in task.spec_examples]
    unlabeled = tuple(InputState(ex.inputs) for ex in task.held_out)
    return Spec.of(constraints, unlabeled=unlabeled)


def split_tasks(tasks) -> dict:
    groups = {split: [] for split in SPLITS}
    for task in tasks:
        groups[task.split].append(task)
    return groups


def default_corpus_path() -> str:
    override = os.environ.get(CORPUS_ENV)
    if override:
        return override
    return str(resources.files("strsynth").joinpath("data/corpus.json"))


def load_default_tasks() -> tuple[Task, ...]:
    return load_tasks(default_corpus_path())
