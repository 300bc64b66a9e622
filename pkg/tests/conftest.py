"""Shared fixtures: bundled corpus, in-session traces, one trained model."""

from __future__ import annotations

import random

import pytest

from strsynth.corpus import load_default_tasks, split_tasks
from strsynth.model import Hyperparams, train
from strsynth.programs import (
    AbsPosNode,
    ConcatNode,
    ConstStrNode,
    PairNode,
    RegexOccNode,
    RegexPosNode,
    SubstrNode,
)
from strsynth.tokens import VOCABULARY
from strsynth.traces import collect_traces

TOKEN_NAMES = tuple(t.name for t in VOCABULARY)

# Literal alphabet stresses every escape path the printer supports.
LITERAL_CHARS = (
    "abcXYZ019 _-.,:;/@()"
    + '"'
    + "'"
    + "\\"
    + "\n\t"
    + "\x07"
    + "é世\U0001f600"
)


def random_position(rng: random.Random):
    if rng.random() < 0.4:
        return AbsPosNode(rng.randint(-20, 20))
    occurrence = rng.choice([i for i in range(-4, 5) if i != 0])
    return RegexPosNode(rng.choice(TOKEN_NAMES), rng.choice(TOKEN_NAMES), occurrence)


def random_pair(rng: random.Random):
    if rng.random() < 0.5:
        return PairNode(random_position(rng), random_position(rng))
    occurrence = rng.choice([i for i in range(-4, 5) if i != 0])
    return RegexOccNode(rng.choice(TOKEN_NAMES), occurrence)


def random_atom(rng: random.Random):
    if rng.random() < 0.4:
        length = rng.randint(0, 8)
        literal = "".join(rng.choice(LITERAL_CHARS) for _ in range(length))
        return ConstStrNode(literal)
    return SubstrNode(rng.randint(0, 3), random_pair(rng))


def random_program(rng: random.Random, depth: int = 0):
    """Depth-bounded sampler over the whole transform AST space."""
    if depth < 4 and rng.random() < 0.45:
        return ConcatNode(random_atom(rng), random_program(rng, depth + 1))
    return random_atom(rng)


@pytest.fixture(scope="session")
def bundled_tasks():
    return load_default_tasks()


@pytest.fixture(scope="session")
def tasks_by_split(bundled_tasks):
    return split_tasks(bundled_tasks)


@pytest.fixture(scope="session")
def traces_by_split(tasks_by_split):
    return {split: collect_traces(tasks)
            for split, tasks in tasks_by_split.items()}


@pytest.fixture(scope="session")
def trained_t1(traces_by_split):
    """The shipped training recipe; deterministic, about 20 s of CPU."""
    return train("transform", traces_by_split["train"],
                 val_records=traces_by_split["validation"],
                 hp=Hyperparams(seed=1))
