"""Example-driven synthesis of string transformations with learned guidance.

The package synthesizes small string-manipulation programs from
input-output examples.  A deductive engine decomposes the output
constraint through the grammar's operators, so every returned program
satisfies the examples by construction; ranking picks the programs most
likely to generalize.  Learned score models predict, per grammar branch,
the best program score attainable underneath it, letting controllers
prune branches without giving up correctness.

Typical entry points:

* :func:`strsynth.search.learn` — one-call baseline synthesis;
* :class:`strsynth.guidance.GuidedEngine` — model-guided synthesis;
* :func:`strsynth.model.train` — fit a score model from trace records;
* :func:`strsynth.bench.evaluate` — engine comparison over a corpus;
* ``strsynth`` console script — CLI over all of the above.
"""

from .grammar import GRAMMAR, Grammar, Production, Symbol
from .programs import (
    AbsPosNode,
    ConcatNode,
    ConstStrNode,
    EmptyValue,
    EvalError,
    IndexOutOfRange,
    InputState,
    PairNode,
    RegexOccNode,
    RegexPosNode,
    SubstrNode,
    eval_program,
)
from .ranking import DEFAULT_RANKER, RankingFunction
from .search import DeductiveEngine, ProgramSet, SearchStats, learn
from .specs import Spec
from .syntax import ParseError, parse_program, print_program
from .guidance import ControllerConfig, GuidedEngine, ModelAssignment
from .model import Hyperparams, ScoreModel, train
from .corpus import Task, load_tasks, task_spec
from .traces import TraceRecord, collect_traces, flip_accuracy
from .bench import EngineConfig, MetricsReport, evaluate

__version__ = "0.1.0"

__all__ = [
    "AbsPosNode",
    "ConcatNode",
    "ConstStrNode",
    "ControllerConfig",
    "DEFAULT_RANKER",
    "DeductiveEngine",
    "EmptyValue",
    "EngineConfig",
    "EvalError",
    "GRAMMAR",
    "Grammar",
    "GuidedEngine",
    "Hyperparams",
    "IndexOutOfRange",
    "InputState",
    "MetricsReport",
    "ModelAssignment",
    "PairNode",
    "ParseError",
    "Production",
    "ProgramSet",
    "RankingFunction",
    "RegexOccNode",
    "RegexPosNode",
    "ScoreModel",
    "SearchStats",
    "Spec",
    "SubstrNode",
    "Symbol",
    "Task",
    "TraceRecord",
    "collect_traces",
    "eval_program",
    "evaluate",
    "flip_accuracy",
    "learn",
    "load_tasks",
    "parse_program",
    "print_program",
    "task_spec",
    "train",
]
