"""Command-line interface: synthesize, trace, train, evaluate, and a REPL.

Example lines (for ``synth`` arguments and REPL input) use double-quoted
strings with the same escapes as program literals::

    "(612) 8729128" -> "612-872-9128"
    "john", "smith" -> "john.smith"

Exit codes form a stable contract: 0 success, 1 usage or environment
error, 2 no program satisfies the examples.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import model as model_mod
from .bench import EngineConfig, evaluate, write_report
from .corpus import SPLITS, FormatError, default_corpus_path, load_tasks
from .guidance import CONTROLLER_KINDS, MODEL_SYMBOLS, ControllerConfig, GuidedEngine, ModelAssignment
from .programs import EvalError, InputState, eval_program
from .search import DeductiveEngine
from .specs import Spec
from .syntax import ParseError, _Parser, escape_string, print_program
from .traces import collect_traces, read_traces, write_traces

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNSAT = 2

__all__ = ["main", "parse_example_line"]


def parse_example_line(line: str) -> tuple[tuple[str, ...], str]:
    """Parse `"in1", "in2" -> "out"` into (inputs, output).

    Raises ParseError on malformed lines, including trailing junk.
    """
    parser = _Parser(line)
    inputs = [parser.quoted('"')]
    parser.skip_ws()
    while parser.text.startswith(",", parser.pos):
        parser.pos += 1
        inputs.append(parser.quoted('"'))
        parser.skip_ws()
    parser.expect("->")
    output = parser.quoted('"')
    parser.skip_ws()
    if parser.pos != len(parser.text):
        raise parser.error("unexpected text after example")
    return tuple(inputs), output


class _ArgumentParser(argparse.ArgumentParser):
    """argparse reserves exit code 2; remap usage errors to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print("%s: error: %s" % (self.prog, message), file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _fail(message: str) -> int:
    print("error: %s" % message, file=sys.stderr)
    return EXIT_USAGE


def _model_names(raw: str) -> list[str]:
    names = [n.strip() for n in raw.split(",") if n.strip()]
    for name in names:
        if name not in MODEL_SYMBOLS:
            raise ValueError("unknown model name %r (expected one of %s)"
                             % (name, ", ".join(sorted(MODEL_SYMBOLS))))
    if not names:
        raise ValueError("empty model list")
    return names


def _load_assignment(names: list[str], model_dir: str) -> ModelAssignment:
    loaded = {}
    for name in names:
        path = os.path.join(model_dir, name + ".ssm")
        if not os.path.exists(path):
            raise FileNotFoundError(
                "model file %s not found; run `strsynth train --models %s` first"
                % (path, name))
        loaded[name] = model_mod.ScoreModel.load(path)
    return ModelAssignment.by_name(**loaded)


def _build_engine(args, k: int):
    """Engine from the shared --controller/--models/--model-dir flags."""
    if args.controller is None:
        return DeductiveEngine(capacity=max(k, 10))
    names = _model_names(args.models)
    assignment = _load_assignment(names, args.model_dir)
    controller = ControllerConfig(kind=args.controller, theta=args.theta)
    return GuidedEngine(assignment, controller, capacity=max(k, 10))


def _print_programs(result, states_and_outputs) -> None:
    for index, entry in enumerate(result.entries, start=1):
        print("#%d  score %.2f" % (index, entry.score))
        print("    %s" % print_program(entry.program))
        for state, expected in states_and_outputs:
            try:
                got = eval_program(entry.program, state)
                shown = escape_string(got)
            except EvalError as err:
                got = None
                shown = "<%s>" % type(err).__name__
            mark = "ok" if got == expected else "FAIL"
            print("    %-4s %s -> %s" % (
                mark, ", ".join(escape_string(i) for i in state.inputs), shown))


def cmd_synth(args) -> int:
    try:
        pairs = [parse_example_line(line) for line in args.example]
    except ParseError as err:
        return _fail("bad example: %s" % err)
    arities = {len(inputs) for inputs, _ in pairs}
    if len(arities) != 1:
        return _fail("examples must all have the same number of inputs")
    try:
        engine = _build_engine(args, args.k)
    except (ValueError, FileNotFoundError) as err:
        return _fail(str(err))
    spec = Spec.of(pairs)
    result = engine.learn("transform", spec, k=args.k)
    if not result.entries:
        print("no program satisfies the examples", file=sys.stderr)
        return EXIT_UNSAT
    _print_programs(result, [(InputState(i), o) for i, o in pairs])
    return EXIT_OK


def _load_corpus(args):
    path = args.corpus or default_corpus_path()
    return load_tasks(path)


def cmd_trace(args) -> int:
    try:
        tasks = _load_corpus(args)
    except (OSError, FormatError) as err:
        return _fail("cannot load corpus: %s" % err)
    if args.split != "all":
        tasks = [t for t in tasks if t.split == args.split]
    if not tasks:
        return _fail("no tasks in split %r" % args.split)
    records = collect_traces(tasks)
    write_traces(records, args.out)
    print("wrote %d trace records from %d tasks to %s"
          % (len(records), len(tasks), args.out))
    return EXIT_OK


def cmd_train(args) -> int:
    try:
        names = _model_names(args.models)
    except ValueError as err:
        return _fail(str(err))
    try:
        train_records = read_traces(args.traces)
        val_records = read_traces(args.val_traces) if args.val_traces else None
    except (OSError, FormatError, json.JSONDecodeError) as err:
        return _fail("cannot load traces: %s" % err)
    os.makedirs(args.model_dir, exist_ok=True)
    hp = model_mod.Hyperparams(seed=args.seed)
    for name in names:
        symbol = MODEL_SYMBOLS[name]
        curve = []
        try:
            model = model_mod.train(
                symbol, train_records, val_records=val_records, hp=hp,
                on_epoch=lambda epoch, loss: curve.append(
                    {"epoch": epoch, "val_loss": loss}))
        except model_mod.EmptyDataset as err:
            return _fail("cannot train %s: %s" % (name, err))
        path = os.path.join(args.model_dir, name + ".ssm")
        model.save(path)
        curve_path = os.path.join(args.model_dir, name + "-curve.json")
        with open(curve_path, "w", encoding="utf-8") as fh:
            json.dump({"model": name, "symbol": symbol, "seed": args.seed,
                       "epochs": curve}, fh, indent=2)
            fh.write("\n")
        print("trained %s (%d epochs) -> %s" % (name, len(curve), path))
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        tasks = _load_corpus(args)
    except (OSError, FormatError) as err:
        return _fail("cannot load corpus: %s" % err)
    if args.split != "all":
        tasks = [t for t in tasks if t.split == args.split]
    if not tasks:
        return _fail("no tasks in split %r" % args.split)

    configs = [EngineConfig("baseline", k=args.k)]
    if args.models:
        try:
            names = _model_names(args.models)
            assignment = _load_assignment(names, args.model_dir)
        except (ValueError, FileNotFoundError) as err:
            return _fail(str(err))
        controller = args.controller or "bnb"
        configs.append(EngineConfig(
            "ngds-%s-%s" % ("+".join(names), controller),
            controller=controller, theta=args.theta,
            assignment=assignment, k=args.k))
    report = evaluate(tasks, configs, runs=args.runs,
                      gate_expansions=args.gate_expansions,
                      gate_ms=args.gate_ms)
    print(report.render_table())
    if args.out:
        write_report(report, args.out)
        print("wrote %s" % args.out)
    return EXIT_OK


def _repl_synthesize(pairs, engine_factory, k):
    engine = engine_factory()
    spec = Spec.of(pairs)
    return engine.learn("transform", spec, k=k)


def cmd_repl(args) -> int:
    try:
        engine_factory = lambda: _build_engine(args, max(args.k, 3))
        engine_factory()
    except (ValueError, FileNotFoundError) as err:
        return _fail(str(err))
    pairs: list[tuple[tuple[str, ...], str]] = []
    result = None
    print('enter examples as "input" -> "output"; '
          ':apply "input" runs the best program; :quit exits')
    while True:
        try:
            line = input("> ").strip()
        except EOFError:
            print()
            return EXIT_OK
        if not line:
            continue
        if line == ":quit":
            return EXIT_OK
        if line.startswith(":apply"):
            if result is None or not result.entries:
                print("no program yet; enter at least one example first")
                continue
            rest = line[len(":apply"):].strip()
            try:
                inputs = _parse_apply_inputs(rest, len(pairs[0][0]))
            except ParseError as err:
                print("bad input: %s" % err)
                continue
            try:
                print(escape_string(
                    eval_program(result.entries[0].program, InputState(inputs))))
            except EvalError as err:
                print("<%s>" % type(err).__name__)
            continue
        if line.startswith(":"):
            print("unknown command %r" % line.split()[0])
            continue
        try:
            inputs, output = parse_example_line(line)
        except ParseError as err:
            print("bad example: %s" % err)
            continue
        if pairs and len(inputs) != len(pairs[0][0]):
            print("expected %d input(s) per example" % len(pairs[0][0]))
            continue
        pairs.append((inputs, output))
        result = _repl_synthesize(pairs, engine_factory, max(args.k, 3))
        if not result.entries:
            print("no program satisfies all %d example(s); removing the last"
                  % len(pairs))
            pairs.pop()
            result = _repl_synthesize(pairs, engine_factory, max(args.k, 3)) \
                if pairs else None
            continue
        _print_programs(result, [(InputState(i), o) for i, o in pairs])


def _parse_apply_inputs(text: str, arity: int) -> tuple[str, ...]:
    parser = _Parser(text)
    parser.skip_ws()
    if not text.strip().startswith('"'):
        # Unquoted convenience form for single-input programs.
        if arity != 1:
            raise parser.error("program takes %d inputs; quote them" % arity)
        return (text,)
    inputs = [parser.quoted('"')]
    parser.skip_ws()
    while parser.text.startswith(",", parser.pos):
        parser.pos += 1
        inputs.append(parser.quoted('"'))
        parser.skip_ws()
    if parser.pos != len(parser.text):
        raise parser.error("unexpected text after inputs")
    if len(inputs) != arity:
        raise parser.error("program takes %d inputs, got %d" % (arity, len(inputs)))
    return tuple(inputs)


def _add_engine_flags(parser) -> None:
    parser.add_argument("--controller", choices=CONTROLLER_KINDS, default=None,
                        help="guided search controller (default: baseline search)")
    parser.add_argument("--theta", type=float, default=0.2,
                        help="threshold band width (default 0.2)")
    parser.add_argument("--models", default="t1",
                        help="comma-separated score models to load (default t1)")
    parser.add_argument("--model-dir", default="models",
                        help="directory holding <name>.ssm files (default ./models)")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="strsynth",
        description="Synthesize string transformations from examples, "
                    "with optional learned search guidance.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="synthesize from example arguments")
    p_synth.add_argument("example", nargs="+",
                         help='example as \'"input" -> "output"\'')
    p_synth.add_argument("--k", type=int, default=1, help="programs to return")
    _add_engine_flags(p_synth)
    p_synth.set_defaults(func=cmd_synth)

    p_trace = sub.add_parser("trace", help="collect search-decision traces")
    p_trace.add_argument("--corpus", default=None,
                         help="task corpus JSON (default: bundled corpus)")
    p_trace.add_argument("--split", default="train", choices=SPLITS + ("all",))
    p_trace.add_argument("--out", required=True, help="output JSONL path")
    p_trace.set_defaults(func=cmd_trace)

    p_train = sub.add_parser("train", help="train score models from traces")
    p_train.add_argument("--traces", required=True, help="training trace JSONL")
    p_train.add_argument("--val-traces", default=None,
                         help="validation trace JSONL (default: training traces)")
    p_train.add_argument("--models", default="t1",
                         help="comma-separated models to train (default t1)")
    p_train.add_argument("--model-dir", default="models",
                         help="output directory (default ./models)")
    p_train.add_argument("--seed", type=int, default=0)
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="compare engines over the corpus")
    p_eval.add_argument("--corpus", default=None,
                        help="task corpus JSON (default: bundled corpus)")
    p_eval.add_argument("--split", default="test", choices=SPLITS + ("all",))
    p_eval.add_argument("--k", type=int, default=1)
    p_eval.add_argument("--runs", type=int, default=5,
                        help="wall-clock runs per task (default 5)")
    p_eval.add_argument("--gate-expansions", type=int, default=100,
                        help="speed-up gate in baseline node expansions")
    p_eval.add_argument("--gate-ms", type=float, default=500.0,
                        help="wall-clock speed-up gate in milliseconds")
    p_eval.add_argument("--out", default=None, help="metrics JSON output path")
    _add_engine_flags(p_eval)
    # eval compares against baseline only when no models are requested.
    p_eval.set_defaults(models="", func=cmd_eval)

    p_repl = sub.add_parser("repl", help="interactive example refinement")
    p_repl.add_argument("--k", type=int, default=3,
                        help="programs to show per refinement (default 3)")
    _add_engine_flags(p_repl)
    p_repl.set_defaults(func=cmd_repl)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
