"""Command-line interface: exit codes, output shapes, pipeline, REPL."""

import filecmp
import io
import json
import os

import pytest

from strsynth.cli import EXIT_OK, EXIT_UNSAT, EXIT_USAGE, main, parse_example_line
from strsynth.syntax import ParseError

FIG1 = '"Yann LeCunn" -> "Y LeCunn"'
FIG1B = '"Hugo Larochelle" -> "H Larochelle"'


class TestParseExampleLine:
    def test_single_input(self):
        assert parse_example_line('"(425) 7064550" -> "425-706-4550"') == \
            ((("(425) 7064550"),), "425-706-4550")

    def test_multiple_inputs(self):
        assert parse_example_line('"John", "Doe" -> "J.D."') == \
            (("John", "Doe"), "J.D.")

    def test_escapes_decode(self):
        assert parse_example_line('"a\\"b" -> "x\\ny"') == (('a"b',), "x\ny")

    def test_whitespace_is_flexible(self):
        assert parse_example_line('  "a","b"->"c"  ') == (("a", "b"), "c")

    @pytest.mark.parametrize("line", [
        '"a" "b" -> "c"',          # missing comma
        '"a" -> "b" extra',        # trailing junk
        '"a" => "b"',              # wrong arrow
        'a -> "b"',                # unquoted input
        '"a" -> b',                # unquoted output
        '"a" ->',                  # missing output
        '',                        # empty
    ])
    def test_malformed_lines_rejected(self, line):
        with pytest.raises(ParseError):
            parse_example_line(line)


class TestSynth:
    def test_successful_synthesis(self, capsys):
        assert main(["synth", '"ab cd" -> "cd"']) == EXIT_OK
        out = capsys.readouterr().out
        assert "#1  score" in out
        assert "ok" in out
        assert "FAIL" not in out

    def test_constant_fallback_program(self, capsys):
        assert main(["synth", '"ab" -> "Z"']) == EXIT_OK
        out = capsys.readouterr().out
        assert 'ConstStr("Z")' in out

    def test_conflicting_examples_exit_unsat(self, capsys):
        code = main(["synth", '"ab" -> "x"', '"ab" -> "y"'])
        assert code == EXIT_UNSAT
        assert "no program satisfies" in capsys.readouterr().err

    def test_malformed_example_exit_usage(self, capsys):
        assert main(["synth", "garbage"]) == EXIT_USAGE
        assert "bad example" in capsys.readouterr().err

    def test_mixed_arity_exit_usage(self, capsys):
        code = main(["synth", '"a" -> "a"', '"a", "b" -> "ab"'])
        assert code == EXIT_USAGE
        assert "same number of inputs" in capsys.readouterr().err

    def test_unknown_subcommand_exit_usage(self, capsys):
        assert main(["bogus"]) == EXIT_USAGE

    def test_k_returns_multiple_programs(self, capsys):
        assert main(["synth", '"ab cd" -> "cd"', "--k", "3"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "#3" in out

    def test_guided_without_model_file_exit_usage(self, capsys, tmp_path,
                                                  monkeypatch):
        monkeypatch.chdir(tmp_path)
        code = main(["synth", '"ab" -> "b"', "--controller", "bnb"])
        assert code == EXIT_USAGE
        err = capsys.readouterr().err
        assert "t1.ssm" in err and "strsynth train" in err

    def test_multi_input_join(self, capsys):
        code = main(["synth", '"John", "Doe" -> "John Doe"',
                     '"Jane", "Poe" -> "Jane Poe"'])
        assert code == EXIT_OK
        assert "ok" in capsys.readouterr().out


TINY_CORPUS = {
    "tasks": [
        {"id": "cut-last",
         "examples": [{"inputs": ["ab cd"], "output": "cd"},
                      {"inputs": ["x yz"], "output": "yz"},
                      {"inputs": ["mm nn"], "output": "nn"}],
         "spec_count": 2, "split": "train"},
        {"id": "first-word",
         "examples": [{"inputs": ["ab cd"], "output": "ab"},
                      {"inputs": ["pp qq"], "output": "pp"},
                      {"inputs": ["r st"], "output": "r"}],
         "spec_count": 2, "split": "train"},
        {"id": "tail-digits",
         "examples": [{"inputs": ["a1"], "output": "1"},
                      {"inputs": ["b22"], "output": "22"}],
         "spec_count": 1, "split": "validation"},
        {"id": "second-word",
         "examples": [{"inputs": ["u v"], "output": "v"},
                      {"inputs": ["w x"], "output": "x"}],
         "spec_count": 1, "split": "test"},
    ]
}


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """trace -> train -> artifacts, run once over a tiny private corpus."""
    root = tmp_path_factory.mktemp("pipeline")
    corpus = root / "corpus.json"
    corpus.write_text(json.dumps(TINY_CORPUS), encoding="utf-8")
    traces = root / "train.jsonl"
    assert main(["trace", "--corpus", str(corpus), "--split", "train",
                 "--out", str(traces)]) == EXIT_OK
    model_dir = root / "models"
    assert main(["train", "--traces", str(traces), "--models", "t1",
                 "--model-dir", str(model_dir), "--seed", "7"]) == EXIT_OK
    return root, corpus, traces, model_dir


class TestPipeline:
    def test_trace_file_is_nonempty_jsonl(self, pipeline):
        _, _, traces, _ = pipeline
        lines = traces.read_text(encoding="utf-8").splitlines()
        assert len(lines) >= 20
        for line in lines:
            record = json.loads(line)
            assert {"production", "symbol", "depth", "spec", "label"} <= set(record)

    def test_trace_rejects_missing_corpus(self, capsys, tmp_path):
        code = main(["trace", "--corpus", str(tmp_path / "none.json"),
                     "--out", str(tmp_path / "out.jsonl")])
        assert code == EXIT_USAGE
        assert "cannot load corpus" in capsys.readouterr().err

    def test_train_writes_model_and_curve(self, pipeline):
        _, _, _, model_dir = pipeline
        assert (model_dir / "t1.ssm").exists()
        curve = json.loads((model_dir / "t1-curve.json").read_text())
        assert curve["model"] == "t1"
        assert curve["symbol"] == "transform"
        assert curve["seed"] == 7
        assert curve["epochs"]
        assert all({"epoch", "val_loss"} <= set(e) for e in curve["epochs"])

    def test_train_is_deterministic(self, pipeline, tmp_path):
        _, _, traces, model_dir = pipeline
        other_dir = tmp_path / "models2"
        assert main(["train", "--traces", str(traces), "--models", "t1",
                     "--model-dir", str(other_dir), "--seed", "7"]) == EXIT_OK
        assert filecmp.cmp(model_dir / "t1.ssm", other_dir / "t1.ssm",
                           shallow=False)

    def test_train_unknown_model_name(self, capsys, pipeline):
        _, _, traces, _ = pipeline
        code = main(["train", "--traces", str(traces), "--models", "t9"])
        assert code == EXIT_USAGE
        assert "unknown model name" in capsys.readouterr().err

    def test_eval_baseline_only_by_default(self, capsys, pipeline):
        _, corpus, _, _ = pipeline
        code = main(["eval", "--corpus", str(corpus), "--split", "test",
                     "--runs", "1"])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "baseline" in out
        assert "ngds" not in out
        assert "100.00%" in out

    def test_eval_with_model_adds_guided_engine(self, capsys, pipeline,
                                                tmp_path):
        _, corpus, _, model_dir = pipeline
        metrics = tmp_path / "metrics.json"
        code = main(["eval", "--corpus", str(corpus), "--split", "test",
                     "--runs", "1", "--models", "t1",
                     "--model-dir", str(model_dir),
                     "--controller", "bnb", "--out", str(metrics)])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "ngds-t1-bnb" in out
        payload = json.loads(metrics.read_text(encoding="utf-8"))
        assert [e["name"] for e in payload["engines"]] == \
            ["baseline", "ngds-t1-bnb"]

    def test_eval_missing_model_file(self, capsys, pipeline, tmp_path):
        _, corpus, _, _ = pipeline
        code = main(["eval", "--corpus", str(corpus), "--split", "test",
                     "--runs", "1", "--models", "t1",
                     "--model-dir", str(tmp_path / "empty")])
        assert code == EXIT_USAGE
        assert "not found" in capsys.readouterr().err


def run_repl(monkeypatch, capsys, lines):
    monkeypatch.setattr("sys.stdin", io.StringIO("\n".join(lines) + "\n"))
    code = main(["repl"])
    captured = capsys.readouterr()
    return code, captured.out


class TestRepl:
    def test_refinement_reaches_generalizing_program(self, monkeypatch, capsys):
        code, out = run_repl(monkeypatch, capsys, [
            FIG1,
            FIG1B,
            ':apply "Yoshua Bengio"',
            ":quit",
        ])
        assert code == EXIT_OK
        assert "Y Bengio" in out

    def test_malformed_line_keeps_state(self, monkeypatch, capsys):
        code, out = run_repl(monkeypatch, capsys, [
            "garbage",
            '"ab cd" -> "cd"',
            ':apply "pp qq"',
            ":quit",
        ])
        assert code == EXIT_OK
        assert "bad example" in out
        assert "#1" in out
        assert "qq" in out

    def test_unquoted_apply_for_single_input(self, monkeypatch, capsys):
        code, out = run_repl(monkeypatch, capsys, [
            '"ab cd" -> "cd"',
            ":apply pp qq",
            ":quit",
        ])
        assert code == EXIT_OK
        assert "qq" in out

    def test_conflicting_example_is_dropped(self, monkeypatch, capsys):
        code, out = run_repl(monkeypatch, capsys, [
            '"ab" -> "b"',
            '"ab" -> "c"',
            ':apply "ab"',
            ":quit",
        ])
        assert code == EXIT_OK
        assert "removing the last" in out
        assert "b" in out.splitlines()[-1] or "b" in out

    def test_apply_before_examples(self, monkeypatch, capsys):
        code, out = run_repl(monkeypatch, capsys, [
            ':apply "x"',
            ":quit",
        ])
        assert code == EXIT_OK
        assert "no program yet" in out

    def test_unknown_command_reported(self, monkeypatch, capsys):
        code, out = run_repl(monkeypatch, capsys, [
            ":frobnicate now",
            ":quit",
        ])
        assert code == EXIT_OK
        assert "unknown command" in out

    def test_eof_exits_cleanly(self, monkeypatch, capsys):
        code, out = run_repl(monkeypatch, capsys, ['"ab" -> "b"'])
        assert code == EXIT_OK

    def test_arity_mismatch_rejected(self, monkeypatch, capsys):
        code, out = run_repl(monkeypatch, capsys, [
            '"a", "b" -> "ab"',
            '"c" -> "c"',
            ":quit",
        ])
        assert code == EXIT_OK
        assert "expected 2 input(s)" in out
