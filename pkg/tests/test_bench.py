"""Benchmark harness: configs, metrics arithmetic, reports, end-to-end runs."""

import json
import math

import pytest

from strsynth.bench import (
    EngineConfig,
    EngineReport,
    MetricsReport,
    TaskResult,
    build_engine,
    evaluate,
    geometric_mean,
    write_report,
)
from strsynth.corpus import load_default_tasks
from strsynth.guidance import GuidedEngine, ModelAssignment
from strsynth.search import DeductiveEngine, SearchStats
from strsynth.traces import OracleScores, collect_traces


def result(task_id, expansions, branches, solved=True, wall=0.01, score=1.0):
    return TaskResult(
        task_id=task_id,
        solved=solved,
        found=True,
        program="ConstStr(\"x\")",
        score=score,
        node_expansions=expansions,
        branches_total=branches,
        branches_explored=branches,
        wall_clock=wall,
    )


def two_engine_report(gate_expansions=100, gate_ms=500.0):
    reference = EngineReport("baseline", [
        result("t1", expansions=200, branches=40),
        result("t2", expansions=50, branches=10),
    ])
    guided = EngineReport("guided", [
        result("t1", expansions=100, branches=20),
        result("t2", expansions=50, branches=8, solved=False),
    ])
    return MetricsReport([reference, guided],
                         gate_expansions=gate_expansions, gate_ms=gate_ms)


class TestEngineConfig:
    def test_baseline_config_builds_deductive_engine(self):
        engine = build_engine(EngineConfig("baseline"))
        assert type(engine) is DeductiveEngine

    def test_guided_config_builds_guided_engine(self):
        assignment = ModelAssignment({})
        config = EngineConfig("g", controller="bnb", assignment=assignment)
        engine = build_engine(config)
        assert isinstance(engine, GuidedEngine)
        assert engine.controller.kind == "bnb"

    def test_unknown_controller_rejected(self):
        with pytest.raises(ValueError):
            EngineConfig("g", controller="beam", assignment=ModelAssignment({}))

    def test_guided_without_assignment_rejected(self):
        with pytest.raises(ValueError):
            EngineConfig("g", controller="thr")

    def test_nonpositive_k_rejected(self):
        with pytest.raises(ValueError):
            EngineConfig("b", k=0)

    def test_fresh_stats_per_build(self):
        config = EngineConfig("baseline")
        assert build_engine(config).stats is not build_engine(config).stats


class TestGeometricMean:
    def test_balanced_ratios_cancel(self):
        assert geometric_mean([2.0, 0.5]) == pytest.approx(1.0)

    def test_single_value_is_itself(self):
        assert geometric_mean([3.0]) == pytest.approx(3.0)

    def test_empty_is_nan(self):
        assert math.isnan(geometric_mean([]))

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            geometric_mean([1.0, 0.0])


class TestMetricsArithmetic:
    def test_reference_is_first_engine(self):
        report = two_engine_report()
        assert report.reference.name == "baseline"

    def test_reference_branch_fraction_is_one(self):
        report = two_engine_report()
        assert report.branch_fraction("baseline") == pytest.approx(1.0)

    def test_branch_fraction_uses_reference_denominator(self):
        report = two_engine_report()
        assert report.branch_fraction("guided") == pytest.approx(28 / 50)

    def test_node_speedup_gates_on_reference_expansions(self):
        # Only t1 clears the 100-expansion gate; t2 (50 expansions) is desk
        # noise and must not dilute the ratio.
        report = two_engine_report()
        assert report.node_speedup("guided") == pytest.approx(2.0)
        assert report.node_speedup("baseline") == pytest.approx(1.0)

    def test_node_speedup_without_gated_tasks_is_nan(self):
        report = two_engine_report(gate_expansions=10_000)
        assert math.isnan(report.node_speedup("guided"))

    def test_time_speedup_gated_out_at_desk_scale(self):
        report = two_engine_report()
        assert math.isnan(report.time_speedup("guided"))

    def test_accuracy_counts_solved_tasks(self):
        report = two_engine_report()
        assert report.reference.accuracy == pytest.approx(1.0)
        assert report._engine("guided").accuracy == pytest.approx(0.5)

    def test_unknown_engine_name_raises(self):
        with pytest.raises(KeyError):
            two_engine_report().branch_fraction("nonesuch")


class TestReports:
    def test_json_is_strict_and_round_trips(self, tmp_path):
        report = two_engine_report(gate_expansions=10_000)
        payload = report.to_json()
        text = json.dumps(payload, allow_nan=False)
        assert json.loads(text) == payload
        comparison = payload["comparison"]["guided"]
        assert comparison["node_speedup"] is None
        assert comparison["time_speedup"] is None
        assert comparison["branch_fraction"] == pytest.approx(28 / 50)

    def test_infinite_score_serializes_as_null(self):
        failed = result("t", expansions=1, branches=1, solved=False,
                        score=float("-inf"))
        assert failed.to_json()["score"] is None

    def test_write_report_produces_readable_file(self, tmp_path):
        report = two_engine_report()
        path = tmp_path / "metrics.json"
        write_report(report, path)
        payload = json.loads(path.read_text(encoding="utf-8"))
        assert payload["gate_expansions"] == 100
        assert [e["name"] for e in payload["engines"]] == ["baseline", "guided"]

    def test_table_shows_reference_at_full_branches(self):
        table = two_engine_report().render_table()
        lines = table.splitlines()
        assert lines[0].split() == ["Engine", "Accuracy", "Speed-up",
                                    "%", "of", "branches"]
        baseline_row = next(l for l in lines if l.startswith("baseline"))
        assert "100.00%" in baseline_row
        guided_row = next(l for l in lines if l.startswith("guided"))
        assert "2.00x" in guided_row
        assert "56.00%" in guided_row

    def test_table_dashes_out_gated_metrics(self):
        table = two_engine_report(gate_expansions=10_000).render_table()
        guided_row = next(l for l in table.splitlines()
                          if l.startswith("guided"))
        assert "---" in guided_row


@pytest.fixture(scope="module")
def small_run():
    tasks = [t for t in load_default_tasks()
             if t.id in ("coords-first", "name-initials-fig1",
                         "phone-dash-example1")]
    oracle = OracleScores(collect_traces(tasks))
    assignment = ModelAssignment.by_name(t1=oracle, pp=oracle, pos=oracle)
    configs = [
        EngineConfig("baseline"),
        EngineConfig("guided", controller="bnb", assignment=assignment),
    ]
    return tasks, evaluate(tasks, configs, runs=1, gate_expansions=1)


class TestEvaluate:
    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError):
            evaluate([], [EngineConfig("x"), EngineConfig("x")])

    def test_no_configs_rejected(self):
        with pytest.raises(ValueError):
            evaluate([], [])

    def test_every_task_reported_per_engine(self, small_run):
        tasks, report = small_run
        for engine in report.engines:
            assert [r.task_id for r in engine.results] == [t.id for t in tasks]

    def test_oracle_guidance_keeps_accuracy_and_prunes(self, small_run):
        _, report = small_run
        baseline, guided = report.engines
        assert guided.accuracy == baseline.accuracy
        assert report.branch_fraction("guided") < 1.0
        for ref in baseline.results:
            other = guided.result_for(ref.task_id)
            assert other.score == ref.score

    def test_node_counts_are_deterministic(self, small_run):
        tasks, report = small_run
        again = evaluate(tasks, [EngineConfig("baseline")], runs=1,
                         gate_expansions=1)
        for first, second in zip(report.reference.results,
                                 again.reference.results):
            assert first.node_expansions == second.node_expansions
            assert first.branches_explored == second.branches_explored
            assert first.program == second.program
