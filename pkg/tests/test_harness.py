"""Orchestration against a scripted mock runner, replay, and trace alignment."""

from __future__ import annotations

import json
import time

import pytest

from edgebench.analysis import image_energy, round_half_away
from edgebench.errors import (
    CountMismatch,
    FixtureNotFound,
    NoMatchingRows,
    ProtocolViolation,
    RunnerLaunchFailure,
)
from edgebench.fixtures import serialize_latency_records
from edgebench.harness import (
    BenchPlan,
    RunnerSpec,
    align_trace,
    latency_records,
    replay_fixture,
    run_benchmark,
    synthetic_images,
)
from edgebench.timing import DeviceConfig, Protocol, TaskKind
from edgebench.trace import ExperimentTimeline, PhaseKind

from conftest import mock_runner_cmd, step_trace

FAST_TIMELINE = dict(pre_load_idle=0.01, load_to_predict_gap=0.0)


def make_plan(protocol: Protocol, sizes: tuple[int, ...], repetitions: int = 10,
              batch_size: int = 10, **timeline_kw) -> BenchPlan:
    kw = {**FAST_TIMELINE, **timeline_kw}
    return BenchPlan(
        task=TaskKind.OD_SEGMENTATION,
        dataset_sizes=sizes,
        protocol=protocol,
        timeline=ExperimentTimeline(dataset_count=len(sizes), **kw),
        repetitions=repetitions,
        batch_size=batch_size,
    )


def make_spec(*extra: str) -> RunnerSpec:
    return RunnerSpec(
        launch_command=mock_runner_cmd(*extra),
        model_artifact="stub-model",
        input_shape=(128, 128, 3),
    )


class TestRunBenchmark:
    def test_constant_stub_end_to_end(self):
        plan = make_plan(Protocol.ELEMENT_WISE, (10, 20))
        result = run_benchmark(plan, make_spec("--base-ms", "8.8"), sleep=False)
        records = latency_records(result)
        assert len(records) == 2
        assert [(r.per_image_ms, r.std_ms) for r in records] == [(8.8, 0.0)] * 2
        assert [r.dataset_size for r in records] == [10, 20]

    def test_message_counts_and_ordering(self, tmp_path):
        log_path = tmp_path / "messages.log"
        cases = [
            (Protocol.WHOLE_DATASET, (5, 7), 3, lambda n: 1 + 3),
            (Protocol.BATCHED, (25,), 10, lambda n: 1 + 3),  # ceil(25/10) = 3
            (Protocol.ELEMENT_WISE, (4,), 10, lambda n: 1 + n),
        ]
        for protocol, sizes, reps, expected_predicts in cases:
            log_path.write_text("")
            plan = make_plan(protocol, sizes, repetitions=reps)
            run_benchmark(
                plan, make_spec("--log", str(log_path)), sleep=False
            )
            messages = [
                json.loads(line) for line in log_path.read_text().splitlines()
            ]
            assert messages[-1]["cmd"] == "quit"
            # split into per-dataset segments on "load"
            segments: list[list[dict]] = []
            for msg in messages[:-1]:
                if msg["cmd"] == "load":
                    segments.append([])
                else:
                    assert segments, "predict arrived before any load"
                    segments[-1].append(msg)
            assert len(segments) == len(sizes)
            for size, segment in zip(sizes, segments):
                assert all(m["cmd"] == "predict" for m in segment)
                assert len(segment) == expected_predicts(size)

    def test_batched_predict_counts_include_short_batch(self, tmp_path):
        log_path = tmp_path / "messages.log"
        plan = make_plan(Protocol.BATCHED, (25,))
        run_benchmark(plan, make_spec("--log", str(log_path)), sleep=False)
        predicts = [
            json.loads(line)["n"]
            for line in log_path.read_text().splitlines()
            if json.loads(line)["cmd"] == "predict"
        ]
        assert predicts == [10, 10, 10, 5]  # warm-up repeats the first batch

    def test_runner_error_flags_run_and_campaign_continues(self):
        plan = make_plan(Protocol.WHOLE_DATASET, (10, 20, 30), repetitions=2)
        spec = make_spec("--base-ms", "2.0", "--fail-n", "20")
        records = latency_records(run_benchmark(plan, spec, sleep=False))
        assert [r.anomalous for r in records] == [False, True, False]
        assert records[1].error == "memory error"
        assert records[0].per_image_ms == 2.0
        assert records[2].per_image_ms == 2.0

    def test_non_protocol_line(self):
        plan = make_plan(Protocol.ELEMENT_WISE, (3,))
        with pytest.raises(ProtocolViolation) as info:
            run_benchmark(plan, make_spec("--garbage"), sleep=False)
        assert "not protocol json" in str(info.value)

    def test_dead_runner(self):
        plan = make_plan(Protocol.ELEMENT_WISE, (3,))
        with pytest.raises(RunnerLaunchFailure):
            run_benchmark(plan, make_spec("--die"), sleep=False)

    def test_unlaunchable_runner(self):
        plan = make_plan(Protocol.ELEMENT_WISE, (3,))
        spec = RunnerSpec(
            launch_command=("/nonexistent-runner-binary",),
            model_artifact="m",
            input_shape=(1, 1, 1),
        )
        with pytest.raises(RunnerLaunchFailure):
            run_benchmark(plan, spec, sleep=False)

    def test_guard_sleeps_consume_wall_time(self):
        plan = make_plan(
            Protocol.ELEMENT_WISE, (2, 3),
            pre_load_idle=0.05, load_to_predict_gap=0.02,
        )
        started = time.perf_counter()
        run_benchmark(plan, make_spec(), sleep=True)
        elapsed = time.perf_counter() - started
        assert elapsed >= 2 * (0.05 + 0.02)

    def test_runner_metadata(self):
        plan = make_plan(Protocol.ELEMENT_WISE, (2,))
        result = run_benchmark(plan, make_spec(), sleep=False)
        assert result.runner_metadata["runner_returncode"] == "0"
        assert "mock_runner.py" in result.runner_metadata["launch_command"]
        assert result.runs[0].load_ms == 50.0
        assert len(result.runs[0].roundtrip_ms) == 1 + 2


class TestBenchPlanValidation:
    def test_sizes_must_increase(self):
        with pytest.raises(ValueError):
            make_plan(Protocol.ELEMENT_WISE, (10, 10))

    def test_timeline_count_must_match(self):
        with pytest.raises(ValueError):
            BenchPlan(
                task=TaskKind.OD_SEGMENTATION,
                dataset_sizes=(10, 20),
                protocol=Protocol.ELEMENT_WISE,
                timeline=ExperimentTimeline(dataset_count=3),
            )


class TestReplayFixture:
    def test_edge_od_column(self):
        records = replay_fixture("a1", task="od_segmentation", device="edge_tpu")
        assert len(records) == 33
        assert records[0].dataset_size == 10
        assert (records[0].per_image_ms, records[0].std_ms) == (8.80, 1.10)

    def test_no_matching_rows(self):
        with pytest.raises(NoMatchingRows):
            replay_fixture("a1", device="no_such_device")

    def test_fixture_not_found(self):
        with pytest.raises(FixtureNotFound):
            replay_fixture("a9")

    def test_anomalous_rows_preserved(self):
        records = replay_fixture(
            "a3", task=TaskKind.FUNDUS_CLASSIFICATION, device="edge_tpu"
        )
        flagged = {r.dataset_size: r for r in records if r.anomalous}
        assert set(flagged) == {1300, 1400, 1500}
        assert flagged[1300].per_image_ms == 104.4

    def test_lossless_reserialization(self):
        from edgebench.fixtures import fixture_path

        text = fixture_path("a3").read_text(encoding="utf-8")
        records = replay_fixture("a3")
        assert serialize_latency_records(records) == text


ONE_DATASET = [(10, 2.0), (3, 3.0), (5, 2.0), (8, 5.0)]


def plateau_plan(sizes: tuple[int, ...]) -> BenchPlan:
    return BenchPlan(
        task=TaskKind.OD_SEGMENTATION,
        dataset_sizes=sizes,
        protocol=Protocol.ELEMENT_WISE,
        timeline=ExperimentTimeline(dataset_count=len(sizes)),
    )


class TestAlignTrace:
    def test_ten_plateaus_align_in_plan_order(self):
        sizes = tuple(range(100, 1100, 100))
        plan = plateau_plan(sizes)
        result = run_benchmark(
            plan,
            make_spec("--base-ms", "0.1"),
            sleep=False,
        )
        trace = step_trace(ONE_DATASET * 10)
        pairs = align_trace(result, trace)
        assert [size for size, _, _ in pairs] == list(sizes)
        assert all(w.kind is PhaseKind.INFERENCE for _, w, _ in pairs)
        assert all(sp.mean_watts == 5.0 for _, _, sp in pairs)

    def test_nine_plateaus_for_ten_sizes(self):
        sizes = tuple(range(100, 1100, 100))
        plan = plateau_plan(sizes)
        result = run_benchmark(plan, make_spec("--base-ms", "0.1"), sleep=False)
        trace = step_trace(ONE_DATASET * 9)
        with pytest.raises(CountMismatch) as info:
            align_trace(result, trace)
        assert (info.value.expected, info.value.detected) == (10, 9)

    def test_stable_power_feeds_energy(self):
        plan = plateau_plan((100,))
        result = run_benchmark(plan, make_spec("--base-ms", "8.18"), sleep=False)
        trace = step_trace([(10, 2.0), (3, 3.0), (5, 2.0), (8, 4.2)])
        (size, _, stable), = align_trace(result, trace)
        record = latency_records(result)[0]
        energy = image_energy(stable.mean_watts, record.per_image_ms)
        assert round_half_away(energy) == 34


class TestSyntheticImages:
    def test_shape_and_determinism(self):
        a = synthetic_images((128, 128, 3), 5, seed=7)
        b = synthetic_images((128, 128, 3), 5, seed=7)
        assert a.shape == (5, 128, 128, 3)
        assert a.dtype.name == "uint8"
        assert (a == b).all()
        c = synthetic_images((128, 128, 3), 5, seed=8)
        assert (a != c).any()
