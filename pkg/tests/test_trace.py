"""Power-log parsing, phase segmentation, and stable-power statistics."""

from __future__ import annotations

import numpy as np
import pytest

from edgebench.errors import (
    EmptyLog,
    MalformedLog,
    NonMonotonicTimestamps,
    SegmentationFailure,
    WindowTooShort,
)
from edgebench.trace import (
    ExperimentTimeline,
    PhaseKind,
    PhaseWindow,
    PowerSample,
    PowerTrace,
    SegmentationConfig,
    TrimPolicy,
    convert_tester_export,
    instantaneous_power,
    mean_stable_power,
    parse_power_log,
    segment_phases,
    serialize_power_log,
)

from conftest import step_trace


class TestParsePowerLog:
    def test_two_rows(self):
        trace = parse_power_log(
            "timestamp_s,voltage_V,current_A\n0.0,5.1,0.82\n1.0,5.1,0.90"
        )
        assert len(trace) == 2
        assert trace.powers == pytest.approx([4.182, 4.590])

    def test_crlf_and_trailing_blank_lines(self):
        trace = parse_power_log(
            "timestamp_s,voltage_V,current_A\r\n0.0,5.0,1.0\r\n1.0,5.0,1.1\r\n\r\n"
        )
        assert len(trace) == 2

    def test_header_only_is_empty(self):
        with pytest.raises(EmptyLog):
            parse_power_log("timestamp_s,voltage_V,current_A\n")

    def test_non_monotonic_timestamps(self):
        text = "timestamp_s,voltage_V,current_A\n2.0,5.0,1.0\n1.0,5.0,1.0"
        with pytest.raises(NonMonotonicTimestamps):
            parse_power_log(text)

    @pytest.mark.parametrize(
        "text",
        [
            "time,volts,amps\n0.0,5.0,1.0",
            "timestamp_s,voltage_V,current_A\n0.0,abc,1.0",
            "timestamp_s,voltage_V,current_A\n0.0,5.0,-0.2",
            "timestamp_s,voltage_V,current_A\n0.0,5.0",
            "timestamp_s,voltage_V,current_A\n0.0,nan,1.0",
            "",
        ],
    )
    def test_malformed(self, text):
        with pytest.raises(MalformedLog):
            parse_power_log(text)

    def test_round_trip(self):
        trace = parse_power_log(
            "timestamp_s,voltage_V,current_A\n"
            "0.0,5.08,0.91\n1.01,5.11,0.83\n2.5,5.1,0.9"
        )
        assert parse_power_log(serialize_power_log(trace)) == trace

    def test_round_trip_synthetic(self):
        rng = np.random.default_rng(11)
        samples = tuple(
            PowerSample(t=float(i) + float(rng.uniform(0, 0.4)),
                        voltage=float(rng.uniform(4.9, 5.2)),
                        current=float(rng.uniform(0.5, 1.5)))
            for i in range(50)
        )
        trace = PowerTrace(samples=samples)
        assert parse_power_log(serialize_power_log(trace)) == trace


class TestInstantaneousPower:
    def test_unit(self):
        assert instantaneous_power(PowerSample(0.0, 5.0, 1.0)) == 5.0

    def test_zero_current(self):
        assert instantaneous_power(PowerSample(0.0, 5.1, 0.0)) == 0.0

    def test_hand_product(self):
        assert instantaneous_power(PowerSample(0.0, 5.08, 0.91)) == pytest.approx(
            4.6228
        )

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            PowerSample(0.0, -5.0, 1.0)


ONE_DATASET = [(10, 2.0), (3, 3.0), (5, 2.0), (8, 5.0)]


class TestSegmentPhases:
    def test_single_dataset_triple(self):
        trace = step_trace(ONE_DATASET)
        windows = segment_phases(trace, ExperimentTimeline(dataset_count=1))
        assert [w.kind for w in windows] == [
            PhaseKind.IDLE, PhaseKind.DATASET_LOAD, PhaseKind.INFERENCE
        ]
        idle, load, inference = windows
        assert (idle.start_index, idle.end_index) == (0, 10)
        assert (load.start_index, load.end_index) == (10, 13)
        assert (inference.start_index, inference.end_index) == (18, 26)
        assert all(w.dataset_ordinal == 0 for w in windows)

    def test_count_mismatch_reports_detected(self):
        trace = step_trace(ONE_DATASET)
        with pytest.raises(SegmentationFailure) as info:
            segment_phases(trace, ExperimentTimeline(dataset_count=2))
        assert info.value.detected == 1

    def test_flat_trace(self):
        trace = step_trace([(30, 2.0)])
        with pytest.raises(SegmentationFailure) as info:
            segment_phases(trace, ExperimentTimeline(dataset_count=1))
        assert info.value.detected == 0

    def test_engine_load_prelude(self):
        trace = step_trace([(4, 3.0)] + ONE_DATASET)
        timeline = ExperimentTimeline(dataset_count=1, has_engine_load_prelude=True)
        windows = segment_phases(trace, timeline)
        assert windows[0].kind is PhaseKind.ENGINE_LOAD
        assert (windows[0].start_index, windows[0].end_index) == (0, 4)
        assert windows[0].dataset_ordinal is None
        assert (windows[1].start_index, windows[1].end_index) == (4, 14)

    def test_missing_engine_prelude_fails(self):
        trace = step_trace(ONE_DATASET)
        timeline = ExperimentTimeline(dataset_count=1, has_engine_load_prelude=True)
        with pytest.raises(SegmentationFailure):
            segment_phases(trace, timeline)

    def test_multi_dataset_windows_disjoint_and_ordered(self):
        trace = step_trace(ONE_DATASET * 3)
        windows = segment_phases(trace, ExperimentTimeline(dataset_count=3))
        assert len(windows) == 9
        for a, b in zip(windows, windows[1:]):
            assert a.end_index <= b.start_index
        assert windows[-1].end_index <= len(trace)
        assert [w.dataset_ordinal for w in windows] == [0, 0, 0, 1, 1, 1, 2, 2, 2]

    def test_current_scaling_leaves_windows_and_scales_power(self):
        trace = step_trace(ONE_DATASET * 2)
        scaled = PowerTrace(
            samples=tuple(
                PowerSample(s.t, s.voltage, s.current * 3.5) for s in trace.samples
            )
        )
        timeline = ExperimentTimeline(dataset_count=2)
        windows = segment_phases(trace, timeline)
        windows_scaled = segment_phases(scaled, timeline)
        assert windows == windows_scaled
        for w in windows:
            if w.kind is PhaseKind.INFERENCE:
                base = mean_stable_power(trace, w)
                up = mean_stable_power(scaled, w)
                assert up.mean_watts == pytest.approx(3.5 * base.mean_watts)

    def test_short_guard_rejected(self):
        trace = step_trace([(3, 2.0), (3, 3.0), (5, 2.0), (8, 5.0)])
        with pytest.raises(SegmentationFailure):
            segment_phases(trace, ExperimentTimeline(dataset_count=1))
        config = SegmentationConfig(validate_guards=False)
        windows = segment_phases(trace, ExperimentTimeline(dataset_count=1), config)
        assert len(windows) == 3


class TestMeanStablePower:
    def test_constant_window(self):
        trace = step_trace([(20, 5.0)])
        window = PhaseWindow(PhaseKind.INFERENCE, 0, 20, 0)
        stable = mean_stable_power(trace, window)
        assert (stable.mean_watts, stable.std_watts) == (5.0, 0.0)
        assert stable.samples_used == 16  # 10% == 2 samples off each end

    def test_trims_ramp_samples(self):
        powers = [9.0, 5.0, 5.0, 5.0, 5.0, 9.0]
        trace = step_trace([(1, p) for p in powers])
        window = PhaseWindow(PhaseKind.INFERENCE, 0, 6, 0)
        stable = mean_stable_power(trace, window, TrimPolicy(fraction=0.10))
        assert (stable.mean_watts, stable.std_watts, stable.samples_used) == (
            5.0, 0.0, 4
        )

    def test_window_too_short(self):
        trace = step_trace([(2, 5.0)])
        window = PhaseWindow(PhaseKind.INFERENCE, 0, 2, 0)
        with pytest.raises(WindowTooShort):
            mean_stable_power(trace, window)

    def test_requires_inference_kind(self):
        trace = step_trace([(10, 5.0)])
        with pytest.raises(ValueError):
            mean_stable_power(trace, PhaseWindow(PhaseKind.IDLE, 0, 10, 0))

    def test_mean_bounded_by_window_extremes(self):
        rng = np.random.default_rng(3)
        powers = rng.uniform(4.0, 6.0, size=30)
        trace = step_trace([(1, float(p)) for p in powers])
        window = PhaseWindow(PhaseKind.INFERENCE, 0, 30, 0)
        stable = mean_stable_power(trace, window)
        assert powers.min() <= stable.mean_watts <= powers.max()

    def test_invariant_under_appending_outside_window(self):
        trace = step_trace(ONE_DATASET)
        extended = step_trace(ONE_DATASET + [(7, 2.0), (4, 6.0)])
        window = PhaseWindow(PhaseKind.INFERENCE, 18, 26, 0)
        assert mean_stable_power(trace, window) == mean_stable_power(
            extended, window
        )


class TestConvertTesterExport:
    def test_named_columns_with_time(self):
        export = "elapsed,voltage,current\n0.0,5.1,0.82\n1.0,5.1,0.90\n"
        canonical = convert_tester_export(export, time_col="elapsed")
        trace = parse_power_log(canonical)
        assert len(trace) == 2
        assert trace.powers == pytest.approx([4.182, 4.590])

    def test_synthesized_timestamps_and_indices(self):
        export = "V;A\n5,0;0,8\n5,1;0,9\n"
        canonical = convert_tester_export(
            export, voltage_col=0, current_col=1, delimiter=";", decimal_comma=True
        )
        trace = parse_power_log(canonical)
        assert [s.t for s in trace.samples] == [0.0, 1.0]
        assert trace.powers == pytest.approx([4.0, 4.59])

    def test_unknown_column(self):
        with pytest.raises(MalformedLog):
            convert_tester_export("a,b\n1,2\n", voltage_col="volts")
