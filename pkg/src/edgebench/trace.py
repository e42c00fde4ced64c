"""Power-meter trace parsing, phase segmentation, and stable-power statistics.

A USB power tester samples voltage and current at roughly 1 Hz while a device
runs a benchmark campaign. The campaign alternates quiet guard periods with
dataset loads and inference bursts, so the instantaneous power signal is a
staircase: an idle floor, a low plateau per dataset load, and a higher plateau
per inference phase (optionally preceded by one engine-load plateau at the
very start). This module turns the raw log into that structure and computes
the mean "stable" power of each inference plateau, trimming the ramp samples
at both ends.

All functions are pure; all container types are frozen dataclasses.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from enum import Enum
from math import isfinite
import numpy as np

from .errors import (
    EmptyLog,
    MalformedLog,
    NonMonotonicTimestamps,
    SegmentationFailure,
    WindowTooShort,
)

LOG_HEADER = "timestamp_s,voltage_V,current_A"


@dataclass(frozen=True)
class PowerSample:
    """One meter reading: seconds since log start, volts, amperes."""

    t: float
    voltage: float
    current: float

    def __post_init__(self):
        if self.t < 0 or self.voltage < 0 or self.current < 0:
            raise ValueError("t, voltage and current must be non-negative")
        if not (isfinite(self.t) and isfinite(self.voltage) and isfinite(self.current)):
            raise ValueError("t, voltage and current must be finite")


def instantaneous_power(sample: PowerSample) -> float:
    """Power in watts for one sample: voltage times current."""
    return sample.voltage * sample.current


@dataclass(frozen=True)
class PowerTrace:
    """Ordered power samples; timestamps strictly increasing."""

    samples: tuple[PowerSample, ...]
    nominal_period: float = 1.0

    def __post_init__(self):
        times = [s.t for s in self.samples]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise NonMonotonicTimestamps("timestamps must be strictly increasing")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples], dtype=float)

    @property
    def powers(self) -> np.ndarray:
        return np.array([s.voltage * s.current for s in self.samples], dtype=float)


class PhaseKind(str, Enum):
    ENGINE_LOAD = "engine_load"
    IDLE = "idle"
    DATASET_LOAD = "dataset_load"
    INFERENCE = "inference"


@dataclass(frozen=True)
class PhaseWindow:
    """Half-open sample index range [start_index, end_index) of one phase.

    ``dataset_ordinal`` is 0-based and None for the engine-load prelude.
    """

    kind: PhaseKind
    start_index: int
    end_index: int
    dataset_ordinal: int | None = None

    def __post_init__(self):
        if not 0 <= self.start_index < self.end_index:
            raise ValueError("window must be a non-empty forward range")

    def __len__(self) -> int:
        return self.end_index - self.start_index


@dataclass(frozen=True)
class ExperimentTimeline:
    """Guard-period structure of one campaign.

    ``pre_load_idle`` seconds of quiet precede each dataset load and
    ``load_to_predict_gap`` seconds separate a load from its predictions.
    """

    dataset_count: int
    pre_load_idle: float = 10.0
    load_to_predict_gap: float = 5.0
    has_engine_load_prelude: bool = False

    def __post_init__(self):
        if self.dataset_count < 1:
            raise ValueError("dataset_count must be >= 1")
        if not self.pre_load_idle > self.load_to_predict_gap >= 0:
            raise ValueError("need pre_load_idle > load_to_predict_gap >= 0")


@dataclass(frozen=True)
class SegmentationConfig:
    """Thresholds for plateau detection.

    Plateaus are found by thresholding power above
    ``idle_floor + k * (peak - idle_floor)``; the two factors separate
    dataset-load plateaus (low) from inference plateaus (high). Runs shorter
    than ``min_plateau_samples`` are treated as noise. When
    ``validate_guards`` is set, the quiet stretch before each dataset load
    must span at least ``guard_fraction`` of the timeline's pre-load idle.
    """

    k_load: float = 0.15
    k_inference: float = 0.5
    min_plateau_samples: int = 2
    validate_guards: bool = True
    guard_fraction: float = 0.5
    flat_rel_tol: float = 1e-9

    def __post_init__(self):
        if not 0 < self.k_load < self.k_inference <= 1:
            raise ValueError("need 0 < k_load < k_inference <= 1")
        if self.min_plateau_samples < 1:
            raise ValueError("min_plateau_samples must be >= 1")


@dataclass(frozen=True)
class StablePower:
    """Mean and population std of power over a trimmed inference window."""

    mean_watts: float
    std_watts: float
    samples_used: int


@dataclass(frozen=True)
class TrimPolicy:
    """Drop a fraction of samples (at least ``min_samples``) from each end."""

    fraction: float = 0.10
    min_samples: int = 1

    def __post_init__(self):
        if not 0 <= self.fraction < 0.5:
            raise ValueError("fraction must be in [0, 0.5)")
        if self.min_samples < 0:
            raise ValueError("min_samples must be >= 0")

    def trim_count(self, window_length: int) -> int:
        return max(self.min_samples, int(self.fraction * window_length))


def _parse_field(raw: str, line_no: int) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise MalformedLog(f"line {line_no}: non-numeric field {raw!r}") from None
    if not isfinite(value):
        raise MalformedLog(f"line {line_no}: non-finite field {raw!r}")
    if value < 0:
        raise MalformedLog(f"line {line_no}: negative value {raw!r}")
    return value


def parse_power_log(text: str, nominal_period: float = 1.0) -> PowerTrace:
    """Parse canonical power-log CSV text into a PowerTrace.

    Expected format: UTF-8, LF or CRLF endings, header ``timestamp_s,
    voltage_V,current_A``, then one row of three decimal numbers per sample.
    """
    lines = text.splitlines()
    if not lines or lines[0].strip() != LOG_HEADER:
        found = lines[0].strip() if lines else "<empty>"
        raise MalformedLog(f"bad header: expected {LOG_HEADER!r}, found {found!r}")

    samples: list[PowerSample] = []
    last_t: float | None = None
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.strip().split(",")
        if len(parts) != 3:
            raise MalformedLog(f"line {line_no}: expected 3 fields, found {len(parts)}")
        t, v, a = (_parse_field(p, line_no) for p in parts)
        if last_t is not None and t <= last_t:
            raise NonMonotonicTimestamps(
                f"line {line_no}: t={t} does not increase past {last_t}"
            )
        last_t = t
        samples.append(PowerSample(t=t, voltage=v, current=a))
    if not samples:
        raise EmptyLog("log has a header but no data rows")
    return PowerTrace(samples=tuple(samples), nominal_period=nominal_period)


def serialize_power_log(trace: PowerTrace) -> str:
    """Render a trace in the canonical log format; parses back identically."""
    out = io.StringIO()
    out.write(LOG_HEADER + "\n")
    for s in trace.samples:
        out.write(f"{s.t!r},{s.voltage!r},{s.current!r}\n")
    return out.getvalue()


def convert_tester_export(
    text: str,
    *,
    time_col: str | int | None = None,
    voltage_col: str | int = "voltage",
    current_col: str | int = "current",
    delimiter: str = ",",
    decimal_comma: bool = False,
    period: float = 1.0,
) -> str:
    """Adapt a USB tester's native export to the canonical log format.

    Column selectors may be header names or 0-based indices. Exports without
    a time column get timestamps synthesized as ``row_index * period``.
    Returns canonical CSV text (feed it to :func:`parse_power_log`).
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MalformedLog("export is empty")
    header = [h.strip() for h in lines[0].split(delimiter)]

    def resolve(col: str | int, what: str) -> int:
        if isinstance(col, int):
            if not 0 <= col < len(header):
                raise MalformedLog(f"{what} column index {col} out of range")
            return col
        try:
            return header.index(col)
        except ValueError:
            raise MalformedLog(f"{what} column {col!r} not in header {header}") from None

    vi = resolve(voltage_col, "voltage")
    ci = resolve(current_col, "current")
    ti = resolve(time_col, "time") if time_col is not None else None

    def number(raw: str, line_no: int) -> float:
        if decimal_comma:
            raw = raw.replace(",", ".")
        return _parse_field(raw.strip(), line_no)

    rows = []
    for i, line in enumerate(lines[1:]):
        parts = line.split(delimiter)
        line_no = i + 2
        t = number(parts[ti], line_no) if ti is not None else i * period
        rows.append((t, number(parts[vi], line_no), number(parts[ci], line_no)))
    if not rows:
        raise EmptyLog("export has a header but no data rows")
    out = [LOG_HEADER]
    out.extend(f"{t!r},{v!r},{a!r}" for t, v, a in rows)
    return "\n".join(out) + "\n"


def _true_runs(mask: np.ndarray, min_len: int) -> list[tuple[int, int]]:
    """Contiguous True runs of at least min_len, as half-open index pairs."""
    runs: list[tuple[int, int]] = []
    start = None
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            if i - start >= min_len:
                runs.append((start, i))
            start = None
    if start is not None and len(mask) - start >= min_len:
        runs.append((start, len(mask)))
    return runs


def segment_phases(
    trace: PowerTrace,
    timeline: ExperimentTimeline,
    config: SegmentationConfig = SegmentationConfig(),
) -> tuple[PhaseWindow, ...]:
    """Split a trace into per-dataset (idle, dataset_load, inference) windows.

    Returns exactly ``timeline.dataset_count`` ordered triples, preceded by
    one engine-load window when the timeline declares a prelude. Raises
    SegmentationFailure when the trace does not show the expected number of
    inference plateaus or the plateau structure is inconsistent with the
    timeline's guard periods.
    """
    if len(trace) == 0:
        raise ValueError("trace must be non-empty")
    powers = trace.powers
    times = trace.times
    floor = float(powers.min())
    peak = float(powers.max())
    span = peak - floor
    if span <= config.flat_rel_tol * max(abs(peak), 1.0):
        raise SegmentationFailure(
            f"trace is flat ({peak:.6g} W); detected 0 plateaus, "
            f"expected {timeline.dataset_count}",
            detected=0,
        )
    load_thr = floor + config.k_load * span
    inference_thr = floor + config.k_inference * span

    inference_runs = _true_runs(powers >= inference_thr, config.min_plateau_samples)
    if len(inference_runs) != timeline.dataset_count:
        raise SegmentationFailure(
            f"detected {len(inference_runs)} inference plateaus, "
            f"expected {timeline.dataset_count}",
            detected=len(inference_runs),
        )

    load_runs = _true_runs(powers >= load_thr, config.min_plateau_samples)

    windows: list[PhaseWindow] = []
    prev_end = 0
    for ordinal, (inf_start, inf_end) in enumerate(inference_runs):
        candidates = [r for r in load_runs if r[0] >= prev_end and r[1] <= inf_start]
        expect_engine = ordinal == 0 and timeline.has_engine_load_prelude
        expected = 2 if expect_engine else 1
        if len(candidates) != expected:
            raise SegmentationFailure(
                f"dataset {ordinal}: found {len(candidates)} load plateau(s) "
                f"before inference, expected {expected}"
            )
        if expect_engine:
            eng = candidates[0]
            windows.append(PhaseWindow(PhaseKind.ENGINE_LOAD, eng[0], eng[1]))
            prev_end = eng[1]
        load = candidates[-1]
        if load[0] <= prev_end:
            raise SegmentationFailure(
                f"dataset {ordinal}: no idle guard before dataset load"
            )
        if config.validate_guards:
            idle_span = times[load[0]] - times[prev_end]
            if idle_span < config.guard_fraction * timeline.pre_load_idle:
                raise SegmentationFailure(
                    f"dataset {ordinal}: idle guard lasts {idle_span:.3g} s, "
                    f"below {config.guard_fraction:.0%} of the "
                    f"{timeline.pre_load_idle:.3g} s pre-load idle"
                )
        windows.append(PhaseWindow(PhaseKind.IDLE, prev_end, load[0], ordinal))
        windows.append(PhaseWindow(PhaseKind.DATASET_LOAD, load[0], load[1], ordinal))
        windows.append(PhaseWindow(PhaseKind.INFERENCE, inf_start, inf_end, ordinal))
        prev_end = inf_end

    # Thresholding guarantees this ordering of mean levels; verify anyway.
    for ordinal in range(timeline.dataset_count):
        load_w = next(
            w for w in windows
            if w.dataset_ordinal == ordinal and w.kind is PhaseKind.DATASET_LOAD
        )
        inf_w = next(
            w for w in windows
            if w.dataset_ordinal == ordinal and w.kind is PhaseKind.INFERENCE
        )
        load_mean = float(powers[load_w.start_index:load_w.end_index].mean())
        inf_mean = float(powers[inf_w.start_index:inf_w.end_index].mean())
        if not inf_mean > load_mean > floor:
            raise SegmentationFailure(
                f"dataset {ordinal}: power levels out of order "
                f"(inference {inf_mean:.4g} W, load {load_mean:.4g} W, "
                f"floor {floor:.4g} W)"
            )
    return tuple(windows)


def mean_stable_power(
    trace: PowerTrace,
    window: PhaseWindow,
    trim: TrimPolicy = TrimPolicy(),
) -> StablePower:
    """Mean and population std of power over the trimmed inference window."""
    if window.kind is not PhaseKind.INFERENCE:
        raise ValueError(f"window kind must be inference, not {window.kind.value}")
    if window.end_index > len(trace):
        raise ValueError("window extends past the end of the trace")
    length = len(window)
    cut = trim.trim_count(length)
    if length - 2 * cut < 1:
        raise WindowTooShort(
            f"trimming {cut} samples each end leaves nothing of a "
            f"{length}-sample window"
        )
    kept = trace.powers[window.start_index + cut : window.end_index - cut]
    if kept.min() == kept.max():  # constant window reduces exactly
        return StablePower(float(kept[0]), 0.0, int(kept.size))
    return StablePower(
        mean_watts=float(kept.mean()),
        std_watts=float(kept.std()),
        samples_used=int(kept.size),
    )
