"""Benchmark orchestration over a pluggable runner subprocess.

The harness owns the experiment choreography - guard-period sleeps, dataset
ordering, warm-up predictions, batching - and delegates the actual inference
to a runner process it talks to over newline-delimited JSON:

    -> {"cmd": "load", "model": "<path>", "input_shape": [H, W, C]}
    <- {"ok": true, "load_ms": <float>}
    -> {"cmd": "predict", "n": <count>, "data": "<path or 'synthetic'>"}
    <- {"ok": true, "wall_ms": <float>, "outputs": "<optional path>"}
    <- {"ok": false, "error": "<text>"}
    -> {"cmd": "quit"}

Canonical wall times are the runner's own (measured around its framework
predict call); the orchestrator's round-trip times are recorded as
diagnostics only. Any non-JSON line on the runner's stdout is a protocol
violation; runners log to stderr. A replay runner substitutes bundled
latency fixtures for live hardware.
"""

from __future__ import annotations

import json
import logging
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path
import numpy as np

from . import fixtures
from .errors import (
    CountMismatch,
    NoMatchingRows,
    ProtocolViolation,
    RunnerLaunchFailure,
    SegmentationFailure,
)
from .timing import (
    DeviceConfig,
    LatencyRecord,
    Protocol,
    TaskKind,
    TimingRun,
    batch_sizes,
    reduce_run,
)
from .trace import (
    ExperimentTimeline,
    PhaseKind,
    PhaseWindow,
    PowerTrace,
    SegmentationConfig,
    StablePower,
    TrimPolicy,
    mean_stable_power,
    segment_phases,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunnerSpec:
    """How to launch a runner and what input it must accept."""

    launch_command: tuple[str, ...]
    model_artifact: str
    input_shape: tuple[int, int, int]

    def __post_init__(self):
        if not self.launch_command:
            raise ValueError("launch_command must be non-empty")
        if any(d <= 0 for d in self.input_shape):
            raise ValueError("input_shape components must be positive")


@dataclass(frozen=True)
class BenchPlan:
    """One benchmark campaign: which task, which sizes, which protocol."""

    task: TaskKind
    dataset_sizes: tuple[int, ...]
    protocol: Protocol
    timeline: ExperimentTimeline
    repetitions: int = 10
    batch_size: int = 10

    def __post_init__(self):
        if not self.dataset_sizes:
            raise ValueError("dataset_sizes must be non-empty")
        if any(b <= a for a, b in zip(self.dataset_sizes, self.dataset_sizes[1:])):
            raise ValueError("dataset_sizes must be strictly increasing")
        if any(s < 1 for s in self.dataset_sizes):
            raise ValueError("dataset_sizes must be positive")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.timeline.dataset_count != len(self.dataset_sizes):
            raise ValueError(
                "timeline.dataset_count must equal the number of dataset sizes"
            )


@dataclass(frozen=True)
class BenchResult:
    """Raw outcome of a campaign: one TimingRun per planned dataset size."""

    plan: BenchPlan
    runs: tuple[TimingRun, ...]
    runner_metadata: dict[str, str] = field(default_factory=dict)


def synthetic_images(
    shape: tuple[int, int, int], count: int, seed: int = 0
) -> np.ndarray:
    """Deterministic pseudo-random RGB tensor of ``count`` images.

    Stands in for datasets that cannot be redistributed; runners that want
    real data take a directory instead.
    """
    rng = np.random.default_rng(seed)
    h, w, c = shape
    return rng.integers(0, 256, size=(count, h, w, c), dtype=np.uint8)


class _RunnerSession:
    """One runner process and the message plumbing around it."""

    def __init__(self, spec: RunnerSpec):
        self.spec = spec
        try:
            self.proc = subprocess.Popen(
                list(spec.launch_command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=None,  # runner logs pass through to our stderr
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise RunnerLaunchFailure(
                f"could not start runner {spec.launch_command}: {exc}"
            ) from exc
        self.first_exchange = True

    def request(self, message: dict) -> dict:
        assert self.proc.stdin is not None and self.proc.stdout is not None
        try:
            self.proc.stdin.write(json.dumps(message) + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise RunnerLaunchFailure(f"runner pipe closed: {exc}") from exc
        line = self.proc.stdout.readline()
        if line == "":
            if self.first_exchange:
                raise RunnerLaunchFailure(
                    "runner exited before completing the first exchange"
                )
            raise ProtocolViolation("runner closed stdout mid-conversation")
        self.first_exchange = False
        line = line.rstrip("\n")
        try:
            reply = json.loads(line)
        except json.JSONDecodeError:
            raise ProtocolViolation(f"non-protocol line on runner stdout: {line!r}")
        if not isinstance(reply, dict) or "ok" not in reply:
            raise ProtocolViolation(f"reply without 'ok' field: {line!r}")
        return reply

    def send_only(self, message: dict) -> None:
        if self.proc.stdin is not None and self.proc.poll() is None:
            try:
                self.proc.stdin.write(json.dumps(message) + "\n")
                self.proc.stdin.flush()
            except (BrokenPipeError, OSError):
                pass

    def close(self) -> int | None:
        self.send_only({"cmd": "quit"})
        if self.proc.stdin is not None:
            try:
                self.proc.stdin.close()
            except OSError:
                pass
        try:
            return self.proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            self.proc.kill()
            return self.proc.wait()


def _predict_counts(plan: BenchPlan, dataset_size: int) -> list[int]:
    """Element counts of the non-warm-up predictions for one dataset size."""
    if plan.protocol is Protocol.WHOLE_DATASET:
        return [dataset_size] * plan.repetitions
    if plan.protocol is Protocol.BATCHED:
        return batch_sizes(dataset_size, plan.batch_size)
    return [1] * dataset_size


def run_benchmark(
    plan: BenchPlan,
    runner: RunnerSpec,
    *,
    device: DeviceConfig | None = None,
    data: str = "synthetic",
    sleep: bool = True,
) -> BenchResult:
    """Execute a campaign against a runner process.

    Per dataset size, in ascending order: idle for the pre-load guard, issue
    a load, idle for the load-to-predict gap, then issue one warm-up
    prediction plus the protocol's prediction sequence. A runner error reply
    marks that size anomalous and the campaign moves on; ``sleep=False``
    skips the guard periods for trace-free timing-only runs.
    """
    if device is None:
        device = DeviceConfig(device_name="runner", protocol=plan.protocol)
    if device.protocol is not plan.protocol:
        raise ValueError("device protocol must match the plan protocol")

    session = _RunnerSession(runner)
    runs: list[TimingRun] = []
    try:
        for size in plan.dataset_sizes:
            if sleep:
                time.sleep(plan.timeline.pre_load_idle)
            load_msg = {
                "cmd": "load",
                "model": runner.model_artifact,
                "input_shape": list(runner.input_shape),
            }
            reply = session.request(load_msg)
            if not reply.get("ok"):
                error = str(reply.get("error", "unspecified runner error"))
                log.warning("size %d: runner failed on load: %s", size, error)
                runs.append(
                    TimingRun(
                        device=device, task=plan.task, dataset_size=size,
                        measurements=(), error=error,
                    )
                )
                continue
            load_ms = float(reply["load_ms"])
            if sleep:
                time.sleep(plan.timeline.load_to_predict_gap)

            counts = _predict_counts(plan, size)
            # Warm-up repeats the first prediction; its count matches.
            sequence = [counts[0]] + counts
            wall_times: list[float] = []
            roundtrips: list[float] = []
            error: str | None = None
            for n in sequence:
                started = time.perf_counter()
                reply = session.request({"cmd": "predict", "n": n, "data": data})
                roundtrips.append((time.perf_counter() - started) * 1000.0)
                if not reply.get("ok"):
                    error = str(reply.get("error", "unspecified runner error"))
                    log.warning(
                        "size %d: runner failed after %d predictions: %s",
                        size, len(wall_times), error,
                    )
                    break
                wall_times.append(float(reply["wall_ms"]))
            runs.append(
                TimingRun(
                    device=device,
                    task=plan.task,
                    dataset_size=size,
                    measurements=tuple(wall_times) if error is None else (),
                    error=error,
                    load_ms=load_ms,
                    roundtrip_ms=tuple(roundtrips),
                )
            )
    finally:
        returncode = session.close()

    metadata = {
        "launch_command": " ".join(runner.launch_command),
        "model_artifact": runner.model_artifact,
        "runner_returncode": str(returncode),
        "timing_source": "runner-reported wall_ms; round-trips diagnostic only",
    }
    return BenchResult(plan=plan, runs=tuple(runs), runner_metadata=metadata)


def latency_records(result: BenchResult) -> list[LatencyRecord]:
    """Reduce a campaign's runs to per-image latency records."""
    return [reduce_run(run, result.plan.batch_size) for run in result.runs]


def replay_fixture(
    fixture: str | Path,
    task: TaskKind | str | None = None,
    device: str | None = None,
    power_mode: str | None = None,
) -> list[LatencyRecord]:
    """Load latency records from a fixture, optionally filtered.

    Hardware-free counterpart of :func:`run_benchmark`: the returned records
    are exactly the fixture's rows (anomaly flags preserved), so downstream
    analysis and reporting run identically with or without a device.
    """
    records = fixtures.load_latency_fixture(fixture)
    if isinstance(task, str):
        task = TaskKind(task)
    selected = [
        r for r in records
        if (task is None or r.task is task)
        and (device is None or r.device.device_name == device)
        and (power_mode is None or r.device.power_mode == power_mode)
    ]
    if not selected:
        raise NoMatchingRows(
            f"no rows match task={getattr(task, 'value', None)} "
            f"device={device} power_mode={power_mode}"
        )
    return selected


def align_trace(
    result: BenchResult,
    trace: PowerTrace,
    *,
    config: SegmentationConfig = SegmentationConfig(),
    trim: TrimPolicy = TrimPolicy(),
) -> list[tuple[int, PhaseWindow, StablePower]]:
    """Pair each planned dataset size with its inference window's power.

    Returns (dataset_size, inference_window, stable_power) triples in plan
    order. A clean plateau count that disagrees with the plan surfaces as
    CountMismatch; other segmentation problems propagate unchanged.
    """
    expected = len(result.plan.dataset_sizes)
    try:
        windows = segment_phases(trace, result.plan.timeline, config)
    except SegmentationFailure as exc:
        if exc.detected is not None and exc.detected > 0:
            raise CountMismatch(
                f"plan has {expected} dataset sizes but the trace shows "
                f"{exc.detected} inference plateaus",
                expected=expected,
                detected=exc.detected,
            ) from exc
        raise
    inference = [w for w in windows if w.kind is PhaseKind.INFERENCE]
    if len(inference) != expected:
        raise CountMismatch(
            f"plan has {expected} dataset sizes but segmentation yielded "
            f"{len(inference)} inference windows",
            expected=expected,
            detected=len(inference),
        )
    return [
        (size, window, mean_stable_power(trace, window, trim))
        for size, window in zip(result.plan.dataset_sizes, inference)
    ]
