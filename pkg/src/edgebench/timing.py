"""Per-image latency reduction under the three measurement protocols.

Raw wall times arrive in one of three shapes, depending on how the inference
framework consumes data:

* whole_dataset - one wall time per repetition of predicting the full dataset
  (cloud-style frameworks that take a whole tensor);
* batched - one wall time per batch after splitting the dataset into
  fixed-size batches (memory-constrained devices);
* element_wise - one wall time per dataset element (interpreters that only
  accept single inputs).

In every protocol the first measurement is a warm-up (model transfer, memory
allocation) and is discarded; the remaining measurements reduce to a
per-image mean and population standard deviation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .errors import TooFewBatches, TooFewElements, TooFewRepetitions


class TaskKind(str, Enum):
    OD_SEGMENTATION = "od_segmentation"
    OC_SEGMENTATION = "oc_segmentation"
    FUNDUS_CLASSIFICATION = "fundus_classification"


class Protocol(str, Enum):
    WHOLE_DATASET = "whole_dataset"
    BATCHED = "batched"
    ELEMENT_WISE = "element_wise"


@dataclass(frozen=True)
class DeviceConfig:
    """A device under test plus the protocol its framework imposes.

    ``power_mode`` is user-declared metadata for devices with selectable
    operating points (e.g. "5W" / "MaxN"); None for single-mode devices.
    """

    device_name: str
    protocol: Protocol
    power_mode: str | None = None

    @property
    def label(self) -> str:
        if self.power_mode:
            return f"{self.device_name}_{self.power_mode.lower()}"
        return self.device_name


@dataclass(frozen=True)
class TimingRun:
    """Raw wall times for one device x task x dataset size.

    ``measurements[0]`` is the warm-up measurement and is discarded by the
    reduction functions. A non-None ``error`` marks a run the runner aborted
    (e.g. out of memory); such runs carry whatever measurements were taken
    before the failure and reduce to an anomalous record, not numbers.
    ``roundtrip_ms`` are orchestrator-side diagnostics only and never enter
    the latency math.
    """

    device: DeviceConfig
    task: TaskKind
    dataset_size: int
    measurements: tuple[float, ...]
    error: str | None = None
    load_ms: float | None = None
    roundtrip_ms: tuple[float, ...] = ()

    def __post_init__(self):
        if self.dataset_size < 1:
            raise ValueError("dataset_size must be >= 1")
        if any(m <= 0 for m in self.measurements):
            raise ValueError("wall times must be positive")


@dataclass(frozen=True)
class LatencyRecord:
    """Per-image latency (mean +/- population std) for one measurement cell.

    Anomalous cells keep their flag; runner-reported failures carry the
    error text and no latency numbers.
    """

    task: TaskKind
    device: DeviceConfig
    dataset_size: int
    per_image_ms: float | None
    std_ms: float | None
    anomalous: bool = False
    error: str | None = None

    def __post_init__(self):
        if self.dataset_size < 1:
            raise ValueError("dataset_size must be >= 1")
        if self.error is None:
            if self.per_image_ms is None or self.std_ms is None:
                raise ValueError("records without an error must carry latency values")
            if self.per_image_ms <= 0 or self.std_ms < 0:
                raise ValueError("need per_image_ms > 0 and std_ms >= 0")
        elif self.per_image_ms is not None or self.std_ms is not None:
            raise ValueError("error records must not carry latency values")


def _mean_and_population_std(values: Sequence[float]) -> tuple[float, float]:
    if min(values) == max(values):  # constant series reduces exactly
        return values[0], 0.0
    mean = math.fsum(values) / len(values)
    var = math.fsum((v - mean) ** 2 for v in values) / len(values)
    return mean, math.sqrt(var)


def _record(run: TimingRun, per_image_values: Sequence[float]) -> LatencyRecord:
    mean, std = _mean_and_population_std(per_image_values)
    return LatencyRecord(
        task=run.task,
        device=run.device,
        dataset_size=run.dataset_size,
        per_image_ms=mean,
        std_ms=std,
    )


def per_image_whole_dataset(run: TimingRun) -> LatencyRecord:
    """Reduce whole-dataset repetitions: discard the warm-up repetition, then
    average (repetition time / dataset size) over the rest."""
    if run.device.protocol is not Protocol.WHOLE_DATASET:
        raise ValueError("run protocol is not whole_dataset")
    if len(run.measurements) < 2:
        raise TooFewRepetitions(
            f"need >= 2 repetitions, got {len(run.measurements)}"
        )
    per_image = [m / run.dataset_size for m in run.measurements[1:]]
    return _record(run, per_image)


def batch_sizes(dataset_size: int, batch_size: int) -> list[int]:
    """Element counts of the batches a dataset splits into; the last batch is
    short when the size is not a multiple."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    full, rem = divmod(dataset_size, batch_size)
    return [batch_size] * full + ([rem] if rem else [])


def per_image_batched(run: TimingRun, batch_size: int = 10) -> LatencyRecord:
    """Reduce batched times: discard the warm-up batch, then average
    (batch time / batch element count) over the remaining batches."""
    if run.device.protocol is not Protocol.BATCHED:
        raise ValueError("run protocol is not batched")
    if len(run.measurements) < 2:
        raise TooFewBatches(f"need >= 2 batch times, got {len(run.measurements)}")
    counts = batch_sizes(run.dataset_size, batch_size)
    timed = run.measurements[1:]
    if len(timed) != len(counts):
        raise ValueError(
            f"got {len(timed)} batch times for {len(counts)} batches "
            f"(dataset {run.dataset_size}, batch {batch_size})"
        )
    per_image = [m / c for m, c in zip(timed, counts)]
    return _record(run, per_image)


def per_image_element_wise(run: TimingRun) -> LatencyRecord:
    """Reduce element times: discard the warm-up element, then average the
    remaining per-element times directly."""
    if run.device.protocol is not Protocol.ELEMENT_WISE:
        raise ValueError("run protocol is not element_wise")
    if len(run.measurements) < 2:
        raise TooFewElements(f"need >= 2 element times, got {len(run.measurements)}")
    return _record(run, list(run.measurements[1:]))


def reduce_run(run: TimingRun, batch_size: int = 10) -> LatencyRecord:
    """Dispatch to the protocol's reduction; error runs become anomalous
    records with no latency numbers."""
    if run.error is not None:
        return LatencyRecord(
            task=run.task,
            device=run.device,
            dataset_size=run.dataset_size,
            per_image_ms=None,
            std_ms=None,
            anomalous=True,
            error=run.error,
        )
    if run.device.protocol is Protocol.WHOLE_DATASET:
        return per_image_whole_dataset(run)
    if run.device.protocol is Protocol.BATCHED:
        return per_image_batched(run, batch_size)
    return per_image_element_wise(run)
