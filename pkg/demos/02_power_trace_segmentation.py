#!/usr/bin/env python3
"""Segmenting a power-meter trace into experiment phases.

A benchmark campaign leaves a characteristic staircase in the power signal:
ten quiet seconds before each dataset load, a low plateau while the dataset
loads, five quiet seconds, then a higher plateau while the inferences run.
This demo builds such a trace synthetically (two datasets plus an
engine-load prelude), segments it, and computes the mean stable power of
each inference phase with the ramp samples trimmed off.
"""

import numpy as np

from edgebench import (
    ExperimentTimeline,
    PhaseKind,
    PowerSample,
    PowerTrace,
    mean_stable_power,
    segment_phases,
)

rng = np.random.default_rng(7)


def plateau(level_w: float, seconds: int) -> list[float]:
    return [level_w + rng.uniform(-0.02, 0.02) for _ in range(seconds)]


watts = (
    plateau(3.0, 6)            # CUDA engine load prelude
    + plateau(2.0, 10) + plateau(3.1, 4) + plateau(2.0, 5) + plateau(5.2, 12)
    + plateau(2.0, 10) + plateau(3.0, 4) + plateau(2.0, 5) + plateau(5.3, 14)
)
trace = PowerTrace(samples=tuple(
    PowerSample(t=float(i), voltage=5.0, current=w / 5.0)
    for i, w in enumerate(watts)
))

timeline = ExperimentTimeline(dataset_count=2, has_engine_load_prelude=True)
windows = segment_phases(trace, timeline)

print(f"{len(trace)} samples -> {len(windows)} windows")
for w in windows:
    ordinal = "-" if w.dataset_ordinal is None else w.dataset_ordinal
    print(f"  {w.kind.value:<12} dataset={ordinal}  samples [{w.start_index:>3}, {w.end_index:>3})")

print("\nstable power per inference phase (10% trimmed each end):")
for w in windows:
    if w.kind is PhaseKind.INFERENCE:
        stable = mean_stable_power(trace, w)
        print(
            f"  dataset {w.dataset_ordinal}: "
            f"{stable.mean_watts:.3f} ± {stable.std_watts:.3f} W "
            f"over {stable.samples_used} samples"
        )
