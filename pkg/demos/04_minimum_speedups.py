#!/usr/bin/env python3
"""Minimum speed-ups between device configurations.

For two latency series over the same dataset sizes, the minimum per-size
ratio slow/fast is the most conservative claim one device can make over
the other. Anomalous cells (runaway times, memory errors) are excluded
before intersecting the sizes.
"""

from edgebench import TaskKind, min_speedup, replay_fixture

TASKS = {
    "a1": TaskKind.OD_SEGMENTATION,
    "a2": TaskKind.OC_SEGMENTATION,
    "a3": TaskKind.FUNDUS_CLASSIFICATION,
}

print(f"{'task':<24} {'edge vs maxn':>14} {'maxn vs 5w':>14}")
for alias, task in TASKS.items():
    edge = replay_fixture(alias, device="edge_tpu")
    maxn = replay_fixture(alias, device="maxwell_gpu", power_mode="MaxN")
    low = replay_fixture(alias, device="maxwell_gpu", power_mode="5W")
    vs_edge = min_speedup(maxn, edge)
    vs_modes = min_speedup(low, maxn)
    print(
        f"{task.value:<24} "
        f"{vs_edge.value:>8.2f} @n={vs_edge.argmin_dataset_size:<4} "
        f"{vs_modes.value:>8.2f} @n={vs_modes.argmin_dataset_size:<4}"
    )

print(
    "\nnote: the fixtures carry table-rounded milliseconds, so ratios can "
    "differ from unrounded sources by up to ~0.02."
)
