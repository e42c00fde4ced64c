#!/usr/bin/env python3
"""Replaying the bundled latency tables without any hardware.

The package ships three latency fixtures (aliases a1, a2, a3), one per
inference task, each holding per-image prediction times for five device
configurations across 33 dataset sizes. ``replay_fixture`` turns a fixture
slice into the same LatencyRecord objects a live benchmark run would yield,
so every downstream step (fitting, speed-ups, reporting) works identically
with or without a device on the bench.
"""

from edgebench import replay_fixture

records = replay_fixture("a1", task="od_segmentation", device="edge_tpu")
print(f"edge_tpu disc-segmentation column: {len(records)} sizes")
for rec in records[:5]:
    print(f"  n={rec.dataset_size:>4}  {rec.per_image_ms:6.2f} ± {rec.std_ms:4.2f} ms")
print("  ...")

# Anomalous cells keep their flags; failed cells carry the error text.
print("\nflagged rows in the classification table (edge_tpu):")
for rec in replay_fixture("a3", device="edge_tpu"):
    if rec.anomalous:
        shown = "-" if rec.per_image_ms is None else f"{rec.per_image_ms:.1f} ms"
        print(f"  n={rec.dataset_size:>4}  {shown}  error={rec.error}")

# A device with power modes appears once per mode.
maxwell = replay_fixture("a1", device="maxwell_gpu")
modes = sorted({r.device.power_mode for r in maxwell})
print(f"\nmaxwell_gpu rows cover power modes: {modes}")
