#!/usr/bin/env python3
"""Per-image energy: stable power times per-image latency.

Power in watts times latency in milliseconds gives millijoules per image
directly. The bundled energy fixtures (b1, b2, b3) pair each dataset size's
mean stable power with the matching latency cell; summarizing a task x
device table yields the headline numbers. Report rounding is half away
from zero: one decimal in summaries, integer millijoules per size.
"""

from edgebench import image_energy, round_half_away, summarize_energy
from edgebench.fixtures import load_energy_fixture
from edgebench.harness import replay_fixture

# A single cell, from first principles.
power_w = 4.2
latency = next(
    r for r in replay_fixture("a1", device="edge_tpu")
    if r.dataset_size == 100
)
energy = image_energy(power_w, latency.per_image_ms)
print(
    f"edge_tpu @ n=100: {power_w} W x {latency.per_image_ms} ms "
    f"= {energy:.3f} mJ -> {round_half_away(energy):.0f} mJ per image"
)

# Whole tables, summarized.
print(f"\n{'task':<24} {'device':<18} {'power (W)':>12} {'energy (mJ)':>16}")
for alias in ("b1", "b2", "b3"):
    for table in load_energy_fixture(alias):
        s = summarize_energy(table.rows, table.task, table.device)
        print(
            f"{s.task.value:<24} {s.device.label:<18} "
            f"{round_half_away(s.mean_power_w, 1):>6.1f} ± "
            f"{round_half_away(s.power_std_w, 1):.1f} "
            f"{round_half_away(s.energy_mj, 1):>9.1f} ± "
            f"{round_half_away(s.energy_std_mj, 1):.1f}"
        )
