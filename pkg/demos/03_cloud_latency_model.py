#!/usr/bin/env python3
"""Fitting the remote-accelerator latency model t(n) = OT/n + IT.

Remote accelerators pay a fixed data-transfer overhead per dataset, so
their per-image time falls hyperbolically with dataset size toward an
asymptotic compute time. The fit is ordinary least squares of the observed
per-image time against the inverse size; OT captures the overhead and IT
the asymptote. The plot-data emitter appends the fitted curve so external
tools can overlay model and measurement.
"""

from edgebench import (
    asymptotic_speedup,
    emit_plot_series,
    fit_hyperbolic,
    predict_latency,
    replay_fixture,
)

records = replay_fixture("a1", device="colab_tpu")
points = [(r.dataset_size, r.per_image_ms) for r in records]
fit = fit_hyperbolic(points)

print("cloud-TPU column, disc segmentation:")
print(f"  overhead term OT  = {fit.overload_term_ot:8.2f} ms*images")
print(f"  asymptote IT      = {fit.independent_term_it:8.2f} ms")
print(f"  residual rms      = {fit.residual_rms:8.2f} ms")

print("\nmodel vs observation:")
for n in (10, 100, 1500):
    observed = dict(points)[n]
    print(f"  n={n:>4}: observed {observed:6.2f} ms, fitted "
          f"{predict_latency(fit, n):6.2f} ms")

# How a fixed-latency on-device accelerator compares at very large datasets:
edge_ms = 8.3
print(f"\nlarge-n speed-up of the modeled device over a fixed {edge_ms} ms "
      f"edge latency: {asymptotic_speedup(edge_ms, fit):.3f}")

csv_text = emit_plot_series(records, fit)
print(f"\nplot-data CSV ({len(csv_text.splitlines()) - 1} rows), first lines:")
for line in csv_text.splitlines()[:4]:
    print(f"  {line}")
