#!/usr/bin/env python3
"""Regenerate the repo-level fixtures/ directory from the packaged data.

Copies the six master tables verbatim and derives the per-device series
files (anomalous rows excluded). ``tests/test_fixtures.py`` asserts the two
locations stay in sync, so rerun this after touching the packaged CSVs.
"""

from __future__ import annotations

from pathlib import Path

from edgebench.fixtures import (
    fixture_path,
    load_latency_fixture,
    serialize_series,
)

REPO = Path(__file__).parent.parent
OUT = REPO / "fixtures"

SERIES_LABELS = {
    ("colab_gpu", None): "colab_gpu",
    ("colab_tpu", None): "colab_tpu",
    ("edge_tpu", None): "edge_tpu",
    ("maxwell_gpu", "5W"): "maxwell_5w",
    ("maxwell_gpu", "MaxN"): "maxwell_maxn",
}


def main() -> None:
    OUT.mkdir(exist_ok=True)
    for alias in ("a1", "a2", "a3", "b1", "b2", "b3"):
        text = fixture_path(alias).read_text(encoding="utf-8")
        (OUT / f"{alias}.csv").write_text(text, encoding="utf-8")
        print(f"fixtures/{alias}.csv")
    for alias in ("a1", "a2", "a3"):
        records = load_latency_fixture(alias)
        for (device, mode), label in SERIES_LABELS.items():
            points = [
                (r.dataset_size, r.per_image_ms)
                for r in records
                if r.device.device_name == device
                and r.device.power_mode == mode
                and not r.anomalous
            ]
            name = f"{alias}_{label}.csv"
            (OUT / name).write_text(serialize_series(points), encoding="utf-8")
            print(f"fixtures/{name} ({len(points)} points)")


if __name__ == "__main__":
    main()
