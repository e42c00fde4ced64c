"""Bundled measurement fixtures and their canonical CSV formats.

Two table families ship with the package, named by short aliases:

* ``a1``, ``a2``, ``a3`` - per-image prediction times for the three tasks
  (disc segmentation, cup segmentation, fundus classification) across five
  device configurations and 33 dataset sizes;
* ``b1``, ``b2``, ``b3`` - mean stable power and per-image energy for the
  three embedded configurations across ten dataset sizes.

Latency CSV header (values to two decimals, empty for failed cells):

    task,device,power_mode,dataset_size,per_image_ms,std_ms,anomalous,error

Energy CSV header (power to one decimal, energy in integer millijoules):

    task,device,power_mode,dataset_size,mean_power_w,power_std_w,energy_mj

Series CSV (single device column, used by the fit and speed-up commands):

    dataset_size,per_image_ms

Serializers here are the canonical writers: parsing a bundled file and
re-serializing it reproduces the bytes.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from ..analysis import EnergyRow
from ..errors import FixtureNotFound, MalformedLog
from ..timing import DeviceConfig, LatencyRecord, Protocol, TaskKind

LATENCY_HEADER = [
    "task", "device", "power_mode", "dataset_size",
    "per_image_ms", "std_ms", "anomalous", "error",
]
ENERGY_HEADER = [
    "task", "device", "power_mode", "dataset_size",
    "mean_power_w", "power_std_w", "energy_mj",
]
SERIES_HEADER = ["dataset_size", "per_image_ms"]

# Measurement protocol each bundled device used.
DEVICE_PROTOCOLS = {
    "colab_gpu": Protocol.WHOLE_DATASET,
    "colab_tpu": Protocol.WHOLE_DATASET,
    "edge_tpu": Protocol.ELEMENT_WISE,
    "maxwell_gpu": Protocol.BATCHED,
}

BUNDLED_ALIASES = ("a1", "a2", "a3", "b1", "b2", "b3")


def fixture_path(name: str | Path) -> Path:
    """Resolve a bundled alias (``a1`` .. ``b3``) or an existing CSV path."""
    if isinstance(name, str) and name in BUNDLED_ALIASES:
        bundled = resources.files(__package__) / f"{name}.csv"
        with resources.as_file(bundled) as p:
            return Path(p)
    p = Path(name)
    if p.is_file():
        return p
    raise FixtureNotFound(
        f"{name!r} is neither a bundled alias {BUNDLED_ALIASES} nor an existing file"
    )


def device_config(device: str, power_mode: str | None) -> DeviceConfig:
    protocol = DEVICE_PROTOCOLS.get(device, Protocol.ELEMENT_WISE)
    return DeviceConfig(device_name=device, protocol=protocol, power_mode=power_mode)


def _read_rows(text: str, expected_header: list[str], what: str) -> list[list[str]]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != expected_header:
        raise MalformedLog(
            f"bad {what} header: expected {','.join(expected_header)!r}"
        )
    return [row for row in reader if row]


def parse_latency_csv(text: str) -> list[LatencyRecord]:
    records = []
    for row in _read_rows(text, LATENCY_HEADER, "latency fixture"):
        task, device, mode, size, ms, std, anomalous, error = row
        records.append(
            LatencyRecord(
                task=TaskKind(task),
                device=device_config(device, mode or None),
                dataset_size=int(size),
                per_image_ms=float(ms) if ms else None,
                std_ms=float(std) if std else None,
                anomalous=anomalous == "true",
                error=error or None,
            )
        )
    return records


def serialize_latency_records(records: Sequence[LatencyRecord]) -> str:
    out = [",".join(LATENCY_HEADER)]
    for r in records:
        ms = "" if r.per_image_ms is None else f"{r.per_image_ms:.2f}"
        std = "" if r.std_ms is None else f"{r.std_ms:.2f}"
        out.append(
            f"{r.task.value},{r.device.device_name},{r.device.power_mode or ''},"
            f"{r.dataset_size},{ms},{std},"
            f"{'true' if r.anomalous else 'false'},{r.error or ''}"
        )
    return "\n".join(out) + "\n"


def load_latency_fixture(name: str | Path) -> list[LatencyRecord]:
    return parse_latency_csv(fixture_path(name).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class EnergyTable:
    """All per-size energy rows of one task x device configuration."""

    task: TaskKind
    device: DeviceConfig
    rows: tuple[EnergyRow, ...]


def parse_energy_csv(text: str) -> list[EnergyTable]:
    grouped: dict[tuple[str, str, str], list[EnergyRow]] = {}
    order: list[tuple[str, str, str]] = []
    for row in _read_rows(text, ENERGY_HEADER, "energy fixture"):
        task, device, mode, size, power, std, energy = row
        key = (task, device, mode)
        if key not in grouped:
            grouped[key] = []
            order.append(key)
        grouped[key].append(
            EnergyRow(
                dataset_size=int(size),
                mean_power_w=float(power),
                power_std_w=float(std),
                energy_mj=float(energy),
            )
        )
    return [
        EnergyTable(
            task=TaskKind(task),
            device=device_config(device, mode or None),
            rows=tuple(grouped[(task, device, mode)]),
        )
        for task, device, mode in order
    ]


def serialize_energy_tables(tables: Sequence[EnergyTable]) -> str:
    out = [",".join(ENERGY_HEADER)]
    for t in tables:
        for r in t.rows:
            energy = (
                f"{r.energy_mj:.0f}" if r.energy_mj == int(r.energy_mj)
                else repr(r.energy_mj)
            )
            out.append(
                f"{t.task.value},{t.device.device_name},{t.device.power_mode or ''},"
                f"{r.dataset_size},{r.mean_power_w:.1f},{r.power_std_w:.1f},{energy}"
            )
    return "\n".join(out) + "\n"


def load_energy_fixture(name: str | Path) -> list[EnergyTable]:
    return parse_energy_csv(fixture_path(name).read_text(encoding="utf-8"))


def parse_series_csv(text: str) -> list[tuple[int, float]]:
    return [
        (int(row[0]), float(row[1]))
        for row in _read_rows(text, SERIES_HEADER, "series")
    ]


def serialize_series(points: Iterable[tuple[int, float]]) -> str:
    out = [",".join(SERIES_HEADER)]
    out.extend(f"{n},{ms:.2f}" for n, ms in points)
    return "\n".join(out) + "\n"
