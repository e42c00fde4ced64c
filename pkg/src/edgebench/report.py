"""Table and plot-data rendering for analysis outputs.

Renders latency tables, per-size energy tables, the cross-task energy
summary, the minimum speed-up table, and quality-metric tables as markdown
or CSV, plus per-device plot-data CSVs for external plotting. Rendering is a
pure function of the bundle: identical inputs give byte-identical files.
Files are written atomically (temp file + rename) under:

    <out>/<task>/<table-name>.{csv,md}
    <out>/summary/{energy_summary,speedups}.{csv,md}
    <out>/quality/<table-name>.{csv,md}
    <out>/plots/<task>_<device>.csv

Number formatting follows the analysis rounding policy: half away from zero,
one decimal for powers/energies in summaries, integer millijoules in
per-size tables, two decimals for latencies and speed-ups, three decimals
for quality statistics. Markdown cells use a literal "+/-" sign; CSV keeps
mean and std in separate columns.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .analysis import (
    EnergySummary,
    HyperbolicFit,
    min_speedup,
    predict_latency,
    round_half_away,
    summarize_energy,
)
from .errors import EmptyBundle, EmptyInput
from .fixtures import EnergyTable, serialize_latency_records
from .quality import QualityStats
from .timing import DeviceConfig, LatencyRecord, TaskKind

TASK_ORDER = (
    TaskKind.OD_SEGMENTATION,
    TaskKind.OC_SEGMENTATION,
    TaskKind.FUNDUS_CLASSIFICATION,
)
TASK_TITLES = {
    TaskKind.OD_SEGMENTATION: "OD segmentation",
    TaskKind.OC_SEGMENTATION: "OC segmentation",
    TaskKind.FUNDUS_CLASSIFICATION: "Fundus classification",
}
# Canonical column order; anything unknown sorts after these, alphabetically.
DEVICE_ORDER = (
    ("colab_gpu", None),
    ("colab_tpu", None),
    ("edge_tpu", None),
    ("maxwell_gpu", "5W"),
    ("maxwell_gpu", "MaxN"),
)
DEVICE_TITLES = {
    ("colab_gpu", None): "Colab GPU",
    ("colab_tpu", None): "Colab TPU",
    ("edge_tpu", None): "Edge TPU",
    ("maxwell_gpu", "5W"): "Maxwell GPU (5W)",
    ("maxwell_gpu", "MaxN"): "Maxwell GPU (MaxN)",
}


def device_key(device: DeviceConfig) -> tuple[str, str | None]:
    return (device.device_name, device.power_mode)


def device_title(device: DeviceConfig) -> str:
    key = device_key(device)
    if key in DEVICE_TITLES:
        return DEVICE_TITLES[key]
    name = device.device_name
    return f"{name} ({device.power_mode})" if device.power_mode else name


def _device_sort_key(key: tuple[str, str | None]):
    try:
        return (0, DEVICE_ORDER.index(key))
    except ValueError:
        return (1, key[0], key[1] or "")


def fmt1(x: float) -> str:
    return f"{round_half_away(x, 1):.1f}"


def fmt2(x: float) -> str:
    return f"{round_half_away(x, 2):.2f}"


def fmt3(x: float) -> str:
    return f"{round_half_away(x, 3):.3f}"


def fmt_mj(x: float) -> str:
    return f"{round_half_away(x, 0):.0f}"


@dataclass(frozen=True)
class QualityTable:
    """A labeled grid of QualityStats cells, e.g. metric x device."""

    name: str
    caption: str
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    cells: tuple[tuple[QualityStats, ...], ...]

    def __post_init__(self):
        if len(self.cells) != len(self.row_labels) or any(
            len(r) != len(self.col_labels) for r in self.cells
        ):
            raise ValueError("cell grid must match the row/column labels")


@dataclass(frozen=True)
class ReportBundle:
    """Everything one report renders. Any section may be empty."""

    latency: Mapping[TaskKind, tuple[LatencyRecord, ...]] = field(default_factory=dict)
    energy: Mapping[TaskKind, tuple[EnergyTable, ...]] = field(default_factory=dict)
    fits: Mapping[tuple[TaskKind, str], HyperbolicFit] = field(default_factory=dict)
    quality: tuple[QualityTable, ...] = ()

    def is_empty(self) -> bool:
        return not (self.latency or self.energy or self.quality)


def _write_atomic(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _md_table(caption: str, header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = [caption, ""]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("| " + " | ".join("---" for _ in header) + " |")
    for row in rows:
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def _csv_table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def _tasks_in_order(keys) -> list[TaskKind]:
    return [t for t in TASK_ORDER if t in keys] + sorted(
        (t for t in keys if t not in TASK_ORDER), key=lambda t: t.value
    )


def _pm(mean: str, std: str) -> str:
    return f"{mean} ± {std}"


def _latency_cell(rec: LatencyRecord) -> str:
    if rec.error is not None:
        return rec.error.replace("_", " ")
    cell = _pm(f"{rec.per_image_ms:.2f}", f"{rec.std_ms:.2f}")
    return f"{cell} (anomalous)" if rec.anomalous else cell


def _render_latency(task: TaskKind, records: Sequence[LatencyRecord],
                    fmt: str) -> str:
    if fmt == "csv":
        return serialize_latency_records(records)
    by_dev: dict[tuple[str, str | None], dict[int, LatencyRecord]] = {}
    sizes: set[int] = set()
    titles: dict[tuple[str, str | None], str] = {}
    for rec in records:
        key = device_key(rec.device)
        by_dev.setdefault(key, {})[rec.dataset_size] = rec
        titles[key] = device_title(rec.device)
        sizes.add(rec.dataset_size)
    dev_keys = sorted(by_dev, key=_device_sort_key)
    header = ["Dataset size"] + [titles[k] for k in dev_keys]
    rows = []
    for size in sorted(sizes):
        row = [str(size)]
        for k in dev_keys:
            rec = by_dev[k].get(size)
            row.append(_latency_cell(rec) if rec is not None else "")
        rows.append(row)
    caption = (
        f"Per-image prediction times for {TASK_TITLES[task]} "
        "(milliseconds, mean ± std)."
    )
    return _md_table(caption, header, rows)


def _render_energy(task: TaskKind, tables: Sequence[EnergyTable], fmt: str) -> str:
    tables = sorted(tables, key=lambda t: _device_sort_key(device_key(t.device)))
    if fmt == "csv":
        header = ["task", "device", "power_mode", "dataset_size",
                  "mean_power_w", "power_std_w", "energy_mj"]
        rows = [
            [task.value, t.device.device_name, t.device.power_mode or "",
             str(r.dataset_size), fmt1(r.mean_power_w), fmt1(r.power_std_w),
             fmt_mj(r.energy_mj)]
            for t in tables for r in t.rows
        ]
        return _csv_table(header, rows)
    sizes = sorted({r.dataset_size for t in tables for r in t.rows})
    header = ["Dataset size"]
    for t in tables:
        title = device_title(t.device)
        header += [f"{title} power (W)", f"{title} energy (mJ)"]
    rows = []
    for size in sizes:
        row = [str(size)]
        for t in tables:
            r = next((x for x in t.rows if x.dataset_size == size), None)
            if r is None:
                row += ["", ""]
            else:
                row += [_pm(fmt1(r.mean_power_w), fmt1(r.power_std_w)),
                        fmt_mj(r.energy_mj)]
        rows.append(row)
    caption = (
        f"Mean stable power and per-image energy for {TASK_TITLES[task]} "
        "(watts and millijoules)."
    )
    return _md_table(caption, header, rows)


def _render_summary(energy: Mapping[TaskKind, tuple[EnergyTable, ...]],
                    fmt: str) -> str:
    summaries: list[EnergySummary] = []
    for task in _tasks_in_order(energy):
        tables = sorted(
            energy[task], key=lambda t: _device_sort_key(device_key(t.device))
        )
        summaries.extend(
            summarize_energy(t.rows, task, t.device) for t in tables
        )
    if fmt == "csv":
        header = ["task", "device", "power_mode", "mean_power_w", "power_std_w",
                  "energy_mj", "energy_std_mj", "row_count"]
        rows = [
            [s.task.value, s.device.device_name, s.device.power_mode or "",
             fmt1(s.mean_power_w), fmt1(s.power_std_w),
             fmt1(s.energy_mj), fmt1(s.energy_std_mj), str(s.row_count)]
            for s in summaries
        ]
        return _csv_table(header, rows)
    dev_keys: list[tuple[str, str | None]] = []
    titles: dict[tuple[str, str | None], str] = {}
    for s in summaries:
        key = device_key(s.device)
        if key not in dev_keys:
            dev_keys.append(key)
            titles[key] = device_title(s.device)
    dev_keys.sort(key=_device_sort_key)
    header = ["Task"]
    for k in dev_keys:
        header += [f"{titles[k]} power (W)", f"{titles[k]} energy (mJ)"]
    rows = []
    for task in _tasks_in_order({s.task for s in summaries}):
        row = [TASK_TITLES[task]]
        for k in dev_keys:
            s = next(
                (x for x in summaries if x.task is task and device_key(x.device) == k),
                None,
            )
            if s is None:
                row += ["", ""]
            else:
                row += [_pm(fmt1(s.mean_power_w), fmt1(s.power_std_w)),
                        _pm(fmt1(s.energy_mj), fmt1(s.energy_std_mj))]
        rows.append(row)
    caption = (
        "Mean stable power and per-image energy by task and device "
        "(watts and millijoules, mean ± std across dataset sizes)."
    )
    return _md_table(caption, header, rows)


# The two standard comparisons: (column title, slow device, fast device).
SPEEDUP_COMPARISONS = (
    ("Edge TPU vs Maxwell GPU (MaxN)", ("maxwell_gpu", "MaxN"), ("edge_tpu", None)),
    ("Maxwell GPU (MaxN) vs Maxwell GPU (5W)", ("maxwell_gpu", "5W"),
     ("maxwell_gpu", "MaxN")),
)


def _render_speedups(latency: Mapping[TaskKind, tuple[LatencyRecord, ...]],
                     fmt: str) -> str | None:
    table_rows: list[tuple[TaskKind, str, float, int]] = []
    for task in _tasks_in_order(latency):
        by_dev: dict[tuple[str, str | None], list[LatencyRecord]] = {}
        for rec in latency[task]:
            by_dev.setdefault(device_key(rec.device), []).append(rec)
        for title, slow_key, fast_key in SPEEDUP_COMPARISONS:
            if slow_key in by_dev and fast_key in by_dev:
                result = min_speedup(by_dev[slow_key], by_dev[fast_key])
                table_rows.append(
                    (task, title, result.value, result.argmin_dataset_size)
                )
    if not table_rows:
        return None
    if fmt == "csv":
        header = ["task", "comparison", "min_speedup", "argmin_dataset_size"]
        rows = [
            [task.value, title, fmt2(value), str(n)]
            for task, title, value, n in table_rows
        ]
        return _csv_table(header, rows)
    col_titles = [c[0] for c in SPEEDUP_COMPARISONS]
    header = ["Task"] + col_titles
    rows = []
    for task in _tasks_in_order({r[0] for r in table_rows}):
        row = [TASK_TITLES[task]]
        for title in col_titles:
            cell = next(
                (fmt2(v) for t, c, v, _ in table_rows if t is task and c == title),
                "",
            )
            row.append(cell)
        rows.append(row)
    caption = (
        "Minimum speed-ups across common dataset sizes "
        "(anomalous cells excluded)."
    )
    return _md_table(caption, header, rows)


def _render_quality(table: QualityTable, fmt: str) -> str:
    if fmt == "csv":
        header = ["row", "column", "mean", "std", "count"]
        rows = [
            [rl, cl, fmt3(cell.mean), fmt3(cell.std), str(cell.count)]
            for rl, cell_row in zip(table.row_labels, table.cells)
            for cl, cell in zip(table.col_labels, cell_row)
        ]
        return _csv_table(header, rows)
    header = [""] + list(table.col_labels)
    rows = [
        [rl] + [_pm(fmt3(c.mean), fmt3(c.std)) for c in cell_row]
        for rl, cell_row in zip(table.row_labels, table.cells)
    ]
    return _md_table(table.caption, header, rows)


def emit_plot_series(
    records: Sequence[LatencyRecord],
    fit: HyperbolicFit | None = None,
) -> str:
    """Plot-data CSV of (dataset_size, observed_ms, std_ms[, fitted_ms]).

    Rows come out size-ascending; failed cells (no latency value) are
    skipped; the fitted column appears only when a fit is given.
    """
    valued = sorted(
        (r for r in records if r.per_image_ms is not None),
        key=lambda r: r.dataset_size,
    )
    if not valued:
        raise EmptyInput("no plottable records")
    header = ["dataset_size", "observed_ms", "std_ms"]
    if fit is not None:
        header.append("fitted_ms")
    rows = []
    for r in valued:
        row = [str(r.dataset_size), f"{r.per_image_ms:.2f}", f"{r.std_ms:.2f}"]
        if fit is not None:
            row.append(f"{predict_latency(fit, r.dataset_size):.6f}")
        rows.append(row)
    return _csv_table(header, rows)


def render_tables(
    bundle: ReportBundle, out_dir: str | Path, format: str = "markdown"
) -> list[Path]:
    """Write every table in the bundle under ``out_dir``; returns the paths."""
    if format not in ("csv", "markdown"):
        raise ValueError(f"format must be 'csv' or 'markdown', not {format!r}")
    if bundle.is_empty():
        raise EmptyBundle("bundle holds no latency, energy, or quality tables")
    out = Path(out_dir)
    ext = "csv" if format == "csv" else "md"
    written: list[Path] = []

    for task in _tasks_in_order(bundle.latency):
        text = _render_latency(task, bundle.latency[task], format)
        written.append(_write_atomic(out / task.value / f"latency.{ext}", text))
    for task in _tasks_in_order(bundle.energy):
        text = _render_energy(task, bundle.energy[task], format)
        written.append(_write_atomic(out / task.value / f"energy.{ext}", text))
    if bundle.energy:
        text = _render_summary(bundle.energy, format)
        written.append(_write_atomic(out / "summary" / f"energy_summary.{ext}", text))
    if bundle.latency:
        text = _render_speedups(bundle.latency, format)
        if text is not None:
            written.append(_write_atomic(out / "summary" / f"speedups.{ext}", text))
    for table in bundle.quality:
        text = _render_quality(table, format)
        written.append(_write_atomic(out / "quality" / f"{table.name}.{ext}", text))

    # Plot data is always CSV regardless of the table format.
    for task in _tasks_in_order(bundle.latency):
        by_dev: dict[tuple[str, str | None], list[LatencyRecord]] = {}
        labels: dict[tuple[str, str | None], str] = {}
        for rec in bundle.latency[task]:
            key = device_key(rec.device)
            by_dev.setdefault(key, []).append(rec)
            labels[key] = rec.device.label
        for key in sorted(by_dev, key=_device_sort_key):
            if all(r.per_image_ms is None for r in by_dev[key]):
                continue
            fit = bundle.fits.get((task, labels[key]))
            text = emit_plot_series(by_dev[key], fit)
            name = f"{task.value}_{labels[key]}.csv"
            written.append(_write_atomic(out / "plots" / name, text))
    return written
