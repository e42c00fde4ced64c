"""Energy aggregation, cloud-latency model fitting, and speed-up analytics.

Units: power in watts, per-image time in milliseconds, so their product is
directly millijoules per image (W x ms = mJ). The latency model for remote
accelerators is a hyperbola plus a constant,

    t(n) = OT / n + IT

where n is the dataset size, OT (ms x images) captures fixed transfer
overhead amortized across the dataset, and IT (ms) is the asymptotic
per-image compute time. Fitting is ordinary least squares of t against 1/n.

Report rounding is half away from zero, applied to the decimal rendering of
a value (so 0.05-style ties behave as they do in hand arithmetic, not as in
binary floating point).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DegenerateInput, EmptyInput, NoCommonSizes, NonPositiveIT
from .timing import DeviceConfig, LatencyRecord, TaskKind


def round_half_away(value: float, ndigits: int = 0) -> float:
    """Round to ndigits decimals with ties going away from zero.

    Operates on the shortest decimal rendering of the float, so values that
    print as exact ties (e.g. 190.5) round up regardless of their binary
    representation.
    """
    quantum = Decimal(1).scaleb(-ndigits)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def image_energy(mean_power_w: float, per_image_ms: float) -> float:
    """Millijoules per image: mean stable power times per-image time."""
    if mean_power_w < 0 or per_image_ms < 0:
        raise ValueError("power and time must be non-negative")
    return mean_power_w * per_image_ms


@dataclass(frozen=True)
class EnergyRow:
    """Per-size energy cell: mean stable power and millijoules per image.

    ``energy_mj`` is the unrounded power x time product when built from
    measurements; rows loaded from published tables carry the rounded
    integers those tables print.
    """

    dataset_size: int
    mean_power_w: float
    power_std_w: float
    energy_mj: float

    def __post_init__(self):
        if self.dataset_size < 1:
            raise ValueError("dataset_size must be >= 1")
        if self.mean_power_w < 0 or self.power_std_w < 0 or self.energy_mj < 0:
            raise ValueError("power and energy values must be non-negative")


def energy_row(dataset_size: int, mean_power_w: float, power_std_w: float,
               per_image_ms: float) -> EnergyRow:
    """Build an EnergyRow from a stable-power measurement and a latency."""
    return EnergyRow(
        dataset_size=dataset_size,
        mean_power_w=mean_power_w,
        power_std_w=power_std_w,
        energy_mj=image_energy(mean_power_w, per_image_ms),
    )


@dataclass(frozen=True)
class EnergySummary:
    """Across-size aggregate of one task x device energy table."""

    task: TaskKind
    device: DeviceConfig
    mean_power_w: float
    power_std_w: float
    energy_mj: float
    energy_std_mj: float
    row_count: int


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    if min(values) == max(values):  # constant series reduces exactly
        return values[0], 0.0
    mean = math.fsum(values) / len(values)
    var = math.fsum((v - mean) ** 2 for v in values) / len(values)
    return mean, math.sqrt(var)


def summarize_energy(
    rows: Sequence[EnergyRow], task: TaskKind, device: DeviceConfig
) -> EnergySummary:
    """Mean and population std of power and energy across per-size rows."""
    if not rows:
        raise EmptyInput("no energy rows to summarize")
    p_mean, p_std = _mean_std([r.mean_power_w for r in rows])
    e_mean, e_std = _mean_std([r.energy_mj for r in rows])
    return EnergySummary(
        task=task,
        device=device,
        mean_power_w=p_mean,
        power_std_w=p_std,
        energy_mj=e_mean,
        energy_std_mj=e_std,
        row_count=len(rows),
    )


@dataclass(frozen=True)
class HyperbolicFit:
    """Fitted parameters of t(n) = OT/n + IT plus the rms of the residuals."""

    overload_term_ot: float
    independent_term_it: float
    residual_rms: float


def fit_hyperbolic(
    points: Sequence[tuple[float, float]], weighted: bool = False
) -> HyperbolicFit:
    """Least-squares fit of per-image time against inverse dataset size.

    ``points`` are (dataset_size, per_image_ms) pairs. With ``weighted`` the
    squared residuals are weighted by 1/n (sensitivity variant); the reported
    residual rms is always unweighted.
    """
    if len({n for n, _ in points}) < 2:
        raise DegenerateInput(
            f"need >= 2 distinct dataset sizes, got {len(points)} point(s) "
            f"over {len({n for n, _ in points})} size(s)"
        )
    n = np.array([p[0] for p in points], dtype=float)
    t = np.array([p[1] for p in points], dtype=float)
    if np.any(n < 1):
        raise ValueError("dataset sizes must be >= 1")
    x = 1.0 / n
    design = np.column_stack([x, np.ones_like(x)])
    rhs = t
    if weighted:
        sqrt_w = np.sqrt(1.0 / n)
        design = design * sqrt_w[:, None]
        rhs = t * sqrt_w
    (ot, it), *_ = np.linalg.lstsq(design, rhs, rcond=None)
    residuals = t - (ot * x + it)
    rms = math.sqrt(float(np.mean(residuals**2)))
    return HyperbolicFit(
        overload_term_ot=float(ot), independent_term_it=float(it), residual_rms=rms
    )


def predict_latency(fit: HyperbolicFit, n: int) -> float:
    """Model latency at dataset size n: OT/n + IT."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return fit.overload_term_ot / n + fit.independent_term_it


@dataclass(frozen=True)
class SpeedupResult:
    """Minimum per-size latency ratio slow/fast and the size attaining it."""

    value: float
    argmin_dataset_size: int
    scenario: TaskKind | None = None

    def __post_init__(self):
        if self.value <= 0:
            raise ValueError("speed-up must be positive")


def _usable_by_size(records: Iterable[LatencyRecord]) -> dict[int, float]:
    out: dict[int, float] = {}
    for rec in records:
        if rec.anomalous or rec.per_image_ms is None:
            continue
        if rec.dataset_size in out:
            raise ValueError(f"duplicate dataset size {rec.dataset_size}")
        out[rec.dataset_size] = rec.per_image_ms
    return out


def min_ratio(
    slow_by_size: Mapping[int, float], fast_by_size: Mapping[int, float]
) -> tuple[float, int]:
    """Minimum of slow/fast over common sizes; ties go to the smallest size."""
    common = sorted(set(slow_by_size) & set(fast_by_size))
    if not common:
        raise NoCommonSizes("the two series share no dataset size")
    best_n = min(common, key=lambda n: (slow_by_size[n] / fast_by_size[n], n))
    return slow_by_size[best_n] / fast_by_size[best_n], best_n


def min_speedup(
    slow: Sequence[LatencyRecord], fast: Sequence[LatencyRecord]
) -> SpeedupResult:
    """Minimum speed-up of the fast series over the slow one.

    Anomalous records are excluded before intersecting the dataset sizes.
    """
    if not slow or not fast:
        raise EmptyInput("both latency series must be non-empty")
    scenario = slow[0].task if slow[0].task == fast[0].task else None
    value, best_n = min_ratio(_usable_by_size(slow), _usable_by_size(fast))
    return SpeedupResult(value=value, argmin_dataset_size=best_n, scenario=scenario)


def asymptotic_speedup(edge_per_image_ms: float, fit: HyperbolicFit) -> float:
    """Large-dataset speed-up of the modeled device over a fixed edge latency:
    the edge time divided by the model's independent term."""
    if fit.independent_term_it <= 0:
        raise NonPositiveIT(
            f"independent term must be positive, got {fit.independent_term_it}"
        )
    if edge_per_image_ms <= 0:
        raise ValueError("edge per-image time must be positive")
    return edge_per_image_ms / fit.independent_term_it
