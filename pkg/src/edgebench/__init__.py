"""Benchmarking and energy-analysis toolkit for edge ML inference accelerators.

Measures (or replays) per-image inference latency under three timing
protocols, segments power-meter traces into experiment phases, computes
per-image energy, fits the hyperbolic cloud-latency model, derives minimum
speed-ups, and compares prediction outputs across devices. Bundled fixtures
let the entire pipeline run without hardware.
"""

from .analysis import (
    EnergyRow,
    EnergySummary,
    HyperbolicFit,
    SpeedupResult,
    asymptotic_speedup,
    energy_row,
    fit_hyperbolic,
    image_energy,
    min_speedup,
    predict_latency,
    round_half_away,
    summarize_energy,
)
from .errors import EdgeBenchError
from .harness import (
    BenchPlan,
    BenchResult,
    RunnerSpec,
    align_trace,
    latency_records,
    replay_fixture,
    run_benchmark,
    synthetic_images,
)
from .quality import (
    BinaryMask,
    ConfusionMatrix,
    ProbPair,
    QualityStats,
    classification_error,
    dice,
    dice_pair_stats,
    mean_classification_error,
    normalize_confusion,
    predicted_label_agrees,
    threshold_mask,
)
from .report import QualityTable, ReportBundle, emit_plot_series, render_tables
from .timing import (
    DeviceConfig,
    LatencyRecord,
    Protocol,
    TaskKind,
    TimingRun,
    per_image_batched,
    per_image_element_wise,
    per_image_whole_dataset,
    reduce_run,
)
from .trace import (
    ExperimentTimeline,
    PhaseKind,
    PhaseWindow,
    PowerSample,
    PowerTrace,
    SegmentationConfig,
    StablePower,
    TrimPolicy,
    instantaneous_power,
    mean_stable_power,
    parse_power_log,
    segment_phases,
    serialize_power_log,
)

__version__ = "0.1.0"

__all__ = [
    "EdgeBenchError",
    # trace
    "PowerSample", "PowerTrace", "ExperimentTimeline", "PhaseKind", "PhaseWindow",
    "SegmentationConfig", "StablePower", "TrimPolicy", "instantaneous_power",
    "parse_power_log", "serialize_power_log", "segment_phases", "mean_stable_power",
    # timing
    "TaskKind", "Protocol", "DeviceConfig", "TimingRun", "LatencyRecord",
    "per_image_whole_dataset", "per_image_batched", "per_image_element_wise",
    "reduce_run",
    # analysis
    "EnergyRow", "EnergySummary", "HyperbolicFit", "SpeedupResult",
    "image_energy", "energy_row", "summarize_energy", "fit_hyperbolic",
    "predict_latency", "min_speedup", "asymptotic_speedup", "round_half_away",
    # quality
    "BinaryMask", "ProbPair", "QualityStats", "ConfusionMatrix", "dice",
    "dice_pair_stats", "classification_error", "mean_classification_error",
    "normalize_confusion", "predicted_label_agrees", "threshold_mask",
    # harness
    "RunnerSpec", "BenchPlan", "BenchResult", "run_benchmark", "latency_records",
    "replay_fixture", "align_trace", "synthetic_images",
    # report
    "ReportBundle", "QualityTable", "render_tables", "emit_plot_series",
]
