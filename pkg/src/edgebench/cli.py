"""Command-line surface: benchmark runs, trace analysis, fitting, speed-ups,
quality comparison, replay, reporting, and log conversion.

Exit codes: 0 on success, 1 on a domain error (the error's machine-readable
name goes to stderr as ``Name: message``), 2 on a usage error. Every
subcommand accepts ``--config FILE`` naming a JSON object that supplies the
same keys as the flags (long names, dashes as underscores); explicit flags
override the config file and unknown keys are rejected. The environment
variable ``EDGEBENCH_LOG`` (error, warn, info, debug; default warn) controls
diagnostic verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import shlex
import sys
from pathlib import Path

from . import fixtures, harness, quality, report
from .analysis import fit_hyperbolic, min_ratio, round_half_away
from .errors import EdgeBenchError, UsageError
from .timing import DeviceConfig, Protocol, TaskKind
from .trace import (
    ExperimentTimeline,
    PhaseKind,
    convert_tester_export,
    mean_stable_power,
    parse_power_log,
    segment_phases,
)

log = logging.getLogger(__name__)

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def _setup_logging() -> None:
    raw = os.environ.get("EDGEBENCH_LOG", "warn").lower()
    level = _LOG_LEVELS.get(raw)
    if level is None:
        level = logging.WARNING
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )
    if raw not in _LOG_LEVELS:
        log.warning("EDGEBENCH_LOG=%r not in %s; using warn", raw, sorted(_LOG_LEVELS))


# Keys each subcommand accepts from --config, with hard defaults applied when
# neither the command line nor the config file supplies a value.
_DEFAULTS: dict[str, dict[str, object]] = {
    "bench run": {"no_sleep": False, "data": "synthetic"},
    "trace analyze": {},
    "fit": {"weighted": False},
    "speedup": {},
    "quality dice": {},
    "quality classify": {},
    "report": {"format": "markdown"},
    "replay": {"task": None, "device": None, "power_mode": None},
    "convert-log": {
        "time_col": None, "voltage_col": "voltage", "current_col": "current",
        "delimiter": ",", "decimal_comma": False, "period": 1.0,
    },
}
_REQUIRED: dict[str, tuple[str, ...]] = {
    "bench run": ("plan", "runner", "out"),
    "trace analyze": ("log", "plan", "out"),
    "fit": ("series",),
    "speedup": ("slow", "fast"),
    "quality dice": ("ref", "cand"),
    "quality classify": ("ref", "cand"),
    "report": ("in_dir", "out"),
    "replay": ("fixture",),
    "convert-log": ("in_dir", "out"),
}
_KEY_ALIASES = {"in": "in_dir"}


def _merge_config(args: argparse.Namespace, command: str) -> argparse.Namespace:
    allowed = set(_DEFAULTS[command]) | set(_REQUIRED[command])
    config: dict[str, object] = {}
    if args.config:
        try:
            config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(config, dict):
            raise UsageError("config file must hold a JSON object")
        config = {
            _KEY_ALIASES.get(k.replace("-", "_"), k.replace("-", "_")): v
            for k, v in config.items()
        }
        unknown = sorted(set(config) - allowed)
        if unknown:
            raise UsageError(
                f"unknown config key(s) {unknown}; allowed: {sorted(allowed)}"
            )
    for key in allowed:
        if getattr(args, key, None) is None:
            if key in config:
                default = _DEFAULTS[command].get(key)
                if isinstance(default, bool) and not isinstance(config[key], bool):
                    raise UsageError(f"config key {key!r} must be a JSON boolean")
                setattr(args, key, config[key])
            elif key in _DEFAULTS[command]:
                setattr(args, key, _DEFAULTS[command][key])
    missing = [k for k in _REQUIRED[command] if getattr(args, k, None) is None]
    if missing:
        flags = ", ".join("--" + ("in" if k == "in_dir" else k.replace("_", "-"))
                          for k in missing)
        raise UsageError(f"missing required option(s): {flags}")
    return args


def _read_text(path: str, what: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {what} {path!r}: {exc}") from exc


_PLAN_KEYS = {
    "task", "dataset_sizes", "protocol", "repetitions", "batch_size",
    "timeline", "device_name", "power_mode", "model", "input_shape",
}
_TIMELINE_KEYS = {"pre_load_idle", "load_to_predict_gap", "has_engine_load_prelude"}


def _load_plan(path: str) -> tuple[harness.BenchPlan, dict]:
    """Read a benchmark plan JSON file.

    Required keys: task, dataset_sizes, protocol. Optional: repetitions,
    batch_size, timeline {pre_load_idle, load_to_predict_gap,
    has_engine_load_prelude}, device_name, power_mode, model, input_shape.
    """
    try:
        raw = json.loads(_read_text(path, "plan file"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"plan file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise UsageError("plan file must hold a JSON object")
    unknown = sorted(set(raw) - _PLAN_KEYS)
    if unknown:
        raise UsageError(f"unknown plan key(s) {unknown}; allowed: {sorted(_PLAN_KEYS)}")
    for key in ("task", "dataset_sizes", "protocol"):
        if key not in raw:
            raise UsageError(f"plan file is missing required key {key!r}")
    tl_raw = raw.get("timeline", {})
    unknown = sorted(set(tl_raw) - _TIMELINE_KEYS)
    if unknown:
        raise UsageError(f"unknown timeline key(s) {unknown}")
    try:
        task = TaskKind(raw["task"])
        protocol = Protocol(raw["protocol"])
        sizes = tuple(int(n) for n in raw["dataset_sizes"])
        timeline = ExperimentTimeline(
            dataset_count=len(sizes),
            pre_load_idle=float(tl_raw.get("pre_load_idle", 10.0)),
            load_to_predict_gap=float(tl_raw.get("load_to_predict_gap", 5.0)),
            has_engine_load_prelude=bool(tl_raw.get("has_engine_load_prelude", False)),
        )
        plan = harness.BenchPlan(
            task=task,
            dataset_sizes=sizes,
            protocol=protocol,
            timeline=timeline,
            repetitions=int(raw.get("repetitions", 10)),
            batch_size=int(raw.get("batch_size", 10)),
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad plan file: {exc}") from exc
    extras = {
        "device_name": raw.get("device_name", "runner"),
        "power_mode": raw.get("power_mode"),
        "model": raw.get("model", "model"),
        "input_shape": tuple(raw.get("input_shape", (128, 128, 3))),
    }
    return plan, extras


def _cmd_bench_run(args) -> int:
    plan, extras = _load_plan(args.plan)
    spec = harness.RunnerSpec(
        launch_command=tuple(shlex.split(args.runner)),
        model_artifact=str(extras["model"]),
        input_shape=extras["input_shape"],
    )
    device = DeviceConfig(
        device_name=str(extras["device_name"]),
        protocol=plan.protocol,
        power_mode=extras["power_mode"],
    )
    result = harness.run_benchmark(
        plan, spec, device=device, data=str(args.data), sleep=not args.no_sleep
    )
    records = harness.latency_records(result)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "latency.csv").write_text(
        fixtures.serialize_latency_records(records), encoding="utf-8"
    )
    runs_payload = [
        {
            "dataset_size": run.dataset_size,
            "measurements_ms": list(run.measurements),
            "error": run.error,
            "load_ms": run.load_ms,
            "roundtrip_ms_diagnostic": list(run.roundtrip_ms),
        }
        for run in result.runs
    ]
    (out / "runs.json").write_text(
        json.dumps(runs_payload, indent=1) + "\n", encoding="utf-8"
    )
    (out / "metadata.json").write_text(
        json.dumps(result.runner_metadata, indent=1, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    anomalous = sum(1 for r in records if r.anomalous)
    if anomalous:
        log.warning("%d of %d runs were anomalous", anomalous, len(records))
    print(out / "latency.csv")
    return 0


def _cmd_trace_analyze(args) -> int:
    trace = parse_power_log(_read_text(args.log, "power log"))
    plan, _ = _load_plan(args.plan)
    windows = segment_phases(trace, plan.timeline)
    inference = [w for w in windows if w.kind is PhaseKind.INFERENCE]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    times = trace.times
    phase_lines = ["kind,dataset_ordinal,start_index,end_index,start_s,end_s"]
    for w in windows:
        ordinal = "" if w.dataset_ordinal is None else str(w.dataset_ordinal)
        end_s = times[w.end_index - 1]
        phase_lines.append(
            f"{w.kind.value},{ordinal},{w.start_index},{w.end_index},"
            f"{times[w.start_index]:.3f},{end_s:.3f}"
        )
    (out / "phases.csv").write_text("\n".join(phase_lines) + "\n", encoding="utf-8")
    power_lines = ["dataset_size,mean_power_w,power_std_w,samples_used"]
    for size, window in zip(plan.dataset_sizes, inference):
        stable = mean_stable_power(trace, window)
        power_lines.append(
            f"{size},{stable.mean_watts:.6f},{stable.std_watts:.6f},"
            f"{stable.samples_used}"
        )
    (out / "stable_power.csv").write_text(
        "\n".join(power_lines) + "\n", encoding="utf-8"
    )
    print(out / "stable_power.csv")
    return 0


def _cmd_fit(args) -> int:
    points = fixtures.parse_series_csv(_read_text(args.series, "series file"))
    fit = fit_hyperbolic(points, weighted=bool(args.weighted))
    print(f"overload_term_ms_images={fit.overload_term_ot:.6f}")
    print(f"independent_term_ms={fit.independent_term_it:.6f}")
    print(f"residual_rms_ms={fit.residual_rms:.6f}")
    return 0


def _cmd_speedup(args) -> int:
    slow = dict(fixtures.parse_series_csv(_read_text(args.slow, "series file")))
    fast = dict(fixtures.parse_series_csv(_read_text(args.fast, "series file")))
    value, argmin = min_ratio(slow, fast)
    print(f"min_speedup={round_half_away(value, 2):.2f}")
    print(f"argmin_dataset_size={argmin}")
    print(f"min_speedup_unrounded={value!r}")
    print("note=inputs are table-rounded values; expect up to ±0.02 "
          "against unrounded sources")
    return 0


def _cmd_quality_dice(args) -> int:
    ref_masks, cand_masks, _ = quality.load_mask_pairs(args.ref, args.cand)
    stats = quality.dice_pair_stats(ref_masks, cand_masks)
    print(f"dice_mean={report.fmt3(stats.mean)}")
    print(f"dice_std={report.fmt3(stats.std)}")
    print(f"count={stats.count}")
    return 0


def _cmd_quality_classify(args) -> int:
    ref = quality.parse_prob_csv(_read_text(args.ref, "reference CSV"))
    cand = quality.parse_prob_csv(_read_text(args.cand, "candidate CSV"))
    pairs = quality.pair_prob_maps(ref, cand)
    stats = quality.mean_classification_error(pairs)
    changed = sum(1 for r, c in pairs if not quality.predicted_label_agrees(r, c))
    print(f"error_mean={report.fmt3(stats.mean)}")
    print(f"error_std={report.fmt3(stats.std)}")
    print(f"count={stats.count}")
    print(f"label_changes={changed}")
    return 0


def _cmd_report(args) -> int:
    in_dir = Path(args.in_dir)
    if not in_dir.is_dir():
        raise UsageError(f"--in {in_dir} is not a directory")
    if args.format not in ("csv", "markdown"):
        raise UsageError(f"--format must be csv or markdown, not {args.format!r}")
    latency: dict[TaskKind, list] = {}
    energy: dict[TaskKind, list] = {}
    for path in sorted(in_dir.glob("*.csv")):
        header = path.read_text(encoding="utf-8").splitlines()[:1]
        header = header[0].split(",") if header else []
        if header == fixtures.LATENCY_HEADER:
            for rec in fixtures.parse_latency_csv(path.read_text(encoding="utf-8")):
                latency.setdefault(rec.task, []).append(rec)
        elif header == fixtures.ENERGY_HEADER:
            for table in fixtures.parse_energy_csv(path.read_text(encoding="utf-8")):
                energy.setdefault(table.task, []).append(table)
        else:
            log.info("skipping %s: not a latency or energy table", path.name)
    bundle = report.ReportBundle(
        latency={t: tuple(v) for t, v in latency.items()},
        energy={t: tuple(v) for t, v in energy.items()},
    )
    written = report.render_tables(bundle, args.out, format=str(args.format))
    for path in written:
        print(path)
    return 0


def _cmd_replay(args) -> int:
    records = harness.replay_fixture(
        args.fixture,
        task=args.task,
        device=args.device,
        power_mode=args.power_mode,
    )
    sys.stdout.write(fixtures.serialize_latency_records(records))
    return 0


def _cmd_convert_log(args) -> int:
    def column(raw):
        if raw is None:
            return None
        text = str(raw)
        return int(text) if text.lstrip("-").isdigit() else text

    canonical = convert_tester_export(
        _read_text(args.in_dir, "tester export"),
        time_col=column(args.time_col),
        voltage_col=column(args.voltage_col),
        current_col=column(args.current_col),
        delimiter=str(args.delimiter),
        decimal_comma=bool(args.decimal_comma),
        period=float(args.period),
    )
    Path(args.out).write_text(canonical, encoding="utf-8")
    print(args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgebench",
        description="Benchmarking and energy analysis for edge ML accelerators.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add_config(p):
        p.add_argument("--config", help="JSON file supplying the same keys as the flags")

    bench = sub.add_parser("bench", help="benchmark campaigns").add_subparsers(
        dest="bench_command", metavar="SUBCOMMAND"
    )
    run = bench.add_parser("run", help="run a campaign against a runner process")
    run.add_argument("--plan", help="benchmark plan JSON file")
    run.add_argument("--runner", help="runner launch command (shell-quoted)")
    run.add_argument("--out", help="output directory")
    run.add_argument("--no-sleep", action="store_true", default=None,
                     help="skip guard-period sleeps (timing-only runs)")
    run.add_argument("--data", help="prediction input: 'synthetic' or a directory")
    add_config(run)
    run.set_defaults(func=_cmd_bench_run, command_key="bench run")

    trace_sub = sub.add_parser("trace", help="power-trace analysis").add_subparsers(
        dest="trace_command", metavar="SUBCOMMAND"
    )
    analyze = trace_sub.add_parser("analyze", help="segment a power log")
    analyze.add_argument("--log", help="canonical power log CSV")
    analyze.add_argument("--plan", help="benchmark plan JSON file")
    analyze.add_argument("--out", help="output directory")
    add_config(analyze)
    analyze.set_defaults(func=_cmd_trace_analyze, command_key="trace analyze")

    fit = sub.add_parser("fit", help="fit the hyperbolic latency model")
    fit.add_argument("--series", help="CSV of dataset_size,per_image_ms")
    fit.add_argument("--weighted", action="store_true", default=None,
                     help="weight squared residuals by 1/n")
    add_config(fit)
    fit.set_defaults(func=_cmd_fit, command_key="fit")

    speedup = sub.add_parser("speedup", help="minimum speed-up of two series")
    speedup.add_argument("--slow", help="slow-device series CSV")
    speedup.add_argument("--fast", help="fast-device series CSV")
    add_config(speedup)
    speedup.set_defaults(func=_cmd_speedup, command_key="speedup")

    quality_sub = sub.add_parser(
        "quality", help="prediction equivalence metrics"
    ).add_subparsers(dest="quality_command", metavar="SUBCOMMAND")
    dice_p = quality_sub.add_parser("dice", help="Dice stats over mask directories")
    dice_p.add_argument("--ref", help="reference mask directory")
    dice_p.add_argument("--cand", help="candidate mask directory")
    add_config(dice_p)
    dice_p.set_defaults(func=_cmd_quality_dice, command_key="quality dice")
    classify = quality_sub.add_parser(
        "classify", help="classification error stats over probability CSVs"
    )
    classify.add_argument("--ref", help="reference probability CSV")
    classify.add_argument("--cand", help="candidate probability CSV")
    add_config(classify)
    classify.set_defaults(func=_cmd_quality_classify, command_key="quality classify")

    rep = sub.add_parser("report", help="render tables from analysis CSVs")
    rep.add_argument("--in", dest="in_dir", help="directory of latency/energy CSVs")
    rep.add_argument("--out", help="output directory")
    rep.add_argument("--format", choices=["csv", "markdown"],
                     help="table format (default markdown)")
    add_config(rep)
    rep.set_defaults(func=_cmd_report, command_key="report")

    replay = sub.add_parser("replay", help="emit latency records from a fixture")
    replay.add_argument("--fixture", help="bundled alias (a1..b3) or CSV path")
    replay.add_argument("--task", choices=[t.value for t in TaskKind],
                        help="filter by task")
    replay.add_argument("--device", help="filter by device name")
    replay.add_argument("--power-mode", help="filter by power mode")
    add_config(replay)
    replay.set_defaults(func=_cmd_replay, command_key="replay")

    convert = sub.add_parser(
        "convert-log", help="convert a tester export to the canonical log format"
    )
    convert.add_argument("--in", dest="in_dir", help="tester export file")
    convert.add_argument("--out", help="canonical CSV to write")
    convert.add_argument("--time-col", help="time column name or index")
    convert.add_argument("--voltage-col", help="voltage column name or index")
    convert.add_argument("--current-col", help="current column name or index")
    convert.add_argument("--delimiter", help="export field delimiter")
    convert.add_argument("--decimal-comma", action="store_true", default=None,
                         help="export uses a decimal comma")
    convert.add_argument("--period", type=float,
                         help="sample period when no time column exists")
    add_config(convert)
    convert.set_defaults(func=_cmd_convert_log, command_key="convert-log")

    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not getattr(args, "func", None):
        parser.print_help(sys.stderr)
        return 2
    try:
        args = _merge_config(args, args.command_key)
        return args.func(args)
    except UsageError as exc:
        print(f"{exc.name}: {exc}", file=sys.stderr)
        return 2
    except EdgeBenchError as exc:
        print(f"{exc.name}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:  # malformed values in input files
        print(f"ValueError: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
