#!/usr/bin/env python3
"""A full live campaign against the stub runner (no hardware needed).

The harness launches a runner subprocess and drives it over newline-
delimited JSON: per dataset size, a guard idle, a load, a shorter gap, one
warm-up prediction, then the protocol's prediction sequence. The stub
runner (separate package under runner/) answers with a configurable
synthetic latency; swapping in a real device means reimplementing one
function on the runner side, nothing here changes.

Requires the stub: pip install -e runner/ --no-build-isolation
"""

import shutil
import sys

from edgebench import (
    BenchPlan,
    ExperimentTimeline,
    Protocol,
    RunnerSpec,
    TaskKind,
    latency_records,
    run_benchmark,
)

stub = shutil.which("runner-stub")
if stub is None:
    sys.exit("runner-stub is not installed; run: pip install -e runner/")

plan = BenchPlan(
    task=TaskKind.OD_SEGMENTATION,
    dataset_sizes=(10, 50, 100),
    protocol=Protocol.ELEMENT_WISE,
    timeline=ExperimentTimeline(
        dataset_count=3, pre_load_idle=0.2, load_to_predict_gap=0.1
    ),
)
spec = RunnerSpec(
    launch_command=(
        stub, "--base-ms", "8.8", "--warmup-extra-ms", "21.2",
        "--jitter-ms", "0.6", "--seed", "7",
    ),
    model_artifact="demo.model",
    input_shape=(128, 128, 3),
)

print("running 3-size element-wise campaign against the stub...")
result = run_benchmark(plan, spec)
for run, record in zip(result.runs, latency_records(result)):
    roundtrip = sum(run.roundtrip_ms) / len(run.roundtrip_ms)
    print(
        f"  n={record.dataset_size:>3}: {record.per_image_ms:5.2f} ± "
        f"{record.std_ms:4.2f} ms   (load {run.load_ms:.0f} ms, "
        f"mean round-trip {roundtrip:.2f} ms, diagnostic only)"
    )
print("runner metadata:", result.runner_metadata["timing_source"])
