"""Device-side runner speaking newline-delimited JSON on stdin/stdout.

Messages in:  {"cmd": "load", "model": ..., "input_shape": [H, W, C]}
              {"cmd": "predict", "n": <element count>, "data": ...}
              {"cmd": "quit"}
Replies out:  {"ok": true, "load_ms": <float>}
              {"ok": true, "wall_ms": <float>}
              {"ok": false, "error": "<text>"}

The bundled backend is a stub latency model: a prediction of n elements
takes n * base_ms, the first prediction after each load pays an extra
warm-up cost (model transfer to the accelerator), and an optional seeded
uniform jitter makes runs noisy but reproducible. ``fail_at_n`` simulates
the device running out of memory: once the predictions since the last load
have traversed ``fail_at_n`` or more elements (the warm-up prediction does
not count), every further predict replies ``memory error`` until the next
load. Note that whole-dataset campaigns re-traverse the dataset once per
repetition, so their element count accumulates across repetitions.

Porting to real hardware: replace ``predict_batch`` with a function that
runs your framework's predict call for ``n`` elements and returns the wall
time in milliseconds measured immediately around that call - the protocol
loop and the warm-up/abort choreography stay as they are. Log to stderr
only; stdout belongs to the protocol.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass
from typing import Callable, TextIO


@dataclass(frozen=True)
class StubLatencyModel:
    """Synthetic per-element latency: base plus warm-up extra plus jitter."""

    base_ms: float
    warmup_extra_ms: float = 0.0
    jitter_ms: float = 0.0
    fail_at_n: int | None = None

    def __post_init__(self):
        if self.base_ms <= 0:
            raise ValueError("base_ms must be positive")
        if self.warmup_extra_ms < 0 or self.jitter_ms < 0:
            raise ValueError("warmup_extra_ms and jitter_ms must be >= 0")


def serve(
    stdin: TextIO,
    stdout: TextIO,
    model: StubLatencyModel,
    *,
    seed: int = 7,
    load_ms: float = 100.0,
    predict_batch: Callable[[int, str], float] | None = None,
) -> int:
    """Answer protocol messages until quit or EOF; returns the exit code.

    ``predict_batch(n, data) -> wall_ms`` is the real-framework hook; when
    None, the stub model supplies the wall times.
    """
    rng = random.Random(seed)
    first_predict_after_load = True
    elements_since_load = 0
    failed = False

    def reply(obj: dict) -> None:
        stdout.write(json.dumps(obj) + "\n")
        stdout.flush()

    def stub_wall_ms(n: int) -> float:
        wall = n * model.base_ms
        if first_predict_after_load:
            wall += model.warmup_extra_ms
        if model.jitter_ms > 0:
            wall += rng.uniform(0.0, model.jitter_ms)
        return wall

    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            message = json.loads(line)
            cmd = message["cmd"]
        except (json.JSONDecodeError, TypeError, KeyError):
            print(f"runner-stub: unparseable line: {line!r}", file=sys.stderr)
            reply({"ok": False, "error": "protocol"})
            continue

        if cmd == "quit":
            return 0
        if cmd == "load":
            first_predict_after_load = True
            elements_since_load = 0
            failed = False
            reply({"ok": True, "load_ms": load_ms})
        elif cmd == "predict":
            try:
                n = int(message["n"])
            except (KeyError, TypeError, ValueError):
                reply({"ok": False, "error": "protocol"})
                continue
            if not first_predict_after_load:
                elements_since_load += n
            if failed or (
                model.fail_at_n is not None
                and elements_since_load >= model.fail_at_n
            ):
                failed = True
                reply({"ok": False, "error": "memory error"})
                continue
            if predict_batch is not None:
                wall = predict_batch(n, str(message.get("data", "synthetic")))
            else:
                wall = stub_wall_ms(n)
            first_predict_after_load = False
            reply({"ok": True, "wall_ms": wall})
        else:
            reply({"ok": False, "error": "protocol"})
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="runner-stub",
        description="Stub inference runner for the edgebench wire protocol.",
    )
    parser.add_argument("--base-ms", type=float, required=True,
                        help="per-element latency in milliseconds")
    parser.add_argument("--warmup-extra-ms", type=float, default=0.0,
                        help="extra cost of the first prediction after a load")
    parser.add_argument("--jitter-ms", type=float, default=0.0,
                        help="uniform jitter added to every prediction")
    parser.add_argument("--seed", type=int, default=7, help="jitter RNG seed")
    parser.add_argument("--fail-at-n", type=int, default=None,
                        help="simulate a memory error at this dataset size")
    parser.add_argument("--load-ms", type=float, default=100.0,
                        help="reported dataset/model load time")
    args = parser.parse_args(argv)
    model = StubLatencyModel(
        base_ms=args.base_ms,
        warmup_extra_ms=args.warmup_extra_ms,
        jitter_ms=args.jitter_ms,
        fail_at_n=args.fail_at_n,
    )
    return serve(sys.stdin, sys.stdout, model, seed=args.seed, load_ms=args.load_ms)


if __name__ == "__main__":
    sys.exit(main())
