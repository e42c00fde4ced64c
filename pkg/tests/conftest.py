"""Shared test helpers: synthetic trace construction and the mock runner."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

from edgebench.trace import PowerSample, PowerTrace

TESTS_DIR = Path(__file__).parent
MOCK_RUNNER = TESTS_DIR / "mock_runner.py"


def step_trace(segments: list[tuple[int, float]], volts: float = 5.0,
               period: float = 1.0) -> PowerTrace:
    """A 1 Hz staircase trace: ``segments`` are (seconds, watts) plateaus."""
    samples = []
    t = 0.0
    for seconds, watts in segments:
        for _ in range(seconds):
            samples.append(PowerSample(t=t, voltage=volts, current=watts / volts))
            t += period
    return PowerTrace(samples=tuple(samples), nominal_period=period)


@pytest.fixture
def build_step_trace():
    return step_trace


def mock_runner_cmd(*extra: str) -> tuple[str, ...]:
    """Launch command for the scripted mock runner."""
    return (sys.executable, str(MOCK_RUNNER), *extra)


@pytest.fixture
def mock_runner():
    return mock_runner_cmd
