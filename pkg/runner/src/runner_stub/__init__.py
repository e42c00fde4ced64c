"""Reference device-side runner for the edgebench wire protocol."""

from .stub import StubLatencyModel, serve

__all__ = ["StubLatencyModel", "serve"]
