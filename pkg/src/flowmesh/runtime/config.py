"""Tunables for a solution run."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

STREAM_RESTART_MODES = ("always", "once", "never")
ERROR_POLICIES = ("retry-with-backoff", "halt-solution")


@dataclass(frozen=True)
class RuntimeConfig:
    """Runtime behavior knobs.

    ``source_interval`` paces proactive source invocations (0 = tight loop).
    ``stream_restart`` governs re-opening long-lived output streams after the
    peer closes them.  ``on_rpc_error`` picks between bounded retry
    (``retry_max`` attempts, exponential backoff from ``backoff_initial``)
    and halting the whole solution on first error.
    """

    source_interval: float = 0.1
    stream_restart: str = "always"
    on_rpc_error: str = "retry-with-backoff"
    retry_max: int = 5
    backoff_initial: float = 0.2
    drain_timeout: float = 5.0
    unary_deadline: float = 30.0
    event_buffer: int = 100_000
    capture_payloads: bool = False

    def __post_init__(self) -> None:
        if self.source_interval < 0:
            raise ValueError("source_interval must be >= 0")
        for name in ("backoff_initial", "drain_timeout", "unary_deadline"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.stream_restart not in STREAM_RESTART_MODES:
            raise ValueError(
                f"stream_restart must be one of {STREAM_RESTART_MODES}, got {self.stream_restart!r}"
            )
        if self.on_rpc_error not in ERROR_POLICIES:
            raise ValueError(
                f"on_rpc_error must be one of {ERROR_POLICIES}, got {self.on_rpc_error!r}"
            )
        if self.retry_max < 0:
            raise ValueError("retry_max must be >= 0")
        if self.event_buffer < 1:
            raise ValueError("event_buffer must be >= 1")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RuntimeConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown runtime config key(s): {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | Path) -> "RuntimeConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def replace(self, **overrides: Any) -> "RuntimeConfig":
        return dataclasses.replace(self, **overrides)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)
