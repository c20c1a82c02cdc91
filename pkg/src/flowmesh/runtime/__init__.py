"""Execution runtime: queues, workers, event log, and the byte relay."""

from .config import RuntimeConfig
from .engine import DrainSummary, Runtime, build_runtime
from .events import EVENT_KINDS, EventLog, EventSubscription, OrchestrationEvent, payload_hash
from .queues import LinkQueue, LinkStats, QueueClosed
from .relay import (
    CallCancelled,
    CallFailed,
    DeadlineExceeded,
    EndpointMap,
    MissingEndpoint,
    RelayError,
    RpcCaller,
    Unreachable,
    open_channel,
    relay_call,
)

__all__ = [
    "CallCancelled",
    "CallFailed",
    "DeadlineExceeded",
    "DrainSummary",
    "EndpointMap",
    "EVENT_KINDS",
    "EventLog",
    "EventSubscription",
    "LinkQueue",
    "LinkStats",
    "MissingEndpoint",
    "OrchestrationEvent",
    "payload_hash",
    "QueueClosed",
    "RelayError",
    "RpcCaller",
    "Runtime",
    "RuntimeConfig",
    "Unreachable",
    "build_runtime",
    "open_channel",
    "relay_call",
]
