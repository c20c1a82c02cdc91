"""Threaded execution of an orchestration plan.

No execution order is computed: every orchestrated RPC gets its own worker
thread, and bounded per-port queues carry messages between them.  That is
what makes arbitrary topologies — including cycles — run without analysis:
a worker only ever blocks on its own queue or its own component call.

Worker shapes (by role and signature):

* source, unary out        — invoke with Empty every ``source_interval``.
* source, streaming out    — hold one call open, relay messages as they
                             arrive, re-open per ``stream_restart``.
* interior, unary out      — dequeue one, invoke, dispatch the reply.
* interior, streaming out  — dequeue one, relay the whole reply stream.
* interior, streaming in   — hold one call open and feed dequeued messages
                             into it (dispatching replies if bidirectional).

Dispatch copies a payload into every downstream queue in blueprint link
order.  Stop is two-phase: sources cease and open streams close immediately,
in-flight calls get ``drain_timeout`` to finish, then stragglers are
cancelled and reported.  Queued leftovers are dropped, never delivered, and
the per-link counters reconcile exactly: produced = consumed + dropped.
"""

from __future__ import annotations

import base64
import threading
import time
from dataclasses import dataclass, field
from typing import Mapping

from ..blueprint import Link, OrchestrationPlan, PlannedRpc, RpcRole
from .config import RuntimeConfig
from .events import EventLog, payload_hash
from .queues import LinkQueue, LinkStats, QueueClosed
from .relay import (
    EMPTY_PAYLOAD,
    CallCancelled,
    EndpointMap,
    MissingEndpoint,
    RelayError,
    RpcCaller,
    iterate_stream,
    open_channel,
)

STATE_STOPPED = "stopped"
STATE_RUNNING = "running"


@dataclass(frozen=True)
class DrainSummary:
    """Per-link accounting at the end of a run."""

    run_id: int
    links: Mapping[str, LinkStats]
    drain_timeouts: tuple[str, ...] = ()

    @property
    def balanced(self) -> bool:
        return all(stats.balanced for stats in self.links.values())

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "links": {
                link_id: {
                    "produced": s.produced,
                    "consumed": s.consumed,
                    "dropped": s.dropped,
                }
                for link_id, s in sorted(self.links.items())
            },
            "drain_timeouts": list(self.drain_timeouts),
        }


class _QueueObserver:
    """Emits msg-dispatched / msg-consumed inside the queue critical section,
    so per link the dispatch event always precedes its consume event."""

    def __init__(self, log: EventLog, capture: bool) -> None:
        self._log = log
        self._capture = capture

    def _detail(self, payload: bytes) -> str:
        if not self._capture:
            return ""
        return base64.b64encode(payload).decode("ascii")

    def on_enqueue(self, link: Link, payload: bytes) -> None:
        self._log.emit(
            "msg-dispatched",
            node=link.source.node,
            rpc=link.source.rpc or "",
            link=link.id,
            size=len(payload),
            hash=payload_hash(payload),
            detail=self._detail(payload),
        )

    def on_dequeue(self, link: Link, payload: bytes) -> None:
        self._log.emit(
            "msg-consumed",
            node=link.target.node,
            rpc=link.target.rpc or "",
            link=link.id,
            size=len(payload),
            hash=payload_hash(payload),
            detail=self._detail(payload),
        )


class _Worker:
    """One thread driving one orchestrated RPC."""

    def __init__(self, run: "_Run", planned: PlannedRpc, caller: RpcCaller,
                 in_queue: LinkQueue | None, out_links: tuple[Link, ...]) -> None:
        self.run = run
        self.planned = planned
        self.caller = caller
        self.in_queue = in_queue
        self.out_links = out_links
        self.name = f"{planned.node}.{planned.rpc.name}"
        self.thread = threading.Thread(
            target=self._main, name=f"flowmesh-{self.name}", daemon=True
        )
        self._call_lock = threading.Lock()
        self._active_call = None

    # -- plumbing ----------------------------------------------------------

    @property
    def cfg(self) -> RuntimeConfig:
        return self.run.config

    def _emit(self, kind: str, **fields) -> None:
        self.run.log.emit(kind, node=self.planned.node, rpc=self.planned.rpc.name, **fields)

    def _stopping(self) -> bool:
        return self.run.soft_stop.is_set()

    def _sleep(self, seconds: float) -> None:
        if seconds > 0:
            self.run.soft_stop.wait(seconds)

    def _set_active(self, call) -> None:
        with self._call_lock:
            self._active_call = call

    def cancel_active(self) -> None:
        with self._call_lock:
            call = self._active_call
        if call is not None:
            try:
                call.cancel()
            except Exception:
                pass

    def _dispatch(self, payload: bytes) -> bool:
        """Copy to every downstream queue in routing order; False once stopped."""
        for link in self.out_links:
            try:
                self.run.queue_for(link).put(link, payload)
            except QueueClosed:
                return False
        return True

    # -- error policy ------------------------------------------------------

    def _invoke_with_policy(self, attempt):
        """Run one invocation attempt with retry/backoff or halt on RelayError.

        Returns the attempt's value, or None when cancelled, halted, or out
        of retries (the failure already emitted as rpc-error events).
        """
        tries = 0
        delay = self.cfg.backoff_initial
        while True:
            try:
                return attempt()
            except CallCancelled:
                return None
            except RelayError as exc:
                self._emit("rpc-error", detail=f"{type(exc).__name__}: {exc}")
                if self.cfg.on_rpc_error == "halt-solution":
                    self.run.request_halt(f"{self.name}: {exc}")
                    return None
                tries += 1
                if tries > self.cfg.retry_max:
                    self._emit(
                        "rpc-error",
                        detail=f"giving up after {tries} attempts",
                    )
                    return None
                if self._stopping():
                    return None
                self._sleep(delay)
                delay *= 2

    # -- worker bodies -----------------------------------------------------

    def _main(self) -> None:
        try:
            role = self.planned.role
            sig = self.planned.rpc
            if role is RpcRole.SOURCE:
                if sig.output_streaming:
                    self._run_source_stream()
                else:
                    self._run_source_unary()
            elif sig.input_streaming:
                self._run_interior_stream_in()
            elif sig.output_streaming:
                self._run_interior_stream_out()
            else:
                self._run_interior_unary()
        except Exception as exc:  # defensive: a worker must never die silently
            self._emit("rpc-error", detail=f"worker crashed: {type(exc).__name__}: {exc}")

    def _unary_attempt(self, payload: bytes):
        def attempt():
            self._emit("call-start")
            if self.planned.rpc.input_streaming:
                reply = self.caller.call_client_stream(
                    iter([payload]),
                    deadline=self.cfg.unary_deadline,
                    cancel_event=self.run.force_cancel,
                )
            else:
                reply = self.caller.call_unary(
                    payload,
                    deadline=self.cfg.unary_deadline,
                    cancel_event=self.run.force_cancel,
                )
            self._emit("call-end", size=len(reply))
            return reply

        return self._invoke_with_policy(attempt)

    def _run_source_unary(self) -> None:
        while not self._stopping():
            reply = self._unary_attempt(EMPTY_PAYLOAD)
            if reply is not None and not self._dispatch(reply):
                return
            self._sleep(self.cfg.source_interval)

    def _open_output_stream(self, payload: bytes):
        if self.planned.rpc.input_streaming:
            return self.caller.open_bidi_stream(iter([payload]))
        return self.caller.open_server_stream(payload)

    def _relay_stream(self, call) -> tuple[int, bool]:
        """Dispatch every message from a live response stream.

        Returns (messages relayed, closed normally).  Emits the stream
        lifecycle events; translation of gRPC errors happens here so the
        caller can apply the restart/backoff policy.
        """
        self._set_active(call)
        self._emit("stream-opened")
        relayed = 0
        try:
            for payload in iterate_stream(call):
                if not self._dispatch(payload):
                    try:
                        call.cancel()
                    except Exception:
                        pass
                    self._emit("stream-closed", detail="stopped")
                    return relayed, False
                relayed += 1
        except CallCancelled:
            self._emit("stream-closed", detail="cancelled")
            return relayed, False
        except RelayError as exc:
            self._emit("rpc-error", detail=f"{type(exc).__name__}: {exc}")
            self._emit("stream-closed", detail="error")
            if self.cfg.on_rpc_error == "halt-solution":
                self.run.request_halt(f"{self.name}: {exc}")
            return relayed, False
        finally:
            self._set_active(None)
        self._emit("stream-closed")
        self._emit("call-end")
        return relayed, True

    def _run_source_stream(self) -> None:
        opens = 0
        consecutive_failures = 0
        while not self._stopping():
            allowed = {"always": None, "once": 2, "never": 1}[self.cfg.stream_restart]
            if allowed is not None and opens >= allowed:
                return
            self._emit("call-start")
            call = self._open_output_stream(EMPTY_PAYLOAD)
            opens += 1
            relayed, ok = self._relay_stream(call)
            if self._stopping() or self.run.halted.is_set():
                return
            if relayed == 0:
                # unproductive open (refused or instantly closed): back off so a
                # closing peer does not become a hot loop
                consecutive_failures += 1
                self._sleep(
                    min(self.cfg.backoff_initial * (2 ** min(consecutive_failures, 5)), 5.0)
                    if not ok
                    else max(self.cfg.source_interval, self.cfg.backoff_initial)
                )
            else:
                consecutive_failures = 0
                if ok:
                    self._sleep(self.cfg.source_interval)

    def _run_interior_unary(self) -> None:
        while True:
            item = self.in_queue.get()
            if item is None:
                return
            _, payload = item
            reply = self._unary_attempt(payload)
            if reply is not None and not self._dispatch(reply):
                return

    def _run_interior_stream_out(self) -> None:
        while True:
            item = self.in_queue.get()
            if item is None:
                return
            _, payload = item
            self._emit("call-start")
            self._relay_stream(self._open_output_stream(payload))

    def _feed_from_queue(self):
        while True:
            item = self.in_queue.get()
            if item is None:
                return
            yield item[1]

    def _run_interior_stream_in(self) -> None:
        opens = 0
        while not self._stopping():
            allowed = {"always": None, "once": 2, "never": 1}[self.cfg.stream_restart]
            if allowed is not None and opens >= allowed:
                return
            opens += 1
            if self.planned.rpc.output_streaming:
                self._emit("call-start")
                call = self.caller.open_bidi_stream(self._feed_from_queue())
                self._relay_stream(call)
            else:
                def attempt():
                    self._emit("call-start")
                    self._emit("stream-opened")
                    reply = self.caller.call_client_stream(
                        self._feed_from_queue(), cancel_event=self.run.force_cancel
                    )
                    self._emit("stream-closed")
                    self._emit("call-end", size=len(reply))
                    return reply

                reply = self._invoke_with_policy(attempt)
                if reply is not None:
                    self._dispatch(reply)
            if self.in_queue.closed:
                return


class _Run:
    """Mutable state of one start→stop cycle."""

    def __init__(self, runtime: "Runtime", run_id: int) -> None:
        self.runtime = runtime
        self.run_id = run_id
        self.config = runtime.config
        self.log = runtime.event_log
        self.soft_stop = threading.Event()
        self.force_cancel = threading.Event()
        self.halted = threading.Event()
        self.halt_reason = ""

        plan = runtime.plan
        observer = _QueueObserver(self.log, self.config.capture_payloads)
        self.queues: dict[tuple[str, str], LinkQueue] = {
            port: LinkQueue(port, links, observer) for port, links in plan.merges.items()
        }
        self.channels = {
            node.id: open_channel(runtime.endpoints.address(node.id))
            for node in plan.blueprint.container_nodes()
        }
        self.workers: list[_Worker] = []
        for planned in plan.orchestrated():
            out_links = plan.routing.get(planned.port, ())
            if planned.role is RpcRole.SOURCE and not out_links:
                # a source feeding no link would be pure polling noise
                continue
            caller = RpcCaller(
                self.channels[planned.node],
                planned.method,
                input_streaming=planned.rpc.input_streaming,
                output_streaming=planned.rpc.output_streaming,
            )
            in_queue = self.queues.get(planned.port)
            self.workers.append(_Worker(self, planned, caller, in_queue, out_links))

    def queue_for(self, link: Link) -> LinkQueue:
        return self.queues[(link.target.node, link.target.rpc)]

    def request_halt(self, reason: str) -> None:
        if not self.halted.is_set():
            self.halt_reason = reason
            self.halted.set()
        self.soft_stop.set()

    def start(self) -> None:
        for worker in self.workers:
            worker.thread.start()

    def stop(self) -> DrainSummary:
        self.soft_stop.set()
        for queue in self.queues.values():
            queue.close()
        for worker in self.workers:
            worker.cancel_active()

        deadline = time.monotonic() + self.config.drain_timeout
        late: list[_Worker] = []
        for worker in self.workers:
            remaining = deadline - time.monotonic()
            worker.thread.join(max(remaining, 0))
            if worker.thread.is_alive():
                late.append(worker)
        if late:
            self.force_cancel.set()
            for worker in late:
                worker.cancel_active()
            for worker in late:
                worker.thread.join(1.0)

        for queue in self.queues.values():
            queue.drain_remaining()
        stats: dict[str, LinkStats] = {}
        for queue in self.queues.values():
            stats.update(queue.stats())
        for channel in self.channels.values():
            channel.close()
        return DrainSummary(
            run_id=self.run_id,
            links=stats,
            drain_timeouts=tuple(w.name for w in late),
        )


class Runtime:
    """A startable/stoppable solution execution; reusable across runs."""

    def __init__(
        self,
        plan: OrchestrationPlan,
        endpoints: EndpointMap,
        config: RuntimeConfig | None = None,
        event_log: EventLog | None = None,
    ) -> None:
        self.plan = plan
        self.endpoints = endpoints
        self.config = config or RuntimeConfig()
        self.event_log = event_log or EventLog(self.config.event_buffer)
        self._lock = threading.Lock()
        self._run: _Run | None = None
        self._run_counter = 0
        self.last_summary: DrainSummary | None = None

        missing = endpoints.missing_for(n.id for n in plan.blueprint.container_nodes())
        if missing:
            raise MissingEndpoint(missing[0])

    @property
    def state(self) -> str:
        return STATE_RUNNING if self._run is not None else STATE_STOPPED

    @property
    def run_id(self) -> int:
        return self._run_counter

    @property
    def halted(self) -> threading.Event:
        run = self._run
        return run.halted if run is not None else threading.Event()

    @property
    def halt_reason(self) -> str:
        run = self._run
        return run.halt_reason if run is not None else ""

    def start(self) -> int:
        """Begin a fresh run; returns its run id."""
        with self._lock:
            if self._run is not None:
                raise RuntimeError("runtime already running")
            self._run_counter += 1
            self.event_log.begin_run(self._run_counter)
            run = _Run(self, self._run_counter)
            self._run = run
        self.event_log.emit("run-started", detail=f"run {run.run_id}")
        run.start()
        return run.run_id

    def stop(self) -> DrainSummary:
        """Stop and drain; idempotent (repeat calls return the last summary)."""
        with self._lock:
            run = self._run
            self._run = None
        if run is None:
            if self.last_summary is not None:
                return self.last_summary
            return DrainSummary(run_id=self._run_counter, links={})
        summary = run.stop()
        self.event_log.emit(
            "run-stopped",
            detail=f"run {run.run_id}"
            + (f" halted: {run.halt_reason}" if run.halted.is_set() else ""),
        )
        self.last_summary = summary
        return summary


def build_runtime(
    plan: OrchestrationPlan,
    endpoints: EndpointMap | Mapping[str, str],
    config: RuntimeConfig | None = None,
    event_log: EventLog | None = None,
) -> Runtime:
    """Wire a validated plan to live endpoints; the result is not yet started."""
    if not isinstance(endpoints, EndpointMap):
        endpoints = EndpointMap(dict(endpoints))
    return Runtime(plan, endpoints, config=config, event_log=event_log)
