"""Bounded per-port message queues with per-link accounting.

One queue serves one input port.  When several links merge into the same
port, their messages share the queue FIFO-by-arrival but are tagged and
counted per link, so drain accounting stays exact for every link
individually.  A ``latest``-mode link keeps at most one of its messages
queued: a new arrival replaces the old one, which counts as dropped.

The accounting identity — produced = consumed + dropped — holds for every
link at all times once ``drain_remaining`` has run; enqueues aborted by
``close`` were never produced.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass
from typing import Protocol, Sequence

from ..blueprint import Link


class QueueClosed(Exception):
    """Enqueue attempted on a closed queue."""


class QueueObserver(Protocol):
    """Callbacks fired inside the queue's critical section.

    Keeping them under the lock guarantees that for any payload the enqueue
    notification is ordered before its dequeue notification, which the event
    log relies on.  Implementations must not call back into the queue.
    """

    def on_enqueue(self, link: Link, payload: bytes) -> None: ...

    def on_dequeue(self, link: Link, payload: bytes) -> None: ...


@dataclass
class LinkStats:
    produced: int = 0
    consumed: int = 0
    dropped: int = 0

    @property
    def balanced(self) -> bool:
        return self.produced == self.consumed + self.dropped


class LinkQueue:
    """Multi-producer / single-consumer queue for one input port.

    Capacity is the largest capacity among the member links; a full queue
    blocks fifo producers (backpressure) until space frees or the queue
    closes.  ``get`` returns None once closed — queued leftovers are then
    dropped via ``drain_remaining``, never delivered.
    """

    def __init__(
        self,
        port: tuple[str, str],
        links: Sequence[Link],
        observer: QueueObserver | None = None,
    ) -> None:
        if not links:
            raise ValueError("a LinkQueue needs at least one member link")
        self.port = port
        self.capacity = max(link.capacity for link in links)
        self._links = {link.id: link for link in links}
        self._observer = observer
        self._entries: deque[tuple[Link, bytes]] = deque()
        self._stats = {link.id: LinkStats() for link in links}
        self._cond = threading.Condition()
        self._closed = False

    def put(self, link: Link, payload: bytes) -> None:
        """Enqueue; blocks under backpressure; raises QueueClosed if closed.

        latest-mode links never block: they replace their own queued entry
        (counted as dropped) instead of growing the queue.
        """
        if link.id not in self._links:
            raise KeyError(f"link {link.id!r} is not routed to port {self.port}")
        with self._cond:
            stats = self._stats[link.id]
            if link.mode == "latest":
                if self._closed:
                    raise QueueClosed(self.port)
                kept = deque()
                for entry in self._entries:
                    if entry[0].id == link.id:
                        stats.dropped += 1
                    else:
                        kept.append(entry)
                self._entries = kept
            else:
                while len(self._entries) >= self.capacity and not self._closed:
                    self._cond.wait()
                if self._closed:
                    raise QueueClosed(self.port)
            self._entries.append((link, payload))
            stats.produced += 1
            if self._observer is not None:
                self._observer.on_enqueue(link, payload)
            self._cond.notify_all()

    def get(self) -> tuple[Link, bytes] | None:
        """Dequeue the oldest entry; None once the queue is closed."""
        with self._cond:
            while not self._entries and not self._closed:
                self._cond.wait()
            if self._closed:
                return None
            link, payload = self._entries.popleft()
            self._stats[link.id].consumed += 1
            if self._observer is not None:
                self._observer.on_dequeue(link, payload)
            self._cond.notify_all()
            return link, payload

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    @property
    def closed(self) -> bool:
        with self._cond:
            return self._closed

    def drain_remaining(self) -> int:
        """Count queued leftovers as dropped and discard them (post-stop)."""
        with self._cond:
            leftover = len(self._entries)
            for link, _ in self._entries:
                self._stats[link.id].dropped += 1
            self._entries.clear()
            return leftover

    def stats(self) -> dict[str, LinkStats]:
        with self._cond:
            return {
                link_id: LinkStats(s.produced, s.consumed, s.dropped)
                for link_id, s in self._stats.items()
            }

    def __len__(self) -> int:
        with self._cond:
            return len(self._entries)
