"""Image pipeline: camera, detector stub, collator, visualizer.

The collator is the piece the wire helpers exist for: it receives two
already-serialized messages it cannot parse and embeds them, unread, as
fields 1 and 2 of an ImageWithObjects — composition without a schema.
"""

from __future__ import annotations

import hashlib
import threading
from collections import deque

import grpc

from ..wire import WireField, collate
from . import codecs
from .serving import unary_unary


def synthetic_frame(index: int, size: int = 64) -> bytes:
    """Deterministic stand-in image bytes."""
    seed = f"frame-{index}".encode()
    out = bytearray(seed)
    while len(out) < size:
        out.extend(hashlib.blake2b(bytes(out), digest_size=16).digest())
    return bytes(out[:size])


class CameraComponent:
    """Get(Empty) -> Image; frames come from a script or are synthesized."""

    def __init__(self, frames=None, frame_size: int = 64) -> None:
        self._lock = threading.Lock()
        self._frames = list(frames) if frames is not None else None
        self._size = frame_size
        self._index = 0

    def _get(self, request: bytes, context) -> bytes:
        with self._lock:
            index = self._index
            self._index += 1
        if self._frames is not None:
            data = self._frames[index % len(self._frames)]
        else:
            data = synthetic_frame(index, self._size)
        return codecs.encode_image(data)

    def grpc_services(self):
        return {"Camera": {"Get": unary_unary(self._get)}}


def stub_detections(data: bytes) -> tuple[codecs.DetectedObject, ...]:
    """Deterministic fake detections derived from the image bytes."""
    digest = hashlib.blake2b(data, digest_size=8).digest()
    count = 1 + digest[0] % 3
    objects = []
    for i in range(count):
        x = float(digest[(i + 1) % 8])
        y = float(digest[(i + 2) % 8])
        objects.append(
            codecs.DetectedObject(
                class_name=f"class-{digest[i % 8] % 5}",
                class_idx=digest[i % 8] % 5,
                p1=codecs.Point(x=x, y=y),
                p2=codecs.Point(x=x + 10.0, y=y + 10.0),
                conf=(digest[(i + 3) % 8] % 100) / 100.0,
            )
        )
    return tuple(objects)


class DetectorStub:
    """detect(Image) -> DetectedObjects, derived deterministically, no model."""

    def _detect(self, request: bytes, context) -> bytes:
        data = codecs.decode_image(request)
        return codecs.encode_detected_objects(stub_detections(data))

    def grpc_services(self):
        return {"Detector": {"detect": unary_unary(self._detect)}}


class CollatorComponent:
    """Pairs an Image with a DetectedObjects message, treating both as opaque.

    pushImage / pushObjects queue raw payloads; nextPair blocks until one of
    each is available and emits their embedding as fields 1 and 2.
    """

    def __init__(self) -> None:
        self._cond = threading.Condition()
        self._images: deque[bytes] = deque()
        self._objects: deque[bytes] = deque()

    def _push_image(self, request: bytes, context) -> bytes:
        with self._cond:
            self._images.append(bytes(request))
            self._cond.notify_all()
        return codecs.EMPTY

    def _push_objects(self, request: bytes, context) -> bytes:
        with self._cond:
            self._objects.append(bytes(request))
            self._cond.notify_all()
        return codecs.EMPTY

    def _next_pair(self, request: bytes, context) -> bytes:
        cancelled = threading.Event()

        def on_cancel() -> None:
            cancelled.set()
            with self._cond:
                self._cond.notify_all()

        context.add_callback(on_cancel)
        with self._cond:
            self._cond.wait_for(
                lambda: (self._images and self._objects) or cancelled.is_set()
            )
            if not (self._images and self._objects):
                context.abort(grpc.StatusCode.CANCELLED, "no pair ready")
            image = self._images.popleft()
            objects = self._objects.popleft()
        return collate([WireField(1, image), WireField(2, objects)])

    def grpc_services(self):
        return {
            "ImageCollator": {
                "pushImage": unary_unary(self._push_image),
                "pushObjects": unary_unary(self._push_objects),
                "nextPair": unary_unary(self._next_pair),
            }
        }


class VisualizerStub:
    """Visualize(ImageWithObjects) -> Empty; records what it was shown."""

    def __init__(self, keep_payloads: bool = False) -> None:
        self._cond = threading.Condition()
        self._seen: list[tuple[bytes, int]] = []  # (image data, object count)
        self._payloads: list[bytes] = []
        self._keep = keep_payloads

    def _visualize(self, request: bytes, context) -> bytes:
        merged = codecs.decode_image_with_objects(request)
        with self._cond:
            self._seen.append((merged.image, len(merged.objects)))
            if self._keep:
                self._payloads.append(bytes(request))
            self._cond.notify_all()
        return codecs.EMPTY

    def grpc_services(self):
        return {"Visualizer": {"Visualize": unary_unary(self._visualize)}}

    def seen(self) -> list[tuple[bytes, int]]:
        with self._cond:
            return list(self._seen)

    def payloads(self) -> list[bytes]:
        with self._cond:
            return list(self._payloads)

    def wait_count(self, count: int, timeout: float = 10.0) -> bool:
        with self._cond:
            return self._cond.wait_for(lambda: len(self._seen) >= count, timeout)
