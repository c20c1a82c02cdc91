"""Minimal protobuf wire-format encoding and decoding.

Implements just enough of the wire format to build composite messages out of
opaque payloads (field embedding, as done by a collator node) and to let the
reference components read and write their own small messages without any
generated bindings.

Wire types used here: 0 (varint), 1 (64-bit), 2 (length-delimited),
5 (32-bit). Groups (3/4) are not supported.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterator

MAX_FIELD_NUMBER = 536870911  # 2**29 - 1

WIRETYPE_VARINT = 0
WIRETYPE_FIXED64 = 1
WIRETYPE_LEN = 2
WIRETYPE_FIXED32 = 5


class FieldNumberOutOfRange(ValueError):
    """Field number outside [1, 536870911]."""


class WireDecodeError(ValueError):
    """Malformed wire data."""


@dataclass(frozen=True)
class WireField:
    """A length-delimited field: an opaque payload embedded under a field number."""

    field_number: int
    payload: bytes

    def __post_init__(self) -> None:
        _check_field_number(self.field_number)


def _check_field_number(number: int) -> None:
    if not 1 <= number <= MAX_FIELD_NUMBER:
        raise FieldNumberOutOfRange(
            f"field number {number} outside [1, {MAX_FIELD_NUMBER}]"
        )


def encode_varint(value: int) -> bytes:
    if value < 0:
        value &= (1 << 64) - 1  # two's complement, 10-byte form
    out = bytearray()
    while True:
        bits = value & 0x7F
        value >>= 7
        if value:
            out.append(bits | 0x80)
        else:
            out.append(bits)
            return bytes(out)


def decode_varint(data: bytes, offset: int = 0) -> tuple[int, int]:
    """Return (value, new_offset); raises WireDecodeError on truncation."""
    result = 0
    shift = 0
    pos = offset
    while True:
        if pos >= len(data):
            raise WireDecodeError(f"truncated varint at offset {offset}")
        byte = data[pos]
        result |= (byte & 0x7F) << shift
        pos += 1
        if not byte & 0x80:
            return result, pos
        shift += 7
        if shift > 63:
            raise WireDecodeError(f"varint longer than 10 bytes at offset {offset}")


def encode_tag(field_number: int, wire_type: int) -> bytes:
    _check_field_number(field_number)
    return encode_varint((field_number << 3) | wire_type)


def encode_len_field(field_number: int, payload: bytes) -> bytes:
    """Length-delimited field: tag, varint length, payload bytes."""
    return (
        encode_tag(field_number, WIRETYPE_LEN)
        + encode_varint(len(payload))
        + bytes(payload)
    )


def encode_varint_field(field_number: int, value: int) -> bytes:
    return encode_tag(field_number, WIRETYPE_VARINT) + encode_varint(value)


def encode_fixed64_field(field_number: int, value: int) -> bytes:
    return encode_tag(field_number, WIRETYPE_FIXED64) + struct.pack("<Q", value)


def encode_embedded(field: WireField) -> bytes:
    """Encode one payload as a length-delimited field of a containing message."""
    return encode_len_field(field.field_number, field.payload)


def collate(parts: list[WireField] | tuple[WireField, ...]) -> bytes:
    """Concatenate embedded fields into one composite message.

    The result is a valid protobuf message in which each input payload appears
    as the sub-message (or bytes value) of its field number, in input order.
    """
    return b"".join(encode_embedded(part) for part in parts)


@dataclass(frozen=True)
class DecodedField:
    field_number: int
    wire_type: int
    value: int | bytes  # int for varint/fixed types, bytes for length-delimited


def iter_fields(data: bytes) -> Iterator[DecodedField]:
    """Yield top-level fields of a wire-encoded message in order."""
    pos = 0
    while pos < len(data):
        tag, pos = decode_varint(data, pos)
        field_number = tag >> 3
        wire_type = tag & 0x7
        if field_number == 0:
            raise WireDecodeError(f"field number 0 at offset {pos}")
        if wire_type == WIRETYPE_VARINT:
            value, pos = decode_varint(data, pos)
        elif wire_type == WIRETYPE_FIXED64:
            if pos + 8 > len(data):
                raise WireDecodeError(f"truncated fixed64 at offset {pos}")
            value = struct.unpack_from("<Q", data, pos)[0]
            pos += 8
        elif wire_type == WIRETYPE_LEN:
            length, pos = decode_varint(data, pos)
            if pos + length > len(data):
                raise WireDecodeError(f"truncated length-delimited field at offset {pos}")
            value = data[pos : pos + length]
            pos += length
        elif wire_type == WIRETYPE_FIXED32:
            if pos + 4 > len(data):
                raise WireDecodeError(f"truncated fixed32 at offset {pos}")
            value = struct.unpack_from("<I", data, pos)[0]
            pos += 4
        else:
            raise WireDecodeError(f"unsupported wire type {wire_type}")
        yield DecodedField(field_number, wire_type, value)


def decode_message(data: bytes) -> dict[int, list[int | bytes]]:
    """Group decoded field values by field number, preserving per-field order."""
    fields: dict[int, list[int | bytes]] = {}
    for field in iter_fields(data):
        fields.setdefault(field.field_number, []).append(field.value)
    return fields
