"""Type resolution and compatibility between independently authored interfaces.

Two message types are structurally equal when their field shapes are
identical: same field numbers, kinds, and repeated flags, recursing through
referenced message and enum types. Neither field names nor type names
participate; wire-level shape does. Strict compatibility
(``require_same_name=True``) additionally demands fully qualified name
equality at the compared roots; dropping it backs the lenient validation
mode, where independently named but wire-identical types interoperate.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .model import EnumType, FieldKind, InterfaceDef, MessageType


class UnresolvedType(LookupError):
    def __init__(self, type_name: str) -> None:
        super().__init__(f"type {type_name!r} does not resolve to a declared message")
        self.type_name = type_name


class TypeCompatibility(enum.Enum):
    COMPATIBLE = "compatible"
    NAME_MISMATCH = "name_mismatch"
    STRUCTURAL_MISMATCH = "structural_mismatch"


@dataclass(frozen=True)
class ResolutionReport:
    """RPCs whose input or output type is neither declared nor ``Empty``."""

    unresolved: tuple[tuple[str, str], ...]  # ("Service.rpc", type name)

    @property
    def ok(self) -> bool:
        return not self.unresolved


def resolve(definition: InterfaceDef) -> ResolutionReport:
    """Check that every RPC input/output type resolves within its definition."""
    unresolved: list[tuple[str, str]] = []
    for service_name, rpcs in definition.services:
        for rpc in rpcs:
            for type_name in (rpc.input_type, rpc.output_type):
                if definition.find_message(type_name) is None:
                    unresolved.append((f"{service_name}.{rpc.name}", type_name))
    return ResolutionReport(unresolved=tuple(unresolved))


def types_compatible(
    a_name: str,
    a_def: InterfaceDef,
    b_name: str,
    b_def: InterfaceDef,
    *,
    require_same_name: bool = True,
) -> TypeCompatibility:
    """Compare two message types, each resolved against its own definition."""
    a_msg = a_def.find_message(a_name)
    if a_msg is None:
        raise UnresolvedType(a_name)
    b_msg = b_def.find_message(b_name)
    if b_msg is None:
        raise UnresolvedType(b_name)
    if require_same_name and a_msg.full_name != b_msg.full_name:
        return TypeCompatibility.NAME_MISMATCH
    if not _same_message_structure(a_def, a_msg, b_def, b_msg, set()):
        return TypeCompatibility.STRUCTURAL_MISMATCH
    return TypeCompatibility.COMPATIBLE


def _same_message_structure(
    a_def: InterfaceDef,
    a_msg: MessageType,
    b_def: InterfaceDef,
    b_msg: MessageType,
    assumed: set[tuple[str, str]],
) -> bool:
    # Coinductive: assume the pair equal while checking, so reference cycles
    # terminate.
    key = (a_msg.full_name, b_msg.full_name)
    if key in assumed:
        return True
    assumed.add(key)
    a_fields = sorted(a_msg.fields, key=lambda f: f.number)
    b_fields = sorted(b_msg.fields, key=lambda f: f.number)
    if len(a_fields) != len(b_fields):
        return False
    for fa, fb in zip(a_fields, b_fields):
        if (fa.number, fa.kind, fa.repeated) != (fb.number, fb.kind, fb.repeated):
            return False
        if fa.kind is FieldKind.SCALAR:
            if fa.type_name != fb.type_name:
                return False
        elif fa.kind is FieldKind.ENUM:
            if not _same_enum(a_def.find_enum(fa.type_name), b_def.find_enum(fb.type_name), fa, fb):
                return False
        else:
            ra = a_def.find_message(fa.type_name)
            rb = b_def.find_message(fb.type_name)
            if ra is None and rb is None:
                # Neither side declares the target; fall back to the written name.
                if fa.type_name != fb.type_name:
                    return False
            elif ra is None or rb is None:
                return False
            elif not _same_message_structure(a_def, ra, b_def, rb, assumed):
                return False
    return True


def _same_enum(ea: EnumType | None, eb: EnumType | None, fa, fb) -> bool:
    if ea is None and eb is None:
        return fa.type_name == fb.type_name
    if ea is None or eb is None:
        return False
    return sorted(n for _, n in ea.values) == sorted(n for _, n in eb.values)
