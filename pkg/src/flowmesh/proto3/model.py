"""Data model for parsed proto3 interfaces.

An :class:`InterfaceDef` is the typed surface of one component: its message
types, enums, and gRPC service signatures. Definitions are immutable and
hashable so they can be shared freely across threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

SCALAR_TYPES = frozenset(
    {
        "double",
        "float",
        "int32",
        "int64",
        "uint32",
        "uint64",
        "bool",
        "string",
        "bytes",
    }
)

EMPTY_TYPE_NAME = "Empty"


class FieldKind(enum.Enum):
    SCALAR = "scalar"
    MESSAGE = "message-ref"
    ENUM = "enum-ref"


@dataclass(frozen=True)
class FieldDef:
    """One field of a message: name, tag number, type reference, label."""

    name: str
    number: int
    kind: FieldKind
    type_name: str  # scalar type name, or the referenced message/enum name
    repeated: bool = False


@dataclass(frozen=True)
class MessageType:
    full_name: str
    fields: tuple[FieldDef, ...] = ()

    def __post_init__(self) -> None:
        numbers = [f.number for f in self.fields]
        if any(n < 1 for n in numbers):
            raise ValueError(f"{self.full_name}: field numbers must be >= 1")
        if len(set(numbers)) != len(numbers):
            raise ValueError(f"{self.full_name}: duplicate field numbers")
        names = [f.name for f in self.fields]
        if len(set(names)) != len(names):
            raise ValueError(f"{self.full_name}: duplicate field names")

    @property
    def simple_name(self) -> str:
        return self.full_name.rsplit(".", 1)[-1]


@dataclass(frozen=True)
class EnumType:
    full_name: str
    values: tuple[tuple[str, int], ...] = ()

    @property
    def simple_name(self) -> str:
        return self.full_name.rsplit(".", 1)[-1]


# The well-known empty message, implicitly available without declaration.
EMPTY_MESSAGE = MessageType(full_name=EMPTY_TYPE_NAME, fields=())


@dataclass(frozen=True)
class RpcSignature:
    service: str
    name: str
    input_type: str
    output_type: str
    input_streaming: bool = False
    output_streaming: bool = False


@dataclass(frozen=True)
class InterfaceDef:
    """Parsed interface of one component: messages, enums, and services."""

    package: str = ""
    messages: tuple[MessageType, ...] = ()
    enums: tuple[EnumType, ...] = ()
    services: tuple[tuple[str, tuple[RpcSignature, ...]], ...] = field(default=())

    def service_names(self) -> list[str]:
        return [name for name, _ in self.services]

    def rpcs_of(self, service: str) -> tuple[RpcSignature, ...]:
        for name, rpcs in self.services:
            if name == service:
                return rpcs
        raise KeyError(f"no service named {service!r}")

    def all_rpcs(self) -> list[RpcSignature]:
        return [rpc for _, rpcs in self.services for rpc in rpcs]

    def qualify(self, name: str) -> str:
        """Fully qualify a type name against this definition's package."""
        if self.package and not name.startswith(self.package + "."):
            return f"{self.package}.{name}"
        return name

    def find_message(self, name: str) -> MessageType | None:
        """Look up a message by declared, qualified, or bare name.

        The well-known ``Empty`` resolves to the built-in zero-field message
        unless a declaration shadows it.
        """
        for candidate in (name, self.qualify(name)):
            for message in self.messages:
                if message.full_name == candidate:
                    return message
        if name == EMPTY_TYPE_NAME:
            return EMPTY_MESSAGE
        return None

    def find_enum(self, name: str) -> EnumType | None:
        for candidate in (name, self.qualify(name)):
            for enum_type in self.enums:
                if enum_type.full_name == candidate:
                    return enum_type
        return None

    def is_empty_type(self, name: str) -> bool:
        """True if `name` resolves to a zero-field message called Empty."""
        message = self.find_message(name)
        return (
            message is not None
            and message.simple_name == EMPTY_TYPE_NAME
            and not message.fields
        )


def render(definition: InterfaceDef) -> str:
    """Pretty-print a definition back to proto3 source.

    The output re-parses to an equal definition (round-trip fixpoint on the
    supported subset).
    """
    lines = ['syntax = "proto3";', ""]
    if definition.package:
        lines += [f"package {definition.package};", ""]
    for enum_type in definition.enums:
        lines.append(f"enum {enum_type.simple_name} {{")
        for value_name, value_number in enum_type.values:
            lines.append(f"  {value_name} = {value_number};")
        lines += ["}", ""]
    for message in definition.messages:
        lines.append(f"message {message.simple_name} {{")
        for f in message.fields:
            label = "repeated " if f.repeated else ""
            lines.append(f"  {label}{f.type_name} {f.name} = {f.number};")
        lines += ["}", ""]
    for service_name, rpcs in definition.services:
        lines.append(f"service {service_name} {{")
        for rpc in rpcs:
            in_part = ("stream " if rpc.input_streaming else "") + rpc.input_type
            out_part = ("stream " if rpc.output_streaming else "") + rpc.output_type
            lines.append(f"  rpc {rpc.name}({in_part}) returns ({out_part});")
        lines += ["}", ""]
    while lines and lines[-1] == "":
        lines.pop()
    return "\n".join(lines) + "\n"
