"""Proto3 subset parsing and interface typing."""

from .compat import (
    ResolutionReport,
    TypeCompatibility,
    UnresolvedType,
    resolve,
    types_compatible,
)
from .model import (
    EMPTY_MESSAGE,
    EMPTY_TYPE_NAME,
    SCALAR_TYPES,
    EnumType,
    FieldDef,
    FieldKind,
    InterfaceDef,
    MessageType,
    RpcSignature,
    render,
)
from .parser import ProtoParseError, ProtoSyntaxError, UnsupportedFeature, parse_proto

__all__ = [
    "EMPTY_MESSAGE",
    "EMPTY_TYPE_NAME",
    "SCALAR_TYPES",
    "EnumType",
    "FieldDef",
    "FieldKind",
    "InterfaceDef",
    "MessageType",
    "ProtoParseError",
    "ProtoSyntaxError",
    "ResolutionReport",
    "RpcSignature",
    "TypeCompatibility",
    "UnresolvedType",
    "UnsupportedFeature",
    "parse_proto",
    "render",
    "resolve",
    "types_compatible",
]
