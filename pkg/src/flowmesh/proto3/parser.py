"""Recursive-descent parser for the proto3 subset used by component interfaces.

Supported: ``syntax = "proto3"``, ``package``, flat ``message`` definitions
with scalar / message-typed / enum-typed fields and ``repeated``, ``enum``,
and ``service`` blocks with ``rpc X(A) returns (B)`` where either side may be
``stream``-qualified. Line and block comments are ignored.

Anything else (``import``, ``oneof``, ``map``, ``option``, nested types,
proto2 labels) raises :class:`UnsupportedFeature`; malformed input raises
:class:`ProtoSyntaxError`. Both carry the 1-based line and column.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import (
    SCALAR_TYPES,
    EnumType,
    FieldDef,
    FieldKind,
    InterfaceDef,
    MessageType,
    RpcSignature,
)


class ProtoParseError(ValueError):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class ProtoSyntaxError(ProtoParseError):
    """Input not parseable as the supported grammar."""


class UnsupportedFeature(ProtoParseError):
    """Valid protobuf, but outside the supported subset."""


_UNSUPPORTED_KEYWORDS = frozenset(
    {
        "import",
        "oneof",
        "map",
        "option",
        "extend",
        "extensions",
        "reserved",
        "group",
        "optional",
        "required",
    }
)

_TOKEN_RE = re.compile(
    r"""
    (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)*)
  | (?P<number>-?[0-9]+)
  | (?P<punct>[{}()=;,\[\]])
  | (?P<space>\s+)
  | (?P<bad>.)
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


_EOF = "<end of input>"


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line = 1
    line_start = 0
    for match in _TOKEN_RE.finditer(text):
        kind = match.lastgroup or "bad"
        value = match.group()
        column = match.start() - line_start + 1
        if kind == "bad":
            raise ProtoSyntaxError(f"unexpected character {value!r}", line, column)
        if kind not in ("space", "comment"):
            tokens.append(_Token(kind, value, line, column))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = match.start() + value.rfind("\n") + 1
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.pos = 0

    # -- token helpers -------------------------------------------------

    def _peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self) -> _Token:
        token = self._peek()
        if token is None:
            last = self.tokens[-1] if self.tokens else _Token("punct", "", 1, 1)
            raise ProtoSyntaxError("unexpected end of input", last.line, last.column)
        self.pos += 1
        return token

    def _expect(self, text: str) -> _Token:
        token = self._next()
        if token.text != text:
            raise ProtoSyntaxError(
                f"expected {text!r}, found {token.text!r}", token.line, token.column
            )
        return token

    def _expect_ident(self, what: str) -> _Token:
        token = self._next()
        if token.kind != "ident":
            raise ProtoSyntaxError(
                f"expected {what}, found {token.text!r}", token.line, token.column
            )
        return token

    def _reject_unsupported(self, token: _Token) -> None:
        if token.text in _UNSUPPORTED_KEYWORDS:
            raise UnsupportedFeature(
                f"{token.text!r} is not supported", token.line, token.column
            )

    # -- grammar -------------------------------------------------------

    def parse_file(self) -> InterfaceDef:
        package = ""
        messages: list[tuple[str, list[FieldDef]]] = []
        enums: list[EnumType] = []
        services: list[tuple[str, list[RpcSignature]]] = []
        while (token := self._peek()) is not None:
            if token.text == ";":
                self._next()
                continue
            self._reject_unsupported(token)
            if token.text == "syntax":
                self._parse_syntax()
            elif token.text == "package":
                self._next()
                package = self._expect_ident("package name").text
                self._expect(";")
            elif token.text == "message":
                messages.append(self._parse_message())
            elif token.text == "enum":
                enums.append(self._parse_enum())
            elif token.text == "service":
                services.append(self._parse_service())
            else:
                raise ProtoSyntaxError(
                    f"expected a top-level definition, found {token.text!r}",
                    token.line,
                    token.column,
                )
        qualify = (lambda n: f"{package}.{n}") if package else (lambda n: n)
        enum_simple = {e.full_name for e in enums}  # simple names, pre-qualification
        built_enums = tuple(
            EnumType(full_name=qualify(e.full_name), values=e.values) for e in enums
        )
        built_messages = tuple(
            MessageType(
                full_name=qualify(name),
                fields=tuple(
                    self._classify(field, enum_simple) for field in fields
                ),
            )
            for name, fields in messages
        )
        return InterfaceDef(
            package=package,
            messages=built_messages,
            enums=built_enums,
            services=tuple((name, tuple(rpcs)) for name, rpcs in services),
        )

    @staticmethod
    def _classify(field: FieldDef, enum_names: set[str]) -> FieldDef:
        # Kind resolution is a second pass so forward references work.
        if field.type_name in SCALAR_TYPES:
            kind = FieldKind.SCALAR
        elif field.type_name.rsplit(".", 1)[-1] in enum_names:
            kind = FieldKind.ENUM
        else:
            kind = FieldKind.MESSAGE
        return FieldDef(
            name=field.name,
            number=field.number,
            kind=kind,
            type_name=field.type_name,
            repeated=field.repeated,
        )

    def _parse_syntax(self) -> None:
        self._next()  # 'syntax'
        self._expect("=")
        token = self._next()
        if token.kind != "string":
            raise ProtoSyntaxError(
                f"expected a quoted syntax level, found {token.text!r}",
                token.line,
                token.column,
            )
        if token.text != '"proto3"':
            raise UnsupportedFeature(
                f"syntax {token.text} is not supported (only proto3)",
                token.line,
                token.column,
            )
        self._expect(";")

    def _parse_message(self) -> tuple[str, list[FieldDef]]:
        self._next()  # 'message'
        name = self._expect_ident("message name")
        if "." in name.text:
            raise ProtoSyntaxError(
                f"invalid message name {name.text!r}", name.line, name.column
            )
        self._expect("{")
        fields: list[FieldDef] = []
        numbers: dict[int, _Token] = {}
        names: set[str] = set()
        while True:
            token = self._peek()
            if token is None:
                raise ProtoSyntaxError(f"unclosed message {name.text!r}", name.line, name.column)
            if token.text == "}":
                self._next()
                break
            if token.text == ";":
                self._next()
                continue
            self._reject_unsupported(token)
            if token.text in ("message", "enum"):
                raise UnsupportedFeature(
                    "nested type definitions are not supported", token.line, token.column
                )
            repeated = False
            if token.text == "repeated":
                self._next()
                repeated = True
            type_token = self._expect_ident("a field type")
            self._reject_unsupported(type_token)
            field_name = self._expect_ident("a field name")
            if "." in field_name.text:
                raise ProtoSyntaxError(
                    f"invalid field name {field_name.text!r}",
                    field_name.line,
                    field_name.column,
                )
            self._expect("=")
            number_token = self._next()
            if number_token.kind != "number" or int(number_token.text) < 1:
                raise ProtoSyntaxError(
                    f"expected a positive field number, found {number_token.text!r}",
                    number_token.line,
                    number_token.column,
                )
            number = int(number_token.text)
            if number in numbers:
                raise ProtoSyntaxError(
                    f"duplicate field number {number} in message {name.text!r}",
                    number_token.line,
                    number_token.column,
                )
            if field_name.text in names:
                raise ProtoSyntaxError(
                    f"duplicate field name {field_name.text!r} in message {name.text!r}",
                    field_name.line,
                    field_name.column,
                )
            token = self._peek()
            if token is not None and token.text == "[":
                raise UnsupportedFeature(
                    "field options are not supported", token.line, token.column
                )
            self._expect(";")
            numbers[number] = number_token
            names.add(field_name.text)
            fields.append(
                FieldDef(
                    name=field_name.text,
                    number=number,
                    kind=FieldKind.MESSAGE,  # provisional; classified later
                    type_name=type_token.text,
                    repeated=repeated,
                )
            )
        return name.text, fields

    def _parse_enum(self) -> EnumType:
        self._next()  # 'enum'
        name = self._expect_ident("enum name")
        self._expect("{")
        values: list[tuple[str, int]] = []
        while True:
            token = self._peek()
            if token is None:
                raise ProtoSyntaxError(f"unclosed enum {name.text!r}", name.line, name.column)
            if token.text == "}":
                self._next()
                break
            if token.text == ";":
                self._next()
                continue
            self._reject_unsupported(token)
            value_name = self._expect_ident("an enum value name")
            self._expect("=")
            number_token = self._next()
            if number_token.kind != "number":
                raise ProtoSyntaxError(
                    f"expected an enum value number, found {number_token.text!r}",
                    number_token.line,
                    number_token.column,
                )
            self._expect(";")
            values.append((value_name.text, int(number_token.text)))
        return EnumType(full_name=name.text, values=tuple(values))

    def _parse_service(self) -> tuple[str, list[RpcSignature]]:
        self._next()  # 'service'
        name = self._expect_ident("service name")
        self._expect("{")
        rpcs: list[RpcSignature] = []
        seen: set[str] = set()
        while True:
            token = self._peek()
            if token is None:
                raise ProtoSyntaxError(f"unclosed service {name.text!r}", name.line, name.column)
            if token.text == "}":
                self._next()
                break
            if token.text == ";":
                self._next()
                continue
            self._reject_unsupported(token)
            if token.text != "rpc":
                raise ProtoSyntaxError(
                    f"expected 'rpc', found {token.text!r}", token.line, token.column
                )
            self._next()
            rpc_name = self._expect_ident("an rpc name")
            if rpc_name.text in seen:
                raise ProtoSyntaxError(
                    f"duplicate rpc {rpc_name.text!r} in service {name.text!r}",
                    rpc_name.line,
                    rpc_name.column,
                )
            self._expect("(")
            input_streaming, input_type = self._parse_rpc_type()
            self._expect(")")
            returns = self._expect_ident("'returns'")
            if returns.text != "returns":
                raise ProtoSyntaxError(
                    f"expected 'returns', found {returns.text!r}",
                    returns.line,
                    returns.column,
                )
            self._expect("(")
            output_streaming, output_type = self._parse_rpc_type()
            self._expect(")")
            token = self._next()
            if token.text == "{":
                closing = self._next()
                if closing.text != "}":
                    raise UnsupportedFeature(
                        "rpc options are not supported", closing.line, closing.column
                    )
            elif token.text != ";":
                raise ProtoSyntaxError(
                    f"expected ';' after rpc, found {token.text!r}",
                    token.line,
                    token.column,
                )
            seen.add(rpc_name.text)
            rpcs.append(
                RpcSignature(
                    service=name.text,
                    name=rpc_name.text,
                    input_type=input_type,
                    output_type=output_type,
                    input_streaming=input_streaming,
                    output_streaming=output_streaming,
                )
            )
        return name.text, rpcs

    def _parse_rpc_type(self) -> tuple[bool, str]:
        token = self._expect_ident("a message type")
        if token.text == "stream":
            return True, self._expect_ident("a message type").text
        return False, token.text


def parse_proto(text: str) -> InterfaceDef:
    """Parse proto3 source text into an :class:`InterfaceDef`."""
    return _Parser(text).parse_file()
