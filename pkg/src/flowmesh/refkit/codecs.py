"""Hand-rolled wire codecs for the reference component messages.

The reference components deliberately carry no generated protobuf bindings —
they read and write their few message shapes directly on the wire helpers.
Encoders omit proto3 defaults (zero, empty, false); decoders accept both
packed and unpacked repeated scalars and apply defaults for absent fields.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

from ..wire import (
    decode_message,
    decode_varint,
    encode_fixed64_field,
    encode_len_field,
    encode_varint,
    encode_varint_field,
)

EMPTY = b""


# ---------------------------------------------------------------------------
# field helpers

def _packed_varints(field_number: int, values) -> bytes:
    if not values:
        return b""
    return encode_len_field(field_number, b"".join(encode_varint(int(v)) for v in values))


def _read_varint_list(raw_values) -> list[int]:
    """Flatten packed (bytes) and unpacked (int) encodings of the same field."""
    out: list[int] = []
    for value in raw_values:
        if isinstance(value, bytes):
            pos = 0
            while pos < len(value):
                item, pos = decode_varint(value, pos)
                out.append(item)
        else:
            out.append(value)
    return out


def _signed32(value: int) -> int:
    return value - (1 << 64) if value >= (1 << 63) else value


def _first_int(fields: dict, number: int, default: int = 0) -> int:
    values = fields.get(number)
    if not values:
        return default
    return int(values[-1])  # last-one-wins, as proto3 decoders do


def _first_bytes(fields: dict, number: int) -> bytes:
    values = fields.get(number)
    if not values:
        return b""
    value = values[-1]
    if not isinstance(value, (bytes, bytearray)):
        raise ValueError(f"field {number}: expected length-delimited value")
    return bytes(value)


def _first_str(fields: dict, number: int) -> str:
    return _first_bytes(fields, number).decode("utf-8")


def _encode_double_field(field_number: int, value: float) -> bytes:
    return encode_fixed64_field(field_number, struct.unpack("<Q", struct.pack("<d", value))[0])


def _default_double(value: float) -> bool:
    # bitwise, so -0.0 is still serialized (matches conformant encoders)
    return struct.pack("<d", value) == struct.pack("<d", 0.0)


def _first_double(fields: dict, number: int) -> float:
    values = fields.get(number)
    if not values:
        return 0.0
    return struct.unpack("<d", struct.pack("<Q", int(values[-1])))[0]


def _sub_messages(fields: dict, number: int) -> list[bytes]:
    return [bytes(v) for v in fields.get(number, ())]


# ---------------------------------------------------------------------------
# pipeline: Number, Hashes

@dataclass(frozen=True)
class Number:
    value: int = 0
    padding: bytes = b""


def encode_number(msg: Number) -> bytes:
    out = b""
    if msg.value:
        out += encode_varint_field(1, msg.value)
    if msg.padding:
        out += encode_len_field(2, msg.padding)
    return out


def decode_number(data: bytes) -> Number:
    fields = decode_message(data)
    return Number(value=_first_int(fields, 1), padding=_first_bytes(fields, 2))


def encode_hashes(hashes) -> bytes:
    return _packed_varints(1, hashes)


def decode_hashes(data: bytes) -> list[int]:
    return _read_varint_list(decode_message(data).get(1, ()))


# ---------------------------------------------------------------------------
# sudoku

@dataclass(frozen=True)
class SudokuJob:
    cells: tuple[int, ...] = ()  # 81 cells row-major, 0 = empty


@dataclass(frozen=True)
class SudokuResult:
    status: int = 0  # 0 = solvable, 1 = no solution
    solution: tuple[int, ...] = ()
    description: str = ""


def encode_sudoku_job(msg: SudokuJob) -> bytes:
    return _packed_varints(1, msg.cells)


def decode_sudoku_job(data: bytes) -> SudokuJob:
    fields = decode_message(data)
    return SudokuJob(cells=tuple(_signed32(v) for v in _read_varint_list(fields.get(1, ()))))


def encode_sudoku_result(msg: SudokuResult) -> bytes:
    out = b""
    if msg.status:
        out += encode_varint_field(1, msg.status)
    out += _packed_varints(2, msg.solution)
    if msg.description:
        out += encode_len_field(3, msg.description.encode("utf-8"))
    return out


def decode_sudoku_result(data: bytes) -> SudokuResult:
    fields = decode_message(data)
    return SudokuResult(
        status=_signed32(_first_int(fields, 1)),
        solution=tuple(_signed32(v) for v in _read_varint_list(fields.get(2, ()))),
        description=_first_str(fields, 3),
    )


@dataclass(frozen=True)
class SolverJob:
    program: str = ""
    number_of_answers: int = 0


def encode_solver_job(msg: SolverJob) -> bytes:
    out = b""
    if msg.program:
        out += encode_len_field(1, msg.program.encode("utf-8"))
    if msg.number_of_answers:
        out += encode_varint_field(2, msg.number_of_answers)
    return out


def decode_solver_job(data: bytes) -> SolverJob:
    fields = decode_message(data)
    return SolverJob(
        program=_first_str(fields, 1),
        number_of_answers=_signed32(_first_int(fields, 2)),
    )


def encode_answerset(atoms) -> bytes:
    return b"".join(encode_len_field(1, atom.encode("utf-8")) for atom in atoms)


def decode_answerset(data: bytes) -> tuple[str, ...]:
    return tuple(bytes(v).decode("utf-8") for v in decode_message(data).get(1, ()))


@dataclass(frozen=True)
class SolveResultAnswersets:
    answersets: tuple[tuple[str, ...], ...] = ()
    description: str = ""


def encode_solve_result_answersets(msg: SolveResultAnswersets) -> bytes:
    out = b"".join(encode_len_field(1, encode_answerset(a)) for a in msg.answersets)
    if msg.description:
        out += encode_len_field(2, msg.description.encode("utf-8"))
    return out


def decode_solve_result_answersets(data: bytes) -> SolveResultAnswersets:
    fields = decode_message(data)
    return SolveResultAnswersets(
        answersets=tuple(decode_answerset(raw) for raw in _sub_messages(fields, 1)),
        description=_first_str(fields, 2),
    )


# streaming variant: one answer set per message, same shape as Answerset
encode_solve_result_answerset = encode_answerset
decode_solve_result_answerset = decode_answerset


# ---------------------------------------------------------------------------
# maze

@dataclass(frozen=True)
class Goal:
    row: int = 0
    col: int = 0


@dataclass(frozen=True)
class MazeAction:
    direction: str = ""  # "up" | "down" | "left" | "right"


@dataclass(frozen=True)
class MazeResult:
    success: bool = False
    detail: str = ""


@dataclass(frozen=True)
class MazeState:
    width: int = 0
    height: int = 0
    walls: tuple[bool, ...] = ()  # row-major, True = wall
    agent_row: int = 0
    agent_col: int = 0


@dataclass(frozen=True)
class MazeProblem:
    state: MazeState = field(default_factory=MazeState)
    goal: Goal = field(default_factory=Goal)


@dataclass(frozen=True)
class MazeSolution:
    found: bool = False
    actions: tuple[MazeAction, ...] = ()


def encode_goal(msg: Goal) -> bytes:
    out = b""
    if msg.row:
        out += encode_varint_field(1, msg.row)
    if msg.col:
        out += encode_varint_field(2, msg.col)
    return out


def decode_goal(data: bytes) -> Goal:
    fields = decode_message(data)
    return Goal(row=_signed32(_first_int(fields, 1)), col=_signed32(_first_int(fields, 2)))


def encode_maze_action(msg: MazeAction) -> bytes:
    if not msg.direction:
        return b""
    return encode_len_field(1, msg.direction.encode("utf-8"))


def decode_maze_action(data: bytes) -> MazeAction:
    return MazeAction(direction=_first_str(decode_message(data), 1))


def encode_maze_result(msg: MazeResult) -> bytes:
    out = b""
    if msg.success:
        out += encode_varint_field(1, 1)
    if msg.detail:
        out += encode_len_field(2, msg.detail.encode("utf-8"))
    return out


def decode_maze_result(data: bytes) -> MazeResult:
    fields = decode_message(data)
    return MazeResult(success=bool(_first_int(fields, 1)), detail=_first_str(fields, 2))


def encode_maze_state(msg: MazeState) -> bytes:
    out = b""
    if msg.width:
        out += encode_varint_field(1, msg.width)
    if msg.height:
        out += encode_varint_field(2, msg.height)
    out += _packed_varints(3, [1 if w else 0 for w in msg.walls])
    if msg.agent_row:
        out += encode_varint_field(4, msg.agent_row)
    if msg.agent_col:
        out += encode_varint_field(5, msg.agent_col)
    return out


def decode_maze_state(data: bytes) -> MazeState:
    fields = decode_message(data)
    return MazeState(
        width=_signed32(_first_int(fields, 1)),
        height=_signed32(_first_int(fields, 2)),
        walls=tuple(bool(v) for v in _read_varint_list(fields.get(3, ()))),
        agent_row=_signed32(_first_int(fields, 4)),
        agent_col=_signed32(_first_int(fields, 5)),
    )


def encode_maze_problem(msg: MazeProblem) -> bytes:
    return encode_len_field(1, encode_maze_state(msg.state)) + encode_len_field(
        2, encode_goal(msg.goal)
    )


def decode_maze_problem(data: bytes) -> MazeProblem:
    fields = decode_message(data)
    return MazeProblem(
        state=decode_maze_state(_first_bytes(fields, 1)),
        goal=decode_goal(_first_bytes(fields, 2)),
    )


def encode_maze_solution(msg: MazeSolution) -> bytes:
    out = b""
    if msg.found:
        out += encode_varint_field(1, 1)
    out += b"".join(encode_len_field(2, encode_maze_action(a)) for a in msg.actions)
    return out


def decode_maze_solution(data: bytes) -> MazeSolution:
    fields = decode_message(data)
    return MazeSolution(
        found=bool(_first_int(fields, 1)),
        actions=tuple(decode_maze_action(raw) for raw in _sub_messages(fields, 2)),
    )


# ---------------------------------------------------------------------------
# image pipeline (camera / detector / collator / visualizer)

@dataclass(frozen=True)
class Point:
    x: float = 0.0
    y: float = 0.0


@dataclass(frozen=True)
class DetectedObject:
    class_name: str = ""
    class_idx: int = 0
    p1: Point = field(default_factory=Point)
    p2: Point = field(default_factory=Point)
    conf: float = 0.0


@dataclass(frozen=True)
class ImageWithObjects:
    image: bytes = b""  # Image.data
    objects: tuple[DetectedObject, ...] = ()


def encode_image(data: bytes) -> bytes:
    if not data:
        return b""
    return encode_len_field(1, data)


def decode_image(payload: bytes) -> bytes:
    return _first_bytes(decode_message(payload), 1)


def encode_point(msg: Point) -> bytes:
    out = b""
    if not _default_double(msg.x):
        out += _encode_double_field(1, msg.x)
    if not _default_double(msg.y):
        out += _encode_double_field(2, msg.y)
    return out


def decode_point(data: bytes) -> Point:
    fields = decode_message(data)
    return Point(x=_first_double(fields, 1), y=_first_double(fields, 2))


def encode_detected_object(msg: DetectedObject) -> bytes:
    out = b""
    if msg.class_name:
        out += encode_len_field(1, msg.class_name.encode("utf-8"))
    if msg.class_idx:
        out += encode_varint_field(2, msg.class_idx)
    p1 = encode_point(msg.p1)
    if p1:
        out += encode_len_field(3, p1)
    p2 = encode_point(msg.p2)
    if p2:
        out += encode_len_field(4, p2)
    if not _default_double(msg.conf):
        out += _encode_double_field(5, msg.conf)
    return out


def decode_detected_object(data: bytes) -> DetectedObject:
    fields = decode_message(data)
    return DetectedObject(
        class_name=_first_str(fields, 1),
        class_idx=_first_int(fields, 2),
        p1=decode_point(_first_bytes(fields, 3)),
        p2=decode_point(_first_bytes(fields, 4)),
        conf=_first_double(fields, 5),
    )


def encode_detected_objects(objects) -> bytes:
    return b"".join(encode_len_field(1, encode_detected_object(obj)) for obj in objects)


def decode_detected_objects(data: bytes) -> tuple[DetectedObject, ...]:
    return tuple(
        decode_detected_object(raw) for raw in _sub_messages(decode_message(data), 1)
    )


def encode_image_with_objects(msg: ImageWithObjects) -> bytes:
    return encode_len_field(1, encode_image(msg.image)) + encode_len_field(
        2, encode_detected_objects(msg.objects)
    )


def decode_image_with_objects(data: bytes) -> ImageWithObjects:
    fields = decode_message(data)
    return ImageWithObjects(
        image=decode_image(_first_bytes(fields, 1)),
        objects=decode_detected_objects(_first_bytes(fields, 2)),
    )
