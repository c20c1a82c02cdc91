"""Maze case study: simulator, BFS planner, executor, GUI surrogate.

The executor is the interesting part: five unary RPCs that, wired through
the orchestrator, close three feedback loops (goal → plan → result, action
→ action result, state broadcast).  Its handlers block until the state
machine is ready for them, which is what lets a purely polled topology
behave like an event-driven one.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import replace

import grpc

from . import codecs
from .codecs import Goal, MazeAction, MazeProblem, MazeResult, MazeSolution, MazeState
from .serving import unary_unary

DIRECTIONS = {"up": (-1, 0), "down": (1, 0), "left": (0, -1), "right": (0, 1)}


def make_state(width: int, height: int, walls=(), agent=(0, 0)) -> MazeState:
    """Build a MazeState from (row, col) wall coordinates."""
    flags = [False] * (width * height)
    for row, col in walls:
        flags[row * width + col] = True
    return MazeState(
        width=width,
        height=height,
        walls=tuple(flags),
        agent_row=agent[0],
        agent_col=agent[1],
    )


def is_wall(state: MazeState, row: int, col: int) -> bool:
    if not (0 <= row < state.height and 0 <= col < state.width):
        return True
    index = row * state.width + col
    return index < len(state.walls) and state.walls[index]


def bfs_plan(state: MazeState, goal: Goal) -> list[str] | None:
    """Shortest action list from the agent to the goal, or None if unreachable."""
    start = (state.agent_row, state.agent_col)
    target = (goal.row, goal.col)
    if is_wall(state, *target) or is_wall(state, *start):
        return None
    if start == target:
        return []
    parents: dict[tuple[int, int], tuple[tuple[int, int], str]] = {}
    frontier = deque([start])
    seen = {start}
    while frontier:
        cell = frontier.popleft()
        for direction, (dr, dc) in DIRECTIONS.items():
            nxt = (cell[0] + dr, cell[1] + dc)
            if nxt in seen or is_wall(state, *nxt):
                continue
            parents[nxt] = (cell, direction)
            if nxt == target:
                path: list[str] = []
                node = nxt
                while node != start:
                    node, step = parents[node]
                    path.append(step)
                path.reverse()
                return path
            seen.add(nxt)
            frontier.append(nxt)
    return None


class MazeSimulator:
    """Holds the world state; doAction moves the agent one cell or refuses."""

    def __init__(self, state: MazeState) -> None:
        self._lock = threading.Lock()
        self._state = state
        self._actions: list[tuple[str, bool]] = []

    def _do_action(self, request: bytes, context) -> bytes:
        action = codecs.decode_maze_action(request)
        with self._lock:
            delta = DIRECTIONS.get(action.direction)
            if delta is None:
                result = MazeResult(False, f"unknown direction {action.direction!r}")
            else:
                row = self._state.agent_row + delta[0]
                col = self._state.agent_col + delta[1]
                if is_wall(self._state, row, col):
                    result = MazeResult(False, "blocked")
                else:
                    self._state = replace(self._state, agent_row=row, agent_col=col)
                    result = MazeResult(True, "")
            self._actions.append((action.direction, result.success))
        return codecs.encode_maze_result(result)

    def _get_state(self, request: bytes, context) -> bytes:
        with self._lock:
            return codecs.encode_maze_state(self._state)

    def _set_state(self, request: bytes, context) -> bytes:
        state = codecs.decode_maze_state(request)
        with self._lock:
            self._state = state
        return codecs.EMPTY

    def grpc_services(self):
        return {
            "maze.Simulator": {
                "doAction": unary_unary(self._do_action),
                "getState": unary_unary(self._get_state),
                "setState": unary_unary(self._set_state),
            }
        }

    # test hooks

    def inject_wall(self, row: int, col: int) -> None:
        with self._lock:
            flags = list(self._state.walls)
            flags[row * self._state.width + col] = True
            self._state = replace(self._state, walls=tuple(flags))

    def state(self) -> MazeState:
        with self._lock:
            return self._state

    def action_log(self) -> list[tuple[str, bool]]:
        with self._lock:
            return list(self._actions)

    def action_count(self) -> int:
        with self._lock:
            return len(self._actions)


class MazePlanner:
    """plan(Problem) -> Solution via breadth-first search."""

    def _plan(self, request: bytes, context) -> bytes:
        problem = codecs.decode_maze_problem(request)
        path = bfs_plan(problem.state, problem.goal)
        if path is None:
            solution = MazeSolution(found=False)
        else:
            solution = MazeSolution(
                found=True, actions=tuple(MazeAction(d) for d in path)
            )
        return codecs.encode_maze_solution(solution)

    def grpc_services(self):
        return {"maze.Planner": {"plan": unary_unary(self._plan)}}


class _ActivePlan:
    __slots__ = ("event", "success", "detail")

    def __init__(self) -> None:
        self.event = threading.Event()
        self.success = False
        self.detail = ""

    def resolve(self, success: bool, detail: str) -> None:
        if not self.event.is_set():
            self.success = success
            self.detail = detail
            self.event.set()


class MazeExecutor:
    """The E1–E5 state machine.

    assembleProblem waits for a known world state; processPlanningResult
    queues the plan and blocks until it resolves; doNextAction hands out
    one action at a time and never a second one while the first is
    unanswered; a failed action result discards the rest of the queue and
    resolves the plan as failed, an exhausted queue resolves it as success.
    """

    def __init__(self) -> None:
        self._cond = threading.Condition()
        self._last_state: MazeState | None = None
        self._queue: deque[str] = deque()
        self._awaiting = False
        self._active: _ActivePlan | None = None

    def _cancelled_flag(self, context) -> threading.Event:
        flag = threading.Event()

        def on_cancel() -> None:
            flag.set()
            with self._cond:
                self._cond.notify_all()

        context.add_callback(on_cancel)
        return flag

    def _assemble_problem(self, request: bytes, context) -> bytes:
        goal = codecs.decode_goal(request)
        cancelled = self._cancelled_flag(context)
        with self._cond:
            self._cond.wait_for(lambda: self._last_state is not None or cancelled.is_set())
            if self._last_state is None:
                context.abort(grpc.StatusCode.CANCELLED, "cancelled before a state arrived")
            problem = MazeProblem(state=self._last_state, goal=goal)
        return codecs.encode_maze_problem(problem)

    def _process_planning_result(self, request: bytes, context) -> bytes:
        solution = codecs.decode_maze_solution(request)
        cancelled = self._cancelled_flag(context)
        with self._cond:
            self._cond.wait_for(lambda: self._active is None or cancelled.is_set())
            if cancelled.is_set():
                context.abort(grpc.StatusCode.CANCELLED, "cancelled")
            if not solution.found:
                return codecs.encode_maze_result(MazeResult(False, "planning failed"))
            active = _ActivePlan()
            self._active = active
            self._queue.extend(a.direction for a in solution.actions)
            if not self._queue:
                active.resolve(True, "already at goal")
            self._cond.notify_all()
        while not active.event.wait(0.25):
            if cancelled.is_set():
                with self._cond:
                    self._active = None
                    self._queue.clear()
                    self._cond.notify_all()
                context.abort(grpc.StatusCode.CANCELLED, "cancelled mid-plan")
        with self._cond:
            self._active = None
            self._cond.notify_all()
        return codecs.encode_maze_result(MazeResult(active.success, active.detail))

    def _do_next_action(self, request: bytes, context) -> bytes:
        cancelled = self._cancelled_flag(context)
        with self._cond:
            self._cond.wait_for(
                lambda: (self._queue and not self._awaiting) or cancelled.is_set()
            )
            if cancelled.is_set():
                context.abort(grpc.StatusCode.CANCELLED, "no action pending")
            direction = self._queue.popleft()
            self._awaiting = True
        return codecs.encode_maze_action(MazeAction(direction))

    def _process_action_result(self, request: bytes, context) -> bytes:
        result = codecs.decode_maze_result(request)
        with self._cond:
            self._awaiting = False
            active = self._active
            if result.success:
                if active is not None and not self._queue:
                    active.resolve(True, "goal reached")
            else:
                self._queue.clear()
                if active is not None:
                    active.resolve(False, result.detail or "action failed")
            self._cond.notify_all()
        return codecs.EMPTY

    def _process_state(self, request: bytes, context) -> bytes:
        state = codecs.decode_maze_state(request)
        with self._cond:
            self._last_state = state
            self._cond.notify_all()
        return codecs.EMPTY

    def grpc_services(self):
        return {
            "maze.Executor": {
                "assembleProblem": unary_unary(self._assemble_problem),
                "doNextAction": unary_unary(self._do_next_action),
                "processPlanningResult": unary_unary(self._process_planning_result),
                "processActionResult": unary_unary(self._process_action_result),
                "processState": unary_unary(self._process_state),
            }
        }


class MazeGuiSurrogate:
    """Issues scripted goals one at a time and records per-goal results."""

    def __init__(self, goals=(), initial_state: MazeState | None = None) -> None:
        self._cond = threading.Condition()
        self._goals: deque[Goal] = deque(goals)
        self._initial_state = initial_state or MazeState()
        self._results: list[MazeResult] = []
        self._frame_count = 0
        self._last_frame: MazeState | None = None

    def _request_task(self, request: bytes, context) -> bytes:
        cancelled = threading.Event()

        def on_cancel() -> None:
            cancelled.set()
            with self._cond:
                self._cond.notify_all()

        context.add_callback(on_cancel)
        with self._cond:
            self._cond.wait_for(lambda: self._goals or cancelled.is_set())
            if not self._goals:
                context.abort(grpc.StatusCode.CANCELLED, "no task pending")
            goal = self._goals.popleft()
        return codecs.encode_goal(goal)

    def _process_task_result(self, request: bytes, context) -> bytes:
        result = codecs.decode_maze_result(request)
        with self._cond:
            self._results.append(result)
            self._cond.notify_all()
        return codecs.EMPTY

    def _get_state(self, request: bytes, context) -> bytes:
        return codecs.encode_maze_state(self._initial_state)

    def _visualize_state(self, request: bytes, context) -> bytes:
        state = codecs.decode_maze_state(request)
        with self._cond:
            self._frame_count += 1
            self._last_frame = state
        return codecs.EMPTY

    def grpc_services(self):
        return {
            "maze.MazeGUI": {
                "requestTask": unary_unary(self._request_task),
                "processTaskResult": unary_unary(self._process_task_result),
                "getState": unary_unary(self._get_state),
                "visualizeState": unary_unary(self._visualize_state),
            }
        }

    # test hooks

    def add_goal(self, goal: Goal) -> None:
        with self._cond:
            self._goals.append(goal)
            self._cond.notify_all()

    def results(self) -> list[MazeResult]:
        with self._cond:
            return list(self._results)

    def wait_results(self, count: int, timeout: float = 10.0) -> bool:
        with self._cond:
            return self._cond.wait_for(lambda: len(self._results) >= count, timeout)

    def frames(self) -> tuple[int, MazeState | None]:
        with self._cond:
            return self._frame_count, self._last_frame
