"""Sudoku case study: GUI surrogate, design evaluator stub, solver stubs.

The solution is two nested request/response cycles run over four links:
GUI streams evaluation jobs, the evaluator turns each into a solver job,
the solver answers, and the evaluator's result flows back to the GUI.
No ASP solving happens — the solver returns canned answer sets — but the
cycle structure and FIFO correlation are the real thing.
"""

from __future__ import annotations

import threading
from collections import deque

from . import codecs
from .serving import stream_unary, unary_stream, unary_unary


def scripted_job(index: int) -> codecs.SudokuJob:
    """Deterministic 81-cell design with a single clue."""
    cells = [0] * 81
    cells[index % 81] = (index % 9) + 1
    return codecs.SudokuJob(cells=tuple(cells))


class SudokuGuiSurrogate:
    """Streams a scripted job list and records the results that come back.

    The script cursor is shared across request streams, so each job is
    emitted at most once even if the stream is reopened.  An exhausted
    stream blocks instead of closing — a GUI with no pending user action
    stays connected.
    """

    def __init__(self, jobs=None, count: int = 50, delay: float = 0.0) -> None:
        if jobs is None:
            jobs = [scripted_job(i) for i in range(count)]
        self._jobs = list(jobs)
        self._delay = delay
        self._lock = threading.Lock()
        self._cond = threading.Condition(self._lock)
        self._cursor = 0
        self._results: list[codecs.SudokuResult] = []

    def _request_jobs(self, request: bytes, context):
        cancelled = threading.Event()
        context.add_callback(cancelled.set)
        while not cancelled.is_set():
            with self._lock:
                if self._cursor < len(self._jobs):
                    job = self._jobs[self._cursor]
                    self._cursor += 1
                else:
                    job = None
            if job is None:
                cancelled.wait()
                return
            yield codecs.encode_sudoku_job(job)
            if self._delay:
                cancelled.wait(self._delay)

    def _process_results(self, request_iterator, context) -> bytes:
        for raw in request_iterator:
            result = codecs.decode_sudoku_result(raw)
            with self._cond:
                self._results.append(result)
                self._cond.notify_all()
        return codecs.EMPTY

    def grpc_services(self):
        return {
            "SudokuGUI": {
                "requestSudokuEvaluation": unary_stream(self._request_jobs),
                "processEvaluationResult": stream_unary(self._process_results),
            }
        }

    def results(self) -> list[codecs.SudokuResult]:
        with self._lock:
            return list(self._results)

    def wait_results(self, count: int, timeout: float = 10.0) -> bool:
        with self._cond:
            return self._cond.wait_for(lambda: len(self._results) >= count, timeout)


class _PendingJob:
    __slots__ = ("event", "result")

    def __init__(self) -> None:
        self.event = threading.Event()
        self.result: codecs.SolveResultAnswersets | None = None


class SudokuEvaluatorStub:
    """Turns evaluation jobs into solver jobs and pairs the replies FIFO.

    Correlation is strictly by order: the n-th reply on the result stream
    resolves the n-th outstanding evaluation.  That is sound here because
    the orchestrator preserves per-link FIFO order and the solver answers
    one reply per job.
    """

    def __init__(self, solver_timeout: float = 30.0) -> None:
        self._lock = threading.Lock()
        self._cond = threading.Condition(self._lock)
        self._outbox: deque[codecs.SolverJob] = deque()
        self._pending: deque[_PendingJob] = deque()
        self._timeout = solver_timeout

    def _evaluate(self, request: bytes, context) -> bytes:
        job = codecs.decode_sudoku_job(request)
        clues = sum(1 for c in job.cells if c)
        solver_job = codecs.SolverJob(
            program=f"sudoku(clues={clues}).", number_of_answers=2
        )
        pending = _PendingJob()
        context.add_callback(pending.event.set)
        with self._cond:
            self._pending.append(pending)
            self._outbox.append(solver_job)
            self._cond.notify_all()
        pending.event.wait(self._timeout)
        answer = pending.result
        if answer is None:
            return codecs.encode_sudoku_result(
                codecs.SudokuResult(status=1, description="no solver reply")
            )
        status = 0 if answer.answersets else 1
        return codecs.encode_sudoku_result(
            codecs.SudokuResult(
                status=status,
                solution=job.cells if status == 0 else (),
                description=f"{len(answer.answersets)} answer sets",
            )
        )

    def _call_solver(self, request: bytes, context):
        cancelled = threading.Event()
        context.add_callback(cancelled.set)
        while not cancelled.is_set():
            with self._cond:
                self._cond.wait_for(
                    lambda: self._outbox or cancelled.is_set(), timeout=0.5
                )
                job = self._outbox.popleft() if self._outbox else None
            if job is not None:
                yield codecs.encode_solver_job(job)

    def _receive_results(self, request_iterator, context) -> bytes:
        for raw in request_iterator:
            result = codecs.decode_solve_result_answersets(raw)
            with self._lock:
                pending = self._pending.popleft() if self._pending else None
            if pending is not None:
                pending.result = result
                pending.event.set()
        return codecs.EMPTY

    def grpc_services(self):
        return {
            "SudokuDesignEvaluator": {
                "evaluateSudokuDesign": unary_unary(self._evaluate),
                "callAnswersetSolver": unary_stream(self._call_solver),
                "receiveAnswersetSolverResult": stream_unary(self._receive_results),
            }
        }


_CANNED_ANSWERSETS = (("sol(1)",), ("sol(2)",))


class OneShotSolverStub:
    """solve(SolverJob) -> all answer sets at once, capped at two."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.calls = 0

    def _solve(self, request: bytes, context) -> bytes:
        job = codecs.decode_solver_job(request)
        with self._lock:
            self.calls += 1
        count = max(0, min(job.number_of_answers, 2))
        return codecs.encode_solve_result_answersets(
            codecs.SolveResultAnswersets(
                answersets=_CANNED_ANSWERSETS[:count],
                description=f"{count} answer sets",
            )
        )

    def grpc_services(self):
        return {"OneShotAnswerSetSolver": {"solve": unary_unary(self._solve)}}


class StreamingSolverStub:
    """solve(SolverJob) -> one streamed message per answer set."""

    def _solve(self, request: bytes, context):
        job = codecs.decode_solver_job(request)
        for atoms in _CANNED_ANSWERSETS[: max(0, min(job.number_of_answers, 2))]:
            yield codecs.encode_solve_result_answerset(atoms)

    def grpc_services(self):
        return {"StreamingAnswerSetSolver": {"solve": unary_stream(self._solve)}}
