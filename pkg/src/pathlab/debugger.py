"""Time-travel controller over recorded execution traces.

Stepping is index-addressed replay of the immutable trace, never inverse
mutation, so forward/back can not desynchronize: the picture at cursor k
is always a pure function of (traces, k). Multiple traces advance in
lockstep; a shorter trace freezes at its final state while longer ones
keep going. Replay keeps a checkpoint every 64 events so stepping stays
cheap on long traces.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum

from .algorithms import EventKind, ExecutionTrace
from .errors import ArgumentError, StateError

CHECKPOINT_INTERVAL = 64

DEFAULT_SPEED = 4.0
MAX_SPEED = 100.0


class Mode(str, Enum):
    PAUSED = "paused"
    PLAYING = "playing"


@dataclass(frozen=True)
class VisualTrace:
    """One algorithm's cell sets at the current cursor."""

    label: str
    color: str
    visited: frozenset[tuple[int, int]]
    frontier: frozenset[tuple[int, int]]
    current: tuple[int, int] | None
    path: tuple[tuple[int, int], ...]
    overlay: tuple[tuple[int, int], str] | None  # (anchor cell, inspection text)


@dataclass(frozen=True)
class VisualState:
    traces: tuple[VisualTrace, ...]
    cursors: tuple[int, ...]


@dataclass(frozen=True)
class InspectRecord:
    g_cost: float
    h_value: float
    status: EventKind
    visited_count: int


@dataclass(frozen=True)
class _FoldState:
    frontier: frozenset[tuple[int, int]]
    current: tuple[int, int] | None
    finished: EventKind | None


_EMPTY_FOLD = _FoldState(frozenset(), None, None)


class _Replay:
    """Per-trace replay helper: expansion prefix plus fold checkpoints."""

    def __init__(self, trace: ExecutionTrace):
        self.trace = trace
        self.expand_steps: list[int] = []
        self.expand_cells: list[tuple[int, int]] = []
        for e in trace.events:
            if e.kind == EventKind.EXPAND_CURRENT:
                self.expand_steps.append(e.step)
                self.expand_cells.append(e.node.cell())
        self._checkpoints: list[_FoldState] = [_EMPTY_FOLD]

    def _fold_from(self, state: _FoldState, lo: int, hi: int) -> _FoldState:
        frontier = set(state.frontier)
        current = state.current
        finished = state.finished
        for e in self.trace.events[lo : hi + 1]:
            cell = e.node.cell()
            if e.kind == EventKind.EXPAND_CURRENT:
                frontier.discard(cell)
                current = cell
            elif e.kind == EventKind.DISCOVER_FRONTIER:
                frontier.add(cell)
            elif e.kind in (EventKind.FINISH_FOUND, EventKind.FINISH_UNREACHABLE):
                current = None
                finished = e.kind
        return _FoldState(frozenset(frontier), current, finished)

    def fold(self, cursor: int) -> _FoldState:
        if cursor < 0:
            return _EMPTY_FOLD
        want = (cursor + 1) // CHECKPOINT_INTERVAL
        while len(self._checkpoints) <= want:
            i = len(self._checkpoints)
            prev = self._checkpoints[i - 1]
            self._checkpoints.append(
                self._fold_from(prev, (i - 1) * CHECKPOINT_INTERVAL, i * CHECKPOINT_INTERVAL - 1)
            )
        base = self._checkpoints[want]
        return self._fold_from(base, want * CHECKPOINT_INTERVAL, cursor)

    def visual(self, cursor: int) -> VisualTrace:
        trace = self.trace
        spec = trace.spec
        if cursor < 0:
            return VisualTrace(spec.label, spec.color, frozenset(), frozenset(), None, (), None)
        state = self.fold(cursor)
        m = bisect_right(self.expand_steps, cursor)
        visited = set(self.expand_cells[:m])
        path: tuple[tuple[int, int], ...] = ()
        if state.finished == EventKind.FINISH_FOUND:
            path = tuple(n.cell() for n in trace.path)
            visited.update(path)  # covers the degenerate single-event run
        if state.current is not None:
            visited.discard(state.current)
        e = trace.events[cursor]
        text = (
            f"g={e.g_cost:.4g} h={e.h_value:.4g} "
            f"status={e.kind.value} visited={e.visited_count}"
        )
        return VisualTrace(
            spec.label,
            spec.color,
            frozenset(visited),
            state.frontier,
            state.current,
            path,
            (e.node.cell(), text),
        )


class DebugSession:
    """Lockstep cursor over one or more traces with break/continue control."""

    def __init__(
        self,
        traces: list[ExecutionTrace],
        speed: float = DEFAULT_SPEED,
        max_speed: float = MAX_SPEED,
        start_at_end: bool = False,
    ):
        if not traces:
            raise ArgumentError("a debug session needs at least one trace")
        labels = [t.spec.label for t in traces]
        if len(set(labels)) != len(labels):
            raise ArgumentError(f"duplicate trace labels: {labels}")
        self.traces = tuple(traces)
        self._replays = [_Replay(t) for t in traces]
        self._by_label = {t.spec.label: i for i, t in enumerate(traces)}
        self._last_step = max(len(t.events) for t in traces) - 1
        # global lockstep cursor, -1 = before the first event
        self._k = self._last_step if start_at_end else -1
        self.mode = Mode.PAUSED
        self.max_speed = max_speed
        self.speed = self._check_speed(speed)

    def _check_speed(self, speed: float) -> float:
        if not speed > 0:
            raise ArgumentError("speed must be positive")
        if speed > self.max_speed:
            raise ArgumentError(f"speed {speed} exceeds maximum {self.max_speed}")
        return speed

    @property
    def cursors(self) -> tuple[int, ...]:
        return tuple(min(self._k, len(t.events) - 1) for t in self.traces)

    @property
    def at_start(self) -> bool:
        return self._k <= -1

    @property
    def at_end(self) -> bool:
        return self._k >= self._last_step

    def materialize(self) -> VisualState:
        cursors = self.cursors
        return VisualState(
            tuple(r.visual(c) for r, c in zip(self._replays, cursors)), cursors
        )

    def step_forward(self) -> tuple[bool, VisualState]:
        """Advance one step. Returns (moved, state); moved=False is the
        boundary no-op signal, not an error."""
        if self.mode != Mode.PAUSED:
            raise StateError("stepping requires the session to be paused")
        if self.at_end:
            return False, self.materialize()
        self._k += 1
        return True, self.materialize()

    def step_back(self) -> tuple[bool, VisualState]:
        if self.mode != Mode.PAUSED:
            raise StateError("stepping requires the session to be paused")
        if self.at_start:
            return False, self.materialize()
        self._k -= 1
        return True, self.materialize()

    def set_mode(self, mode: Mode) -> Mode:
        """Playing with everything at the end snaps straight back to paused."""
        if mode == Mode.PLAYING and self.at_end:
            self.mode = Mode.PAUSED
        else:
            self.mode = mode
        return self.mode

    def set_speed(self, speed: float) -> float:
        self.speed = self._check_speed(speed)
        return self.speed

    def tick(self) -> tuple[bool, VisualState | None]:
        """One playback heartbeat; no-op unless playing. Pauses at the end."""
        if self.mode != Mode.PLAYING:
            return False, None
        if self.at_end:
            self.mode = Mode.PAUSED
            return False, None
        self._k += 1
        if self.at_end:
            self.mode = Mode.PAUSED
        return True, self.materialize()

    def inspect(self, label: str) -> InspectRecord:
        if label not in self._by_label:
            raise ArgumentError(f"unknown trace label {label!r}")
        idx = self._by_label[label]
        cursor = min(self._k, len(self.traces[idx].events) - 1)
        if cursor < 0:
            raise StateError("nothing to inspect before the first step")
        e = self.traces[idx].events[cursor]
        return InspectRecord(e.g_cost, e.h_value, e.kind, e.visited_count)
