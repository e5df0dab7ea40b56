"""Session engine and transports.

The :class:`Engine` is fully synchronous and transport-agnostic: one
call turns one command message into an ordered list of event dicts,
which is what makes golden-file protocol tests possible. Transports
(TCP with newline-delimited JSON, or a WebSocket ASGI app for browsers)
only frame messages, serialize access per session, and drive playback
ticks while a debug session is in playing mode -- ticks enter the same
per-session execution path as user commands, so they can never
interleave mid-step.
"""

from __future__ import annotations

import asyncio
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import protocol
from .algorithms import AlgorithmKind, AlgorithmSpec, ExecutionTrace, run_parallel
from .challenges import (
    Challenge,
    ChallengeKind,
    SessionView,
    TelemetryStore,
    evaluate,
    load_challenges,
    record_attempt,
)
from .content import Book, grade_quiz, load_books
from .debugger import DebugSession, Mode
from .errors import (
    ArgumentError,
    EngineError,
    ProtocolError,
    StateError,
)
from .graph import (
    DEFAULT_TABLE,
    GridNode,
    Heuristic,
    WeightTable,
    load_weight_table,
    node_at,
)
from .protocol import event, payload_field
from .skygraph import Puzzle, SkyGraph, check_solution, edit, generate_puzzle
from .terrain import (
    BlockRegistry,
    DEFAULT_REGISTRY,
    TerrainSnapshot,
    WorldModel,
    load_map,
    save_map,
)

DEFAULT_BATCH_SIZE = 32
DEFAULT_PLAYBACK_SPEED = 4.0


@dataclass
class Session:
    id: str
    table: WeightTable
    table_id: str = "default"
    world: WorldModel | None = None
    map_id: str | None = None
    snapshot: TerrainSnapshot | None = None
    endpoints: dict[str, tuple[int, int]] = field(default_factory=dict)
    traces: dict[str, ExecutionTrace] = field(default_factory=dict)
    run_world_version: int | None = None
    run_endpoints: tuple[GridNode, GridNode] | None = None
    debug: DebugSession | None = None
    challenge: Challenge | None = None
    prediction: tuple[int, int] | None = None
    puzzle: Puzzle | None = None
    sky_graph: SkyGraph | None = None
    sky_edits: int = 0
    gates: set[str] = field(default_factory=set)

    def clear_run(self):
        self.traces = {}
        self.run_world_version = None
        self.run_endpoints = None
        self.debug = None

    def view(self) -> SessionView:
        return SessionView(
            world_version=self.world.version if self.world else 0,
            run_world_version=self.run_world_version,
            traces=self.traces,
            snapshot=self.snapshot,
            table=self.table,
            endpoints=self.run_endpoints,
            passed_gates=frozenset(self.gates),
            prediction=self.prediction,
            puzzle=self.puzzle,
            sky_graph=self.sky_graph,
            sky_edits=self.sky_edits,
        )


class Engine:
    """Executes protocol commands against per-session state.

    ``execute`` returns ``(bound_session_id, events)``; the bound id only
    changes on create_session / attach_session.
    """

    def __init__(
        self,
        data_dir: str | Path | None = None,
        registry: BlockRegistry = DEFAULT_REGISTRY,
        batch_size: int = DEFAULT_BATCH_SIZE,
        default_speed: float = DEFAULT_PLAYBACK_SPEED,
    ):
        self.registry = registry
        self.batch_size = batch_size
        self.default_speed = default_speed
        self.data_dir = Path(data_dir) if data_dir else None
        self.sessions: dict[str, Session] = {}
        self._next_session = 1

        self.maps: dict[str, str] = {}
        self.tables: dict[str, WeightTable] = {"default": DEFAULT_TABLE}
        self.books: dict[str, Book] = {}
        self.challenges: dict[str, Challenge] = {}
        telemetry_path = None
        self._gates_path = None
        if self.data_dir:
            maps_dir = self.data_dir / "maps"
            if maps_dir.is_dir():
                for p in sorted(maps_dir.glob("*.map")):
                    self.maps[p.stem] = p.read_text()
            weights_dir = self.data_dir / "weights"
            if weights_dir.is_dir():
                for p in sorted(weights_dir.glob("*.weights")):
                    self.tables[p.stem] = load_weight_table(p.read_text(), registry)
            books_dir = self.data_dir / "books"
            if books_dir.is_dir():
                self.books = load_books(books_dir)
            challenges_dir = self.data_dir / "challenges"
            if challenges_dir.is_dir():
                self.challenges = load_challenges(challenges_dir)
            telemetry_path = self.data_dir / "attempts.ndjson"
            self._gates_path = self.data_dir / "gates.json"
        self.telemetry = TelemetryStore(telemetry_path)
        self._persisted_gates: dict[str, list[str]] = {}
        if self._gates_path and self._gates_path.exists():
            self._persisted_gates = json.loads(self._gates_path.read_text())

    # -- plumbing ----------------------------------------------------------

    def execute(self, sid: str | None, message: str | dict) -> tuple[str | None, list[dict]]:
        try:
            if isinstance(message, str):
                msg_type, seq, payload = protocol.parse_message(message)
            else:
                msg_type, seq, payload = protocol.parse_message(json.dumps(message))
        except ProtocolError as exc:
            return sid, [self._error(0, exc)]

        try:
            if msg_type == "create_session":
                return self._create_session(seq)
            if msg_type == "attach_session":
                return self._attach_session(seq, payload)
            if msg_type not in protocol.COMMAND_TYPES:
                raise ProtocolError(f"unknown command type {msg_type!r}")
            if sid is None or sid not in self.sessions:
                err = ProtocolError("no session; send create_session or attach_session")
                err.code = "unknown_session"
                raise err
            session = self.sessions[sid]
            handler = getattr(self, f"_cmd_{msg_type}")
            return sid, handler(session, seq, payload)
        except EngineError as exc:
            return sid, [self._error(seq, exc)]
        except (KeyError, TypeError, ValueError) as exc:
            bad = ProtocolError(f"malformed payload for {msg_type!r}: {exc}")
            return sid, [self._error(seq, bad)]

    @staticmethod
    def _error(seq: int, exc: EngineError) -> dict:
        return event("error", seq, {"code": exc.code, "message": exc.message})

    def _create_session(self, seq: int) -> tuple[str, list[dict]]:
        sid = f"s{self._next_session}"
        self._next_session += 1
        session = Session(sid, table=self.tables["default"])
        session.gates = set(self._persisted_gates.get(sid, []))
        self.sessions[sid] = session
        return sid, [
            event("ack", seq, {"command": "create_session"}),
            event("session_created", seq, {"session_id": sid}),
        ]

    def _attach_session(self, seq: int, payload: dict) -> tuple[str, list[dict]]:
        sid = payload_field(payload, "session_id", str)
        if sid not in self.sessions:
            err = ProtocolError(f"unknown session {sid!r}")
            err.code = "unknown_session"
            raise err
        events = [event("ack", seq, {"command": "attach_session"})]
        events += self._full_state_events(self.sessions[sid], seq)
        return sid, events

    def _save_gates(self):
        if self._gates_path is None:
            return
        data = {sid: sorted(s.gates) for sid, s in self.sessions.items() if s.gates}
        merged = dict(self._persisted_gates)
        merged.update(data)
        self._gates_path.parent.mkdir(parents=True, exist_ok=True)
        self._gates_path.write_text(json.dumps(merged, indent=2, sort_keys=True))

    # -- shared event builders ----------------------------------------------

    def _terrain_event(self, session: Session, seq: int) -> dict:
        snap = session.world.scan_surface()
        session.snapshot = snap
        return event(
            "terrain",
            seq,
            protocol.snapshot_json(snap, session.world.version, session.map_id),
        )

    def _visual_event(self, session: Session, seq: int) -> dict:
        state = session.debug.materialize()
        return event(
            "visual_state", seq, protocol.visual_state_json(state, session.debug.mode.value)
        )

    def _full_state_events(self, session: Session, seq: int) -> list[dict]:
        payload = {
            "session_id": session.id,
            "map_id": session.map_id,
            "table_id": session.table_id,
            "endpoints": {k: list(v) for k, v in sorted(session.endpoints.items())},
            "gates": sorted(session.gates),
            "challenge": session.challenge.id if session.challenge else None,
            "run_labels": sorted(session.traces),
            "terrain": (
                protocol.snapshot_json(
                    session.snapshot, session.world.version, session.map_id
                )
                if session.world is not None and session.snapshot is not None
                else None
            ),
            "visual": (
                protocol.visual_state_json(
                    session.debug.materialize(), session.debug.mode.value
                )
                if session.debug
                else None
            ),
            "puzzle": (
                protocol.puzzle_json(session.puzzle, session.sky_graph, session.sky_edits)
                if session.puzzle
                else None
            ),
        }
        return [event("full_state", seq, payload)]

    @staticmethod
    def _require_world(session: Session) -> WorldModel:
        if session.world is None:
            raise StateError("no map loaded; send new_map or load_map first")
        return session.world

    @staticmethod
    def _require_debug(session: Session) -> DebugSession:
        if session.debug is None:
            raise StateError("no active run to control")
        return session.debug

    # -- commands ------------------------------------------------------------

    def _cmd_get_state(self, session, seq, payload):
        return [event("ack", seq, {"command": "get_state"})] + self._full_state_events(
            session, seq
        )

    def _cmd_list_maps(self, session, seq, payload):
        return [
            event("ack", seq, {"command": "list_maps"}),
            event("map_list", seq, {"maps": sorted(self.maps)}),
        ]

    def _cmd_new_map(self, session, seq, payload):
        width = int(payload_field(payload, "width", int))
        depth = int(payload_field(payload, "depth", int))
        block = payload.get("block", "dirt")
        height = int(payload.get("height", 1))
        session.world = WorldModel.flat(width, depth, block, height, self.registry)
        session.map_id = payload.get("map_id")
        session.endpoints = {}
        session.clear_run()
        return [event("ack", seq, {"command": "new_map"}), self._terrain_event(session, seq)]

    def _cmd_load_map(self, session, seq, payload):
        map_id = payload_field(payload, "map_id", str)
        if map_id not in self.maps:
            raise ArgumentError(f"unknown map {map_id!r}")
        session.world = load_map(self.maps[map_id], self.registry)
        session.map_id = map_id
        session.endpoints = {}
        session.clear_run()
        return [event("ack", seq, {"command": "load_map"}), self._terrain_event(session, seq)]

    def _cmd_save_map(self, session, seq, payload):
        world = self._require_world(session)
        map_id = payload.get("map_id") or session.map_id
        if not map_id:
            raise ArgumentError("no map id to save under")
        text = save_map(world)
        self.maps[map_id] = text
        session.map_id = map_id
        if self.data_dir:
            maps_dir = self.data_dir / "maps"
            maps_dir.mkdir(parents=True, exist_ok=True)
            (maps_dir / f"{map_id}.map").write_text(text)
        return [event("ack", seq, {"command": "save_map", "map_id": map_id})]

    def _cmd_set_block(self, session, seq, payload):
        world = self._require_world(session)
        x = int(payload_field(payload, "x", int))
        z = int(payload_field(payload, "z", int))
        y = int(payload_field(payload, "y", int))
        block = payload_field(payload, "block", str)
        world.set_block((x, z, y), block)
        height, surface = world.surface(x, z)
        events = [
            event("ack", seq, {"command": "set_block"}),
            event(
                "terrain_update",
                seq,
                {
                    "x": x,
                    "z": z,
                    "height": height,
                    "block": surface,
                    "world_version": world.version,
                },
            ),
        ]
        if session.run_world_version is not None and session.run_world_version != world.version:
            events.append(
                event("run_invalidated", seq, {"reason": "terrain changed; re-run required"})
            )
        return events

    def _cmd_set_weights(self, session, seq, payload):
        if "table_id" in payload:
            table_id = payload_field(payload, "table_id", str)
            if table_id not in self.tables:
                raise ArgumentError(f"unknown weight table {table_id!r}")
            session.table = self.tables[table_id]
            session.table_id = table_id
        elif "text" in payload:
            session.table = load_weight_table(payload_field(payload, "text", str), self.registry)
            session.table_id = "inline"
        else:
            raise ProtocolError("set_weights needs 'table_id' or 'text'")
        events = [
            event("ack", seq, {"command": "set_weights"}),
            event("weights_set", seq, {"table_id": session.table_id}),
        ]
        if session.run_world_version is not None:
            session.clear_run()
            events.append(
                event("run_invalidated", seq, {"reason": "weights changed; re-run required"})
            )
        return events

    def _endpoint_events(self, session, seq, which, x, z):
        world = self._require_world(session)
        if not world.bounds.contains(x, z):
            raise ArgumentError(f"endpoint ({x}, {z}) is outside the map")
        session.endpoints[which] = (x, z)
        return [event("endpoint_set", seq, {"which": which, "x": x, "z": z})]

    def _cmd_select_endpoint(self, session, seq, payload):
        which = payload_field(payload, "which", str)
        if which not in ("start", "goal"):
            raise ArgumentError("endpoint must be 'start' or 'goal'")
        x = int(payload_field(payload, "x", int))
        z = int(payload_field(payload, "z", int))
        return [
            event("ack", seq, {"command": "select_endpoint"})
        ] + self._endpoint_events(session, seq, which, x, z)

    def _cmd_submit_endpoints(self, session, seq, payload):
        start = payload_field(payload, "start", list)
        goal = payload_field(payload, "goal", list)
        events = [event("ack", seq, {"command": "submit_endpoints"})]
        events += self._endpoint_events(session, seq, "start", int(start[0]), int(start[1]))
        events += self._endpoint_events(session, seq, "goal", int(goal[0]), int(goal[1]))
        return events

    def _cmd_run(self, session, seq, payload):
        world = self._require_world(session)
        algo_specs = payload_field(payload, "algorithms", list)
        specs = []
        for a in algo_specs:
            specs.append(
                AlgorithmSpec(
                    AlgorithmKind(payload_field(a, "kind", str)),
                    Heuristic(a.get("heuristic", "octile")),
                    a.get("label", ""),
                    a.get("color", ""),
                )
            )
        if "start" in payload:
            start = tuple(int(c) for c in payload["start"])
            session.endpoints["start"] = start
        if "goal" in payload:
            goal = tuple(int(c) for c in payload["goal"])
            session.endpoints["goal"] = goal
        if "start" not in session.endpoints or "goal" not in session.endpoints:
            raise StateError("select both endpoints before running")
        start = session.endpoints["start"]
        goal = session.endpoints["goal"]
        snapshot = world.scan_surface()  # just-in-time capture
        session.snapshot = snapshot
        traces, report = run_parallel(specs, snapshot, session.table, start, goal)
        session.traces = {t.spec.label: t for t in traces}
        session.run_world_version = world.version
        session.run_endpoints = (node_at(snapshot, *start), node_at(snapshot, *goal))
        session.debug = DebugSession(
            list(traces), speed=self.default_speed, start_at_end=True
        )
        events = [
            event("ack", seq, {"command": "run"}),
            event(
                "run_started",
                seq,
                {
                    "labels": [t.spec.label for t in traces],
                    "revision": snapshot.revision,
                    "world_version": world.version,
                    "region": protocol.region_json(traces[0].region),
                },
            ),
        ]
        for trace in traces:
            for lo in range(0, len(trace.events), self.batch_size):
                chunk = trace.events[lo : lo + self.batch_size]
                events.append(
                    event(
                        "trace_events",
                        seq,
                        {
                            "label": trace.spec.label,
                            "events": [protocol.trace_event_json(e) for e in chunk],
                        },
                    )
                )
        events.append(
            event(
                "run_finished",
                seq,
                {"traces": [protocol.trace_summary_json(t) for t in traces]},
            )
        )
        events.append(event("metrics_report", seq, protocol.report_json(report)))
        events.append(self._visual_event(session, seq))
        return events

    # -- debugger --------------------------------------------------------------

    def _cmd_break(self, session, seq, payload):
        debug = self._require_debug(session)
        mode = debug.set_mode(Mode.PAUSED)
        return [
            event("ack", seq, {"command": "break"}),
            event("mode", seq, {"mode": mode.value}),
        ]

    def _cmd_continue(self, session, seq, payload):
        debug = self._require_debug(session)
        mode = debug.set_mode(Mode.PLAYING)
        return [
            event("ack", seq, {"command": "continue"}),
            event("mode", seq, {"mode": mode.value}),
        ]

    def _cmd_step_fwd(self, session, seq, payload):
        debug = self._require_debug(session)
        moved, _state = debug.step_forward()
        if not moved:
            return [
                event("ack", seq, {"command": "step_fwd"}),
                event("noop", seq, {"op": "step_fwd", "reason": "already at the end"}),
            ]
        return [event("ack", seq, {"command": "step_fwd"}), self._visual_event(session, seq)]

    def _cmd_step_back(self, session, seq, payload):
        debug = self._require_debug(session)
        moved, _state = debug.step_back()
        if not moved:
            return [
                event("ack", seq, {"command": "step_back"}),
                event("noop", seq, {"op": "step_back", "reason": "already at the start"}),
            ]
        return [event("ack", seq, {"command": "step_back"}), self._visual_event(session, seq)]

    def _cmd_set_speed(self, session, seq, payload):
        debug = self._require_debug(session)
        speed = debug.set_speed(float(payload_field(payload, "speed", (int, float))))
        return [
            event("ack", seq, {"command": "set_speed"}),
            event("speed_set", seq, {"speed": speed}),
        ]

    def _cmd_inspect(self, session, seq, payload):
        debug = self._require_debug(session)
        label = payload_field(payload, "label", str)
        rec = debug.inspect(label)
        return [
            event("ack", seq, {"command": "inspect"}),
            event(
                "inspection",
                seq,
                {
                    "label": label,
                    "g_cost": protocol.cost_json(rec.g_cost),
                    "h_value": protocol.cost_json(rec.h_value),
                    "status": rec.status.value,
                    "visited_count": rec.visited_count,
                },
            ),
        ]

    def _cmd_tick(self, session, seq, payload):
        """Internal playback heartbeat; silent unless something advanced."""
        debug = session.debug
        if debug is None or debug.mode != Mode.PLAYING:
            return []
        steps = max(1, min(int(payload.get("steps", 1)), self.batch_size))
        advanced = False
        for _ in range(steps):
            moved, _ = debug.tick()
            if not moved:
                break
            advanced = True
        events = []
        if advanced:
            events.append(self._visual_event(session, seq))
        if debug.mode == Mode.PAUSED:
            events.append(event("mode", seq, {"mode": "paused"}))
        return events

    # -- challenges --------------------------------------------------------------

    def _cmd_challenge_list(self, session, seq, payload):
        items = [
            {
                "id": c.id,
                "kind": c.kind.value,
                "prompt": c.prompt,
                "gate": c.gate,
                "map": c.map_ref,
                "points": c.points,
            }
            for c in sorted(self.challenges.values(), key=lambda c: c.id)
        ]
        return [
            event("ack", seq, {"command": "challenge_list"}),
            event("challenge_list", seq, {"challenges": items}),
        ]

    def _cmd_challenge_start(self, session, seq, payload):
        challenge_id = payload_field(payload, "challenge_id", str)
        if challenge_id not in self.challenges:
            raise ArgumentError(f"unknown challenge {challenge_id!r}")
        challenge = self.challenges[challenge_id]
        session.challenge = challenge
        session.prediction = None
        events = [
            event("ack", seq, {"command": "challenge_start"}),
            event(
                "challenge_started",
                seq,
                {
                    "id": challenge.id,
                    "kind": challenge.kind.value,
                    "prompt": challenge.prompt,
                    "gate": challenge.gate,
                    "algorithm": challenge.algorithm.label,
                    "failed_attempts": self.telemetry.failed_attempts(challenge.id),
                },
            ),
        ]
        if challenge.kind == ChallengeKind.SKY_PUZZLE:
            puzzle = generate_puzzle(
                challenge.params["puzzle_kind"],
                int(challenge.params["size"]),
                int(challenge.params["seed"]),
            )
            session.puzzle = puzzle
            session.sky_graph = puzzle.initial
            session.sky_edits = 0
            events.append(
                event(
                    "puzzle_state",
                    seq,
                    protocol.puzzle_json(puzzle, puzzle.initial, 0),
                )
            )
        elif challenge.map_ref in self.maps:
            session.world = load_map(self.maps[challenge.map_ref], self.registry)
            session.map_id = challenge.map_ref
            session.endpoints = {}
            session.clear_run()
            events.append(self._terrain_event(session, seq))
        return events

    def _cmd_submit_prediction(self, session, seq, payload):
        x = int(payload_field(payload, "x", int))
        z = int(payload_field(payload, "z", int))
        session.prediction = (x, z)
        return [event("ack", seq, {"command": "submit_prediction"})]

    def _cmd_challenge_evaluate(self, session, seq, payload):
        if session.challenge is None:
            raise StateError("no active challenge")
        challenge = session.challenge
        verdict = evaluate(challenge, session.view())
        events = [event("ack", seq, {"command": "challenge_evaluate"})]
        io_error = None
        try:
            record_attempt(self.telemetry, challenge, verdict, session.view())
        except OSError as exc:  # verdict still reaches the student
            io_error = exc
        events.append(
            event(
                "verdict",
                seq,
                {
                    "challenge": challenge.id,
                    "passed": verdict.passed,
                    "reason": verdict.reason,
                    "points": challenge.points if verdict.passed else 0,
                    "failed_attempts": self.telemetry.failed_attempts(challenge.id),
                    "solved": self.telemetry.solved(challenge.id),
                },
            )
        )
        if io_error is not None:
            events.append(
                event(
                    "error",
                    seq,
                    {"code": "io_error", "message": f"attempt log write failed: {io_error}"},
                )
            )
        return events

    # -- sky graphs ----------------------------------------------------------------

    def _cmd_load_puzzle(self, session, seq, payload):
        kind = payload_field(payload, "kind", str)
        size = int(payload_field(payload, "size", int))
        seed = int(payload_field(payload, "seed", int))
        puzzle = generate_puzzle(kind, size, seed)
        session.puzzle = puzzle
        session.sky_graph = puzzle.initial
        session.sky_edits = 0
        return [
            event("ack", seq, {"command": "load_puzzle"}),
            event("puzzle_state", seq, protocol.puzzle_json(puzzle, puzzle.initial, 0)),
        ]

    def _cmd_sky_edit(self, session, seq, payload):
        if session.sky_graph is None:
            raise StateError("no active sky graph; load a puzzle first")
        action = payload_field(payload, "action", str)
        session.sky_graph = edit(session.sky_graph, action, payload)
        session.sky_edits += 1
        return [
            event("ack", seq, {"command": "sky_edit"}),
            event(
                "sky_state",
                seq,
                {
                    "graph": protocol.graph_json(session.sky_graph),
                    "edits": session.sky_edits,
                },
            ),
        ]

    def _cmd_sky_check(self, session, seq, payload):
        if session.puzzle is None or session.sky_graph is None:
            raise StateError("no active puzzle to check")
        verdict = check_solution(session.puzzle, session.sky_graph, session.sky_edits)
        return [
            event("ack", seq, {"command": "sky_check"}),
            event(
                "sky_verdict",
                seq,
                {"status": verdict.status.value, "reason": verdict.reason},
            ),
        ]

    # -- books -----------------------------------------------------------------------

    def _cmd_list_books(self, session, seq, payload):
        items = [
            {"id": b.id, "title": b.title, "quiz_items": len(b.quiz)}
            for b in sorted(self.books.values(), key=lambda b: b.id)
        ]
        return [
            event("ack", seq, {"command": "list_books"}),
            event("book_list", seq, {"books": items}),
        ]

    def _cmd_open_book(self, session, seq, payload):
        book_id = payload_field(payload, "book_id", str)
        if book_id not in self.books:
            raise ArgumentError(f"unknown book {book_id!r}")
        book = self.books[book_id]
        return [
            event("ack", seq, {"command": "open_book"}),
            event(
                "book",
                seq,
                {
                    "id": book.id,
                    "title": book.title,
                    "pages": list(book.pages),
                    "quiz": [
                        {"question": q.question, "options": list(q.options)}
                        for q in book.quiz
                    ],
                },
            ),
        ]

    def _cmd_submit_answers(self, session, seq, payload):
        book_id = payload_field(payload, "book_id", str)
        answers = payload_field(payload, "answers", list)
        if book_id not in self.books:
            raise ArgumentError(f"unknown book {book_id!r}")
        book = self.books[book_id]
        result = grade_quiz(book, [int(a) for a in answers])
        if result.gate_passed:
            session.gates.add(book_id)
            self._save_gates()
        return [
            event("ack", seq, {"command": "submit_answers"}),
            event(
                "quiz_result",
                seq,
                {
                    "book_id": book_id,
                    "score": result.score,
                    "per_item": list(result.per_item),
                    "gate_passed": result.gate_passed,
                    "explanations": [q.explanation for q in book.quiz],
                },
            ),
        ]


# ---------------------------------------------------------------------------
# Transports
# ---------------------------------------------------------------------------


class _SessionLocks:
    def __init__(self):
        self._locks: dict[str, asyncio.Lock] = {}

    def get(self, sid: str | None) -> asyncio.Lock:
        key = sid or "__unbound__"
        if key not in self._locks:
            self._locks[key] = asyncio.Lock()
        return self._locks[key]


class _Channel:
    """One client connection: command execution plus the playback driver."""

    def __init__(self, engine: Engine, locks: _SessionLocks, send):
        self.engine = engine
        self.locks = locks
        self.send = send  # async callable(list[dict])
        self.sid: str | None = None
        self._playback: asyncio.Task | None = None

    async def handle_line(self, line: str) -> None:
        async with self.locks.get(self.sid):
            self.sid, events = self.engine.execute(self.sid, line)
        await self.send(events)
        self._manage_playback(events)

    def _manage_playback(self, events: list[dict]) -> None:
        session = self.engine.sessions.get(self.sid) if self.sid else None
        playing = (
            session is not None
            and session.debug is not None
            and session.debug.mode == Mode.PLAYING
        )
        if playing and (self._playback is None or self._playback.done()):
            seq = events[-1]["seq"] if events else 0
            self._playback = asyncio.create_task(self._playback_loop(seq))

    async def _playback_loop(self, seq: int) -> None:
        while True:
            session = self.engine.sessions.get(self.sid) if self.sid else None
            if session is None or session.debug is None:
                return
            debug = session.debug
            if debug.mode != Mode.PLAYING:
                return
            # batch steps so high speeds do not flood the wire
            interval = max(1.0 / debug.speed, 0.05)
            steps = max(1, min(round(debug.speed * interval), self.engine.batch_size))
            await asyncio.sleep(interval)
            async with self.locks.get(self.sid):
                _, events = self.engine.execute(
                    self.sid, {"type": "tick", "seq": seq, "payload": {"steps": steps}}
                )
            if events:
                await self.send(events)

    def close(self) -> None:
        if self._playback is not None:
            self._playback.cancel()


async def serve_tcp(engine: Engine, host: str = "127.0.0.1", port: int = 45801):
    """Newline-delimited JSON over TCP."""
    locks = _SessionLocks()

    async def on_connection(reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        write_lock = asyncio.Lock()

        async def send(events: list[dict]) -> None:
            async with write_lock:
                for e in events:
                    writer.write((protocol.encode(e) + "\n").encode())
                await writer.drain()

        channel = _Channel(engine, locks, send)
        try:
            while True:
                line = await reader.readline()
                if not line:
                    break
                text = line.decode().strip()
                if text:
                    await channel.handle_line(text)
        except (ConnectionResetError, asyncio.IncompleteReadError):
            pass
        finally:
            channel.close()
            writer.close()

    return await asyncio.start_server(on_connection, host, port)


def websocket_app(engine: Engine):
    """Raw ASGI app: each WebSocket text frame is one protocol message."""
    locks = _SessionLocks()

    async def app(scope, receive, send):
        if scope["type"] != "websocket":
            raise RuntimeError("this app only speaks websocket")
        await receive()  # websocket.connect
        await send({"type": "websocket.accept"})

        async def send_events(events: list[dict]) -> None:
            for e in events:
                await send({"type": "websocket.send", "text": protocol.encode(e)})

        channel = _Channel(engine, locks, send_events)
        try:
            while True:
                message = await receive()
                if message["type"] == "websocket.disconnect":
                    break
                text = message.get("text")
                if text:
                    await channel.handle_line(text)
        finally:
            channel.close()

    return app
