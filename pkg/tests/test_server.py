import asyncio
import json
import time
from pathlib import Path

import pytest

from pathlab import protocol
from pathlab.server import Engine, serve_tcp, websocket_app

GOLDEN_DIR = Path(__file__).parent / "golden"

BOOK = """\
id: tiny
title: Tiny Lesson

[page]
One page is enough here.

[quiz]
question: Pick the first option.
option: this one
option: not this
correct: 0
explanation: It said so.
"""

CHALLENGE = {
    "id": "walk",
    "kind": "min_steps",
    "map": "arena",
    "algorithm": {"kind": "dijkstra"},
    "gate": "tiny",
    "params": {"n": 2},
    "prompt": "Take at least two steps.",
}


def send(engine, sid, msg_type, payload=None, seq=1):
    sid, events = engine.execute(sid, {"type": msg_type, "seq": seq, "payload": payload or {}})
    return sid, events


def types(events):
    return [e["type"] for e in events]


def fresh_session(engine):
    sid, events = send(engine, None, "create_session")
    assert types(events) == ["ack", "session_created"]
    return sid


def data_dir(tmp_path):
    root = tmp_path / "data"
    (root / "books").mkdir(parents=True)
    (root / "books" / "tiny.book").write_text(BOOK)
    (root / "challenges").mkdir()
    (root / "challenges" / "walk.json").write_text(json.dumps(CHALLENGE))
    (root / "maps").mkdir()
    return root


def setup_arena(engine, sid):
    _, events = send(engine, sid, "new_map", {"width": 6, "depth": 6, "map_id": "arena"})
    assert types(events) == ["ack", "terrain"]
    send(engine, sid, "save_map", {"map_id": "arena"})
    return events[1]


# -- sessions ----------------------------------------------------------------


def test_create_and_attach_session():
    engine = Engine()
    sid = fresh_session(engine)
    assert sid == "s1"
    sid2, events = send(engine, None, "attach_session", {"session_id": sid})
    assert sid2 == sid
    assert types(events) == ["ack", "full_state"]
    _, events = send(engine, None, "attach_session", {"session_id": "nope"})
    assert types(events) == ["error"]
    assert events[0]["payload"]["code"] == "unknown_session"


def test_commands_require_a_session():
    engine = Engine()
    _, events = send(engine, None, "list_maps")
    assert events[0]["payload"]["code"] == "unknown_session"


def test_unknown_command_type():
    engine = Engine()
    sid = fresh_session(engine)
    _, events = send(engine, sid, "frobnicate")
    assert events[0]["payload"]["code"] == "bad_message"


def test_malformed_line_is_a_protocol_error():
    engine = Engine()
    sid, events = engine.execute(None, "this is not json")
    assert types(events) == ["error"]
    assert events[0]["payload"]["code"] == "bad_message"


def test_sessions_are_isolated():
    engine = Engine()
    a = fresh_session(engine)
    b = fresh_session(engine)
    setup_arena(engine, a)
    _, events = send(engine, b, "set_block", {"x": 0, "z": 0, "y": 0, "block": "stone"})
    assert events[0]["payload"]["code"] == "bad_state"  # b has no map
    world_a = engine.sessions[a].world
    send(engine, a, "set_block", {"x": 0, "z": 0, "y": 1, "block": "stone"})
    assert engine.sessions[b].world is None
    assert world_a.version == 1


# -- terrain and endpoints -----------------------------------------------------


def test_terrain_event_shape():
    engine = Engine()
    sid = fresh_session(engine)
    terrain = setup_arena(engine, sid)
    payload = terrain["payload"]
    assert payload["bounds"] == {"min_x": 0, "min_z": 0, "width": 6, "depth": 6}
    assert len(payload["heights"]) == 6
    assert payload["blocks"][0][0] == "dirt"
    assert payload["map_id"] == "arena"


def test_set_block_emits_diff_and_invalidation():
    engine = Engine()
    sid = fresh_session(engine)
    setup_arena(engine, sid)
    _, events = send(engine, sid, "set_block", {"x": 2, "z": 3, "y": 1, "block": "water"})
    assert types(events) == ["ack", "terrain_update"]
    assert events[1]["payload"] == {
        "x": 2, "z": 3, "height": 2, "block": "water", "world_version": 1,
    }
    send(engine, sid, "submit_endpoints", {"start": [0, 0], "goal": [5, 5]})
    _, events = send(engine, sid, "run", {"algorithms": [{"kind": "dijkstra"}]})
    assert "run_finished" in types(events)
    _, events = send(engine, sid, "set_block", {"x": 1, "z": 1, "y": 1, "block": "stone"})
    assert types(events) == ["ack", "terrain_update", "run_invalidated"]


def test_endpoint_bounds_checked():
    engine = Engine()
    sid = fresh_session(engine)
    setup_arena(engine, sid)
    _, events = send(engine, sid, "select_endpoint", {"which": "start", "x": 99, "z": 0})
    assert events[0]["payload"]["code"] == "bad_argument"


# -- runs and the debugger ------------------------------------------------------


def run_arena(engine, sid, algos=({"kind": "dijkstra"},)):
    send(engine, sid, "submit_endpoints", {"start": [0, 0], "goal": [5, 5]})
    _, events = send(engine, sid, "run", {"algorithms": list(algos)})
    return events


def test_run_event_stream_order_and_batching():
    engine = Engine(batch_size=8)
    sid = fresh_session(engine)
    setup_arena(engine, sid)
    events = run_arena(engine, sid, ({"kind": "dijkstra"}, {"kind": "astar"}))
    ts = types(events)
    assert ts[0] == "ack"
    assert ts[1] == "run_started"
    assert ts[-1] == "visual_state"
    assert ts[-2] == "metrics_report"
    assert ts[-3] == "run_finished"
    batches = [e for e in events if e["type"] == "trace_events"]
    assert batches, "expected step event batches"
    assert all(len(b["payload"]["events"]) <= 8 for b in batches)
    labels = {b["payload"]["label"] for b in batches}
    assert labels == {"dijkstra", "astar"}
    # all step events arrive and reassemble in order per label
    for label in labels:
        steps = [
            e["step"]
            for b in batches
            if b["payload"]["label"] == label
            for e in b["payload"]["events"]
        ]
        assert steps == list(range(len(steps)))


def test_metrics_report_has_ratios_and_no_wall_time():
    engine = Engine()
    sid = fresh_session(engine)
    setup_arena(engine, sid)
    events = run_arena(engine, sid, ({"kind": "dijkstra"}, {"kind": "astar"}))
    report = next(e for e in events if e["type"] == "metrics_report")["payload"]
    assert ["astar", "dijkstra", pytest.approx(report["visited_ratios"][0][2])] == report["visited_ratios"][0]
    assert "wall_time" not in json.dumps(events)


def test_step_fwd_without_run_is_a_state_error():
    engine = Engine()
    sid = fresh_session(engine)
    _, events = send(engine, sid, "step_fwd")
    assert events[0]["payload"]["code"] == "bad_state"


def test_stepping_and_noop_signals():
    engine = Engine()
    sid = fresh_session(engine)
    setup_arena(engine, sid)
    run_arena(engine, sid)
    # run leaves the cursor at the end: forward is a noop, back works
    _, events = send(engine, sid, "step_fwd")
    assert types(events) == ["ack", "noop"]
    _, events = send(engine, sid, "step_back")
    assert types(events) == ["ack", "visual_state"]
    _, events = send(engine, sid, "inspect", {"label": "dijkstra"})
    assert types(events) == ["ack", "inspection"]
    assert events[1]["payload"]["visited_count"] > 0


def test_pause_stops_tick_events_in_queue_order():
    engine = Engine()
    sid = fresh_session(engine)
    setup_arena(engine, sid)
    run_arena(engine, sid)
    send(engine, sid, "step_back", seq=2)  # rewind so playback has room
    send(engine, sid, "step_back", seq=3)
    _, events = send(engine, sid, "continue", seq=4)
    assert types(events) == ["ack", "mode"]
    assert events[1]["payload"]["mode"] == "playing"
    _, tick1 = send(engine, sid, "tick", {"steps": 1}, seq=4)
    assert types(tick1) == ["visual_state"]
    _, events = send(engine, sid, "break", seq=5)
    assert events[1]["payload"]["mode"] == "paused"
    _, tick2 = send(engine, sid, "tick", {"steps": 1}, seq=5)
    assert tick2 == []  # no events after the pause acknowledgment


def test_playback_pauses_itself_at_the_end():
    engine = Engine()
    sid = fresh_session(engine)
    setup_arena(engine, sid)
    run_arena(engine, sid)
    send(engine, sid, "step_back")
    send(engine, sid, "continue")
    _, events = send(engine, sid, "tick", {"steps": 5})
    assert types(events) == ["visual_state", "mode"]
    assert events[-1]["payload"]["mode"] == "paused"


def test_set_speed_limits():
    engine = Engine()
    sid = fresh_session(engine)
    setup_arena(engine, sid)
    run_arena(engine, sid)
    _, events = send(engine, sid, "set_speed", {"speed": 2.5})
    assert types(events) == ["ack", "speed_set"]
    _, events = send(engine, sid, "set_speed", {"speed": 0})
    assert events[0]["payload"]["code"] == "bad_argument"


# -- challenges, quizzes, puzzles -------------------------------------------------


def test_challenge_flow_with_gate_and_staleness(tmp_path):
    engine = Engine(data_dir=data_dir(tmp_path))
    sid = fresh_session(engine)
    setup_arena(engine, sid)

    _, events = send(engine, sid, "challenge_start", {"challenge_id": "walk"})
    assert types(events) == ["ack", "challenge_started", "terrain"]

    # gate is closed until the quiz is passed
    run_arena(engine, sid)
    _, events = send(engine, sid, "challenge_evaluate")
    assert events[0]["payload"]["code"] == "gate_locked"

    _, events = send(engine, sid, "submit_answers", {"book_id": "tiny", "answers": [0]})
    assert events[1]["payload"]["gate_passed"] is True

    _, events = send(engine, sid, "challenge_evaluate")
    verdict = events[1]["payload"]
    assert events[1]["type"] == "verdict"
    assert verdict["passed"] is True

    # editing terrain flips evaluation into staleness until a re-run
    send(engine, sid, "set_block", {"x": 0, "z": 1, "y": 1, "block": "stone"})
    _, events = send(engine, sid, "challenge_evaluate")
    assert events[0]["payload"]["code"] == "stale_run"
    run_arena(engine, sid)
    _, events = send(engine, sid, "challenge_evaluate")
    assert events[1]["payload"]["passed"] is True
    assert engine.telemetry.failed_attempts("walk") == 0
    assert engine.telemetry.solved("walk")


def test_gates_persist_across_engine_restart(tmp_path):
    root = data_dir(tmp_path)
    engine = Engine(data_dir=root)
    sid = fresh_session(engine)
    send(engine, sid, "submit_answers", {"book_id": "tiny", "answers": [0]})
    assert (root / "gates.json").exists()

    reborn = Engine(data_dir=root)
    sid2 = fresh_session(reborn)
    assert sid2 == sid  # deterministic ids make resume work
    assert reborn.sessions[sid2].gates == {"tiny"}


def test_list_books(tmp_path):
    engine = Engine(data_dir=data_dir(tmp_path))
    sid = fresh_session(engine)
    _, events = send(engine, sid, "list_books")
    assert types(events) == ["ack", "book_list"]
    assert events[1]["payload"]["books"] == [
        {"id": "tiny", "title": "Tiny Lesson", "quiz_items": 1}
    ]


def test_open_book_never_leaks_answers(tmp_path):
    engine = Engine(data_dir=data_dir(tmp_path))
    sid = fresh_session(engine)
    _, events = send(engine, sid, "open_book", {"book_id": "tiny"})
    payload = events[1]["payload"]
    assert payload["title"] == "Tiny Lesson"
    assert "correct" not in json.dumps(payload)
    assert "explanation" not in json.dumps(payload)


def test_sky_puzzle_flow():
    engine = Engine()
    sid = fresh_session(engine)
    _, events = send(engine, sid, "load_puzzle", {"kind": "cycle_breaker", "size": 3, "seed": 1})
    assert types(events) == ["ack", "puzzle_state"]
    graph = events[1]["payload"]["graph"]
    assert len(graph["edges"]) == 3
    assert "witness" not in json.dumps(events)
    _, events = send(engine, sid, "sky_check")
    assert events[1]["payload"]["status"] == "not_solved"
    a, b = graph["edges"][0]
    _, events = send(engine, sid, "sky_edit", {"action": "remove_edge", "from": a, "to": b})
    assert types(events) == ["ack", "sky_state"]
    assert events[1]["payload"]["edits"] == 1
    _, events = send(engine, sid, "sky_check")
    assert events[1]["payload"]["status"] == "solved"


def test_sky_edit_constraint_errors_pass_through():
    engine = Engine()
    sid = fresh_session(engine)
    send(engine, sid, "load_puzzle", {"kind": "cycle_breaker", "size": 3, "seed": 1})
    _, events = send(engine, sid, "sky_edit", {"action": "add_edge", "from": "n0", "to": "n1"})
    assert events[0]["payload"]["code"] == "constraint_violation"


def test_weights_swap_invalidates_run():
    engine = Engine()
    sid = fresh_session(engine)
    setup_arena(engine, sid)
    run_arena(engine, sid)
    _, events = send(engine, sid, "set_weights", {"text": "default_cost 2.0\n"})
    assert types(events) == ["ack", "weights_set", "run_invalidated"]
    _, events = send(engine, sid, "step_fwd")
    assert events[0]["payload"]["code"] == "bad_state"


# -- determinism golden ------------------------------------------------------------


def scripted_session(engine) -> str:
    log = []
    sid = None
    script = [
        ("create_session", {}),
        ("new_map", {"width": 12, "depth": 12, "map_id": "golden"}),
        ("set_block", {"x": 4, "z": 4, "y": 1, "block": "water"}),
        ("set_block", {"x": 4, "z": 5, "y": 1, "block": "water"}),
        ("submit_endpoints", {"start": [0, 0], "goal": [11, 11]}),
        ("run", {"algorithms": [{"kind": "dijkstra"}, {"kind": "astar"}]}),
        ("step_back", {}),
        ("step_back", {}),
        ("inspect", {"label": "astar"}),
        ("step_fwd", {}),
        ("load_puzzle", {"kind": "cycle_breaker", "size": 5, "seed": 99}),
        ("sky_check", {}),
        ("get_state", {}),
    ]
    for seq, (msg_type, payload) in enumerate(script, start=1):
        sid, events = send(engine, sid, msg_type, payload, seq=seq)
        log.extend(events)
    return protocol.dump_events(log)


def test_event_log_is_deterministic_and_matches_golden():
    first = scripted_session(Engine())
    second = scripted_session(Engine())
    assert first == second
    golden = (GOLDEN_DIR / "session_events.ndjson").read_text()
    assert first == golden


def test_every_event_round_trips_and_is_documented():
    engine = Engine()
    text = scripted_session(engine)
    for line in text.splitlines():
        ev = json.loads(line)
        assert ev["type"] in protocol.EVENT_TYPES
        assert json.loads(protocol.encode(ev)) == ev


# -- transports --------------------------------------------------------------------


async def _tcp_exchange():
    engine = Engine()
    server = await serve_tcp(engine, "127.0.0.1", 0)
    port = server.sockets[0].getsockname()[1]
    reader, writer = await asyncio.open_connection("127.0.0.1", port)

    async def rpc(msg_type, payload=None, seq=1, expect=1):
        writer.write(
            (protocol.encode({"type": msg_type, "seq": seq, "payload": payload or {}}) + "\n").encode()
        )
        await writer.drain()
        out = []
        for _ in range(expect):
            out.append(json.loads(await asyncio.wait_for(reader.readline(), 5)))
        return out

    events = await rpc("create_session", expect=2)
    assert events[1]["type"] == "session_created"
    await rpc("new_map", {"width": 8, "depth": 8}, expect=2)
    await rpc("submit_endpoints", {"start": [0, 0], "goal": [7, 7]}, expect=3)
    events = await rpc("run", {"algorithms": [{"kind": "astar"}]}, expect=2)
    assert events[1]["type"] == "run_started"
    # drain the remaining run events until visual_state
    while True:
        ev = json.loads(await asyncio.wait_for(reader.readline(), 5))
        if ev["type"] == "visual_state":
            break

    # rewind, then play at speed 20 and watch ticks arrive on their own
    for _ in range(30):
        await rpc("step_back", expect=2)
    await rpc("set_speed", {"speed": 20}, expect=2)
    events = await rpc("continue", expect=2)
    assert events[1]["payload"]["mode"] == "playing"
    stamps = []
    got = 0
    while got < 3:
        ev = json.loads(await asyncio.wait_for(reader.readline(), 5))
        if ev["type"] == "visual_state":
            stamps.append(time.monotonic())
            got += 1
    gaps = [b - a for a, b in zip(stamps, stamps[1:])]
    assert all(0.01 <= g <= 1.0 for g in gaps)  # ~50ms nominal, very generous
    await rpc("break", seq=9, expect=2)

    writer.close()
    server.close()
    await server.wait_closed()


def test_tcp_transport_and_playback_timing():
    asyncio.run(_tcp_exchange())


async def _ws_exchange():
    engine = Engine()
    app = websocket_app(engine)
    to_app: asyncio.Queue = asyncio.Queue()
    from_app: asyncio.Queue = asyncio.Queue()

    async def receive():
        return await to_app.get()

    async def send(message):
        await from_app.put(message)

    task = asyncio.create_task(app({"type": "websocket"}, receive, send))
    await to_app.put({"type": "websocket.connect"})
    assert (await asyncio.wait_for(from_app.get(), 5))["type"] == "websocket.accept"

    await to_app.put(
        {"type": "websocket.receive", "text": protocol.encode({"type": "create_session", "seq": 1, "payload": {}})}
    )
    ack = json.loads((await asyncio.wait_for(from_app.get(), 5))["text"])
    created = json.loads((await asyncio.wait_for(from_app.get(), 5))["text"])
    assert ack["type"] == "ack"
    assert created["type"] == "session_created"

    await to_app.put({"type": "websocket.disconnect"})
    await asyncio.wait_for(task, 5)


def test_websocket_app_speaks_the_protocol():
    asyncio.run(_ws_exchange())
