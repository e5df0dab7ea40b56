"""Wire protocol: newline-delimited JSON messages and payload builders.

Client commands and server events share one envelope::

    {"type": <string>, "seq": <int>, "payload": {...}}

Events echo the ``seq`` of the command that triggered them. Encoding is
canonical (sorted keys, no whitespace) so identical sessions produce
byte-identical event logs; nothing time-based is ever serialized.
The full catalogue lives in docs/protocol.md and is cross-checked by
tests.
"""

from __future__ import annotations

import json
import math
from typing import Any

from .algorithms import ComparisonReport, ExecutionTrace, RunMetrics, TraceEvent
from .debugger import VisualState
from .errors import ProtocolError
from .graph import GridNode, SearchRegion
from .skygraph import Puzzle, SkyGraph
from .terrain import TerrainSnapshot

COMMAND_TYPES = (
    "create_session",
    "attach_session",
    "get_state",
    "list_maps",
    "new_map",
    "load_map",
    "save_map",
    "set_block",
    "set_weights",
    "select_endpoint",
    "run",
    "break",
    "continue",
    "step_fwd",
    "step_back",
    "set_speed",
    "inspect",
    "tick",
    "challenge_list",
    "challenge_start",
    "submit_prediction",
    "submit_endpoints",
    "challenge_evaluate",
    "load_puzzle",
    "sky_edit",
    "sky_check",
    "list_books",
    "open_book",
    "submit_answers",
)

EVENT_TYPES = (
    "ack",
    "error",
    "session_created",
    "full_state",
    "map_list",
    "terrain",
    "terrain_update",
    "run_invalidated",
    "endpoint_set",
    "weights_set",
    "run_started",
    "trace_events",
    "run_finished",
    "metrics_report",
    "visual_state",
    "mode",
    "speed_set",
    "inspection",
    "noop",
    "challenge_list",
    "challenge_started",
    "verdict",
    "puzzle_state",
    "sky_state",
    "sky_verdict",
    "book_list",
    "book",
    "quiz_result",
)

ERROR_CODES = (
    "engine_error",
    "parse_error",
    "unknown_block",
    "out_of_bounds",
    "bad_argument",
    "constraint_violation",
    "bad_state",
    "stale_run",
    "gate_locked",
    "oracle_cap",
    "bad_message",
    "unknown_session",
    "io_error",
)


def encode(message: dict) -> str:
    """Canonical one-line encoding (the trailing newline is the frame)."""
    return json.dumps(message, sort_keys=True, separators=(",", ":"))


def parse_message(line: str) -> tuple[str, int, dict]:
    try:
        data = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ProtocolError("message must be a JSON object")
    msg_type = data.get("type")
    if not isinstance(msg_type, str):
        raise ProtocolError("message needs a string 'type'")
    seq = data.get("seq", 0)
    if not isinstance(seq, int):
        raise ProtocolError("'seq' must be an integer")
    payload = data.get("payload", {})
    if not isinstance(payload, dict):
        raise ProtocolError("'payload' must be an object")
    return msg_type, seq, payload


def event(event_type: str, seq: int, payload: dict | None = None) -> dict:
    assert event_type in EVENT_TYPES, event_type
    return {"type": event_type, "seq": seq, "payload": payload or {}}


# -- payload builders ---------------------------------------------------------


def cost_json(c: float) -> float | None:
    return None if math.isinf(c) else c


def node_json(n: GridNode | None) -> list[int] | None:
    return None if n is None else [n.x, n.z, n.height]


def trace_event_json(e: TraceEvent) -> dict:
    return {
        "step": e.step,
        "algo": e.algo,
        "kind": e.kind.value,
        "node": node_json(e.node),
        "g": cost_json(e.g_cost),
        "h": cost_json(e.h_value),
        "visited": e.visited_count,
        "parent": node_json(e.parent),
    }


def metrics_json(m: RunMetrics) -> dict:
    # wall_time stays off the wire: event logs must be reproducible
    return {
        "visited": m.visited_nodes,
        "expansions": m.expansions,
        "path_cost": cost_json(m.path_cost),
        "path_steps": m.path_steps,
    }


def region_json(r: SearchRegion) -> dict:
    return {
        "center": [r.center[0], r.center[1]],
        "radius": r.radius,
        "start": [r.start.x, r.start.z],
        "goal": [r.goal.x, r.goal.z],
    }


def snapshot_json(snap: TerrainSnapshot, world_version: int, map_id: str | None) -> dict:
    return {
        "bounds": {
            "min_x": snap.bounds.min_x,
            "min_z": snap.bounds.min_z,
            "width": snap.bounds.width,
            "depth": snap.bounds.depth,
        },
        "revision": snap.revision,
        "heights": [list(row) for row in snap.heights],
        "blocks": [list(row) for row in snap.blocks],
        "world_version": world_version,
        "map_id": map_id,
    }


def visual_state_json(state: VisualState, mode: str) -> dict:
    traces = []
    for vt in state.traces:
        traces.append(
            {
                "label": vt.label,
                "color": vt.color,
                "visited": sorted(list(c) for c in vt.visited),
                "frontier": sorted(list(c) for c in vt.frontier),
                "current": list(vt.current) if vt.current else None,
                "path": [list(c) for c in vt.path],
                "overlay": None
                if vt.overlay is None
                else {"cell": list(vt.overlay[0]), "text": vt.overlay[1]},
            }
        )
    return {"traces": traces, "cursors": list(state.cursors), "mode": mode}


def trace_summary_json(trace: ExecutionTrace) -> dict:
    return {
        "label": trace.spec.label,
        "kind": trace.spec.kind.value,
        "heuristic": trace.spec.heuristic.value,
        "color": trace.spec.color,
        "events": len(trace.events),
        "path": [node_json(n) for n in trace.path],
        "metrics": metrics_json(trace.metrics),
    }


def report_json(report: ComparisonReport) -> dict:
    return {
        "labels": list(report.labels),
        "metrics": {label: metrics_json(m) for label, m in report.metrics.items()},
        "visited_ratios": [
            [a, b, ratio] for (a, b), ratio in sorted(report.visited_ratios.items())
        ],
        "table": report.table(),
    }


def graph_json(g: SkyGraph) -> dict:
    return {
        "directed": g.directed,
        "nodes": [
            {"id": node_id, "x": p[0], "y": p[1], "z": p[2]} for node_id, p in g.nodes
        ],
        "edges": [list(e) for e in g.sorted_edges()],
    }


def puzzle_json(p: Puzzle, graph: SkyGraph, edits: int) -> dict:
    # the stored witness is deliberately absent: students never see it
    return {
        "kind": p.kind.value,
        "prompt": p.prompt,
        "goal": p.goal.describe(),
        "budget": p.budget,
        "edits": edits,
        "graph": graph_json(graph),
    }


def dump_events(events: list[dict]) -> str:
    """One event per line; the exact format golden tests freeze."""
    return "".join(encode(e) + "\n" for e in events)


def payload_field(payload: dict, key: str, kind=None) -> Any:
    if key not in payload:
        raise ProtocolError(f"payload is missing {key!r}")
    value = payload[key]
    if kind is not None and not isinstance(value, kind):
        raise ProtocolError(f"payload field {key!r} has the wrong type")
    return value
