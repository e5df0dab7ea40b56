"""Terrain and prediction challenges plus attempt telemetry.

A challenge is a machine-checkable success predicate over session state.
Evaluation refuses to look at results that no longer match the terrain:
any block edit after the last run raises a staleness error until the
algorithm is re-run, mirroring how recorded traces never bend to later
edits. Attempts append to a line-delimited local log whose only job is
answering "how many failed tries per challenge".
"""

from __future__ import annotations

import datetime as _dt
import json
import math
import operator
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping

from .algorithms import (
    AlgorithmKind,
    AlgorithmSpec,
    EventKind,
    ExecutionTrace,
    shortest_cost,
)
from .errors import ArgumentError, GateError, ParseError, StalenessError
from .graph import GridNode, Heuristic, WeightTable, node_at
from .skygraph import Puzzle, SkyGraph, VerdictStatus, check_solution
from .terrain import TerrainSnapshot

ENDPOINT_SCAN_LIMIT = 16 * 16  # exhaustive pair scan only on maps this small


class ChallengeKind(str, Enum):
    MIN_STEPS = "min_steps"
    PATH_COST_TARGET = "path_cost_target"
    PICK_ENDPOINTS = "pick_endpoints"
    PREDICT_NEXT = "predict_next"
    SKY_PUZZLE = "sky_puzzle"


_COMPARATORS = {
    "<": operator.lt,
    "<=": operator.le,
    "==": operator.eq,
    ">=": operator.ge,
    ">": operator.gt,
}


@dataclass(frozen=True)
class Challenge:
    id: str
    kind: ChallengeKind
    params: Mapping
    map_ref: str
    algorithm: AlgorithmSpec
    gate: str | None = None
    prompt: str = ""
    points: int = 1

    def __post_init__(self):
        kind = self.kind
        p = self.params
        try:
            if kind == ChallengeKind.MIN_STEPS:
                int(p["n"])
            elif kind == ChallengeKind.PATH_COST_TARGET:
                if p["comparator"] not in _COMPARATORS:
                    raise ArgumentError(f"unknown comparator {p['comparator']!r}")
                float(p["target"])
            elif kind == ChallengeKind.PICK_ENDPOINTS:
                float(p["target"])
            elif kind == ChallengeKind.PREDICT_NEXT:
                int(p["cursor"])
            elif kind == ChallengeKind.SKY_PUZZLE:
                p["puzzle_kind"], int(p["size"]), int(p["seed"])
        except KeyError as exc:
            raise ArgumentError(f"{kind.value} challenge missing param {exc}") from None


@dataclass(frozen=True)
class ChallengeVerdict:
    passed: bool
    reason: str | None = None


@dataclass(frozen=True)
class SessionView:
    """The slice of session state a challenge evaluation may read."""

    world_version: int
    run_world_version: int | None = None
    traces: Mapping[str, ExecutionTrace] = field(default_factory=dict)
    snapshot: TerrainSnapshot | None = None
    table: WeightTable | None = None
    endpoints: tuple[GridNode, GridNode] | None = None
    passed_gates: frozenset[str] = frozenset()
    prediction: tuple[int, int] | None = None
    puzzle: Puzzle | None = None
    sky_graph: SkyGraph | None = None
    sky_edits: int = 0


def _require_fresh_run(challenge: Challenge, view: SessionView) -> ExecutionTrace:
    if view.run_world_version is None:
        raise StalenessError("no results for this terrain; run the algorithm first")
    if view.run_world_version != view.world_version:
        raise StalenessError(
            "terrain changed after the last run; re-run the algorithm"
        )
    trace = view.traces.get(challenge.algorithm.label)
    if trace is None:
        raise StalenessError(
            f"no fresh run of {challenge.algorithm.label!r}; run it first"
        )
    return trace


def _scan_endpoint_pairs(view: SessionView, target: float) -> bool:
    """Exhaustive check: does any endpoint pair achieve exactly ``target``?"""
    snapshot = view.snapshot
    assert snapshot is not None and view.table is not None
    cells = list(snapshot.bounds.cells())
    for a in cells:
        for b in cells:
            if a == b:
                if target == 0.0:
                    return True
                continue
            u = node_at(snapshot, *a)
            v = node_at(snapshot, *b)
            if shortest_cost(snapshot, view.table, u, v) == target:
                return True
    return False


def evaluate(challenge: Challenge, view: SessionView) -> ChallengeVerdict:
    """Check one challenge against the current session state."""
    if challenge.gate and challenge.gate not in view.passed_gates:
        raise GateError(
            f"challenge {challenge.id!r} is gated behind quiz {challenge.gate!r}"
        )
    kind = challenge.kind

    if kind == ChallengeKind.SKY_PUZZLE:
        if view.puzzle is None or view.sky_graph is None:
            raise StalenessError("no active puzzle; load it first")
        verdict = check_solution(view.puzzle, view.sky_graph, view.sky_edits)
        if verdict.status == VerdictStatus.SOLVED:
            return ChallengeVerdict(True)
        if verdict.status == VerdictStatus.OVER_BUDGET:
            return ChallengeVerdict(False, verdict.reason or "edit budget exceeded")
        return ChallengeVerdict(False, verdict.reason or "goal not met")

    trace = _require_fresh_run(challenge, view)

    if kind == ChallengeKind.MIN_STEPS:
        n = int(challenge.params["n"])
        if not trace.path:
            return ChallengeVerdict(False, "no path was found")
        steps = trace.metrics.path_steps
        if steps >= n:
            return ChallengeVerdict(True)
        return ChallengeVerdict(False, f"path has {steps} steps, needs at least {n}")

    if kind == ChallengeKind.PATH_COST_TARGET:
        if not trace.path:
            return ChallengeVerdict(False, "no path was found")
        comparator = challenge.params["comparator"]
        target = float(challenge.params["target"])
        cost = trace.metrics.path_cost
        if _COMPARATORS[comparator](cost, target):
            return ChallengeVerdict(True)
        return ChallengeVerdict(
            False, f"path cost {cost:.4f} is not {comparator} {target:.4f}"
        )

    if kind == ChallengeKind.PICK_ENDPOINTS:
        target = float(challenge.params["target"])
        if view.endpoints is None:
            return ChallengeVerdict(False, "no endpoints chosen")
        cost = trace.metrics.path_cost
        if not trace.path:
            cost = math.inf
        if cost == target:
            return ChallengeVerdict(True)
        reason = f"shortest cost between the chosen endpoints is {cost:.4f}, not {target:.4f}"
        if (
            view.snapshot is not None
            and view.table is not None
            and view.snapshot.bounds.cell_count <= ENDPOINT_SCAN_LIMIT
            and not _scan_endpoint_pairs(view, target)
        ):
            reason = f"no endpoint pair achieves cost {target:.4f} on this map"
        return ChallengeVerdict(False, reason)

    if kind == ChallengeKind.PREDICT_NEXT:
        cursor = int(challenge.params["cursor"])
        if view.prediction is None:
            return ChallengeVerdict(False, "no prediction submitted")
        answer = None
        for e in trace.events:
            if e.step > cursor and e.kind == EventKind.EXPAND_CURRENT:
                answer = e.node.cell()
                break
        if answer is None:
            return ChallengeVerdict(
                False, "the algorithm expands nothing after that step"
            )
        if view.prediction == answer:
            return ChallengeVerdict(True)
        return ChallengeVerdict(
            False,
            f"the algorithm expands {answer[0]},{answer[1]} next, "
            f"not {view.prediction[0]},{view.prediction[1]}",
        )

    raise ArgumentError(f"unknown challenge kind {kind!r}")


# ---------------------------------------------------------------------------
# Telemetry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AttemptRecord:
    challenge_id: str
    timestamp: str
    outcome: str  # "pass" | "fail"
    reason: str | None
    edits: int
    metrics: dict | None

    def to_json(self) -> str:
        return json.dumps(
            {
                "challenge": self.challenge_id,
                "timestamp": self.timestamp,
                "outcome": self.outcome,
                "reason": self.reason,
                "edits": self.edits,
                "metrics": self.metrics,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, line: str) -> "AttemptRecord":
        data = json.loads(line)
        return cls(
            data["challenge"],
            data["timestamp"],
            data["outcome"],
            data.get("reason"),
            data.get("edits", 0),
            data.get("metrics"),
        )


class TelemetryStore:
    """Append-only attempt log, one JSON record per line.

    File-backed when given a path (records survive restarts); memory-only
    with ``path=None`` for throwaway sessions.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._records: list[AttemptRecord] = []
        if self.path is not None and self.path.exists():
            for line in self.path.read_text().splitlines():
                if line.strip():
                    self._records.append(AttemptRecord.from_json(line))

    def append(self, record: AttemptRecord) -> None:
        self._records.append(record)
        if self.path is None:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a") as fh:
            fh.write(record.to_json() + "\n")

    def records(self, challenge_id: str | None = None) -> list[AttemptRecord]:
        if challenge_id is None:
            return list(self._records)
        return [r for r in self._records if r.challenge_id == challenge_id]

    def failed_attempts(self, challenge_id: str) -> int:
        return sum(1 for r in self.records(challenge_id) if r.outcome == "fail")

    def solved(self, challenge_id: str) -> bool:
        return any(r.outcome == "pass" for r in self.records(challenge_id))


def record_attempt(
    store: TelemetryStore,
    challenge: Challenge,
    verdict: ChallengeVerdict,
    view: SessionView,
    now: _dt.datetime | None = None,
) -> AttemptRecord:
    trace = view.traces.get(challenge.algorithm.label)
    metrics = None
    if trace is not None and challenge.kind != ChallengeKind.SKY_PUZZLE:
        m = trace.metrics
        metrics = {
            "visited": m.visited_nodes,
            "expansions": m.expansions,
            "path_cost": None if math.isinf(m.path_cost) else m.path_cost,
            "path_steps": m.path_steps,
        }
    stamp = (now or _dt.datetime.now(_dt.timezone.utc)).isoformat()
    record = AttemptRecord(
        challenge.id,
        stamp,
        "pass" if verdict.passed else "fail",
        verdict.reason,
        view.sky_edits if challenge.kind == ChallengeKind.SKY_PUZZLE else 0,
        metrics,
    )
    store.append(record)
    return record


# ---------------------------------------------------------------------------
# Challenge definition files: one JSON document per challenge.
# ---------------------------------------------------------------------------


def load_challenge(text: str) -> Challenge:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    try:
        algo = data["algorithm"]
        spec = AlgorithmSpec(
            AlgorithmKind(algo["kind"]),
            Heuristic(algo.get("heuristic", "octile")),
            algo.get("label", ""),
            algo.get("color", ""),
        )
        return Challenge(
            id=data["id"],
            kind=ChallengeKind(data["kind"]),
            params=data.get("params", {}),
            map_ref=data["map"],
            algorithm=spec,
            gate=data.get("gate"),
            prompt=data.get("prompt", ""),
            points=int(data.get("points", 1)),
        )
    except (KeyError, ValueError, ArgumentError) as exc:
        raise ParseError(f"bad challenge document: {exc}") from exc


def load_challenges(directory: str | Path) -> dict[str, Challenge]:
    challenges: dict[str, Challenge] = {}
    for path in sorted(Path(directory).glob("*.json")):
        challenge = load_challenge(path.read_text())
        if challenge.id in challenges:
            raise ParseError(f"duplicate challenge id {challenge.id!r} in {path.name}")
        challenges[challenge.id] = challenge
    return challenges
