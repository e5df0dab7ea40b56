// Event-sourced mirror of server state. The UI holds no authoritative
// state: every field here is rebuilt purely from server events, so
// replaying a recorded event log into a fresh mirror reproduces the
// exact same state (hash-identical, which the tests pin).

import {
  BookPayload,
  ChallengeInfo,
  Envelope,
  ErrorPayload,
  FullStatePayload,
  InspectionPayload,
  PuzzlePayload,
  GraphPayload,
  ReportPayload,
  TerrainPayload,
  TerrainUpdatePayload,
  TraceEventPayload,
  VerdictPayload,
  VisualStatePayload,
  QuizResultPayload,
} from "./protocol.js";

export interface TraceInfo {
  label: string;
  events: TraceEventPayload[];
  region: { center: [number, number]; radius: number } | null;
}

export interface MirrorState {
  sessionId: string | null;
  mapId: string | null;
  maps: string[];
  terrain: TerrainPayload | null;
  endpoints: { start?: [number, number]; goal?: [number, number] };
  traces: Record<string, TraceInfo>;
  visual: VisualStatePayload | null;
  mode: "paused" | "playing";
  speed: number;
  stale: boolean;
  staleReason: string | null;
  report: ReportPayload | null;
  inspection: InspectionPayload | null;
  challenges: ChallengeInfo[];
  activeChallenge: {
    id: string;
    kind: string;
    prompt: string;
    gate: string | null;
    failedAttempts: number;
  } | null;
  verdict: VerdictPayload | null;
  puzzle: PuzzlePayload | null;
  skyGraph: GraphPayload | null;
  skyEdits: number;
  skyVerdict: { status: string; reason: string | null } | null;
  bookList: { id: string; title: string; quiz_items: number }[];
  book: BookPayload | null;
  quizResult: QuizResultPayload | null;
  gates: string[];
  lastError: ErrorPayload | null;
  lastNoop: string | null;
}

export function initialMirror(): MirrorState {
  return {
    sessionId: null,
    mapId: null,
    maps: [],
    terrain: null,
    endpoints: {},
    traces: {},
    visual: null,
    mode: "paused",
    speed: 4,
    stale: false,
    staleReason: null,
    report: null,
    inspection: null,
    challenges: [],
    activeChallenge: null,
    verdict: null,
    puzzle: null,
    skyGraph: null,
    skyEdits: 0,
    skyVerdict: null,
    bookList: [],
    book: null,
    quizResult: null,
    gates: [],
    lastError: null,
    lastNoop: null,
  };
}

// Pure reducer: never mutates the incoming state.
export function reduce(state: MirrorState, event: Envelope): MirrorState {
  const next: MirrorState = { ...state, lastError: null, lastNoop: null };
  const p = event.payload as never;
  switch (event.type) {
    case "ack":
      return next;
    case "error": {
      next.lastError = p as ErrorPayload;
      if (next.lastError.code === "stale_run") {
        next.stale = true;
        next.staleReason = next.lastError.message;
      }
      return next;
    }
    case "session_created": {
      next.sessionId = (p as { session_id: string }).session_id;
      return next;
    }
    case "full_state": {
      const full = p as FullStatePayload;
      next.sessionId = full.session_id;
      next.mapId = full.map_id;
      next.terrain = full.terrain;
      next.endpoints = { ...full.endpoints } as MirrorState["endpoints"];
      next.visual = full.visual;
      next.mode = full.visual?.mode ?? "paused";
      next.puzzle = full.puzzle;
      next.skyGraph = full.puzzle?.graph ?? null;
      next.skyEdits = full.puzzle?.edits ?? 0;
      next.gates = [...full.gates];
      return next;
    }
    case "map_list": {
      next.maps = [...(p as { maps: string[] }).maps];
      return next;
    }
    case "terrain": {
      next.terrain = p as TerrainPayload;
      next.mapId = next.terrain.map_id;
      next.endpoints = {};
      next.traces = {};
      next.visual = null;
      next.report = null;
      next.stale = false;
      next.staleReason = null;
      return next;
    }
    case "terrain_update": {
      const up = p as TerrainUpdatePayload;
      if (next.terrain) {
        const { min_x, min_z } = next.terrain.bounds;
        const heights = next.terrain.heights.map((row) => [...row]);
        const blocks = next.terrain.blocks.map((row) => [...row]);
        heights[up.z - min_z][up.x - min_x] = up.height;
        blocks[up.z - min_z][up.x - min_x] = up.block;
        next.terrain = {
          ...next.terrain,
          heights,
          blocks,
          world_version: up.world_version,
        };
      }
      if (Object.keys(next.traces).length > 0) {
        next.stale = true;
        next.staleReason = "terrain changed; re-run required";
      }
      return next;
    }
    case "run_invalidated": {
      next.stale = true;
      next.staleReason = (p as { reason: string }).reason;
      return next;
    }
    case "endpoint_set": {
      const e = p as { which: "start" | "goal"; x: number; z: number };
      next.endpoints = { ...next.endpoints, [e.which]: [e.x, e.z] };
      return next;
    }
    case "weights_set":
      return next;
    case "run_started": {
      const r = p as { labels: string[]; region: TraceInfo["region"] };
      next.traces = {};
      for (const label of r.labels) {
        next.traces[label] = { label, events: [], region: r.region };
      }
      next.stale = false;
      next.staleReason = null;
      next.report = null;
      next.verdict = null;
      return next;
    }
    case "trace_events": {
      const batch = p as { label: string; events: TraceEventPayload[] };
      const existing = next.traces[batch.label] ?? {
        label: batch.label,
        events: [],
        region: null,
      };
      next.traces = {
        ...next.traces,
        [batch.label]: { ...existing, events: [...existing.events, ...batch.events] },
      };
      return next;
    }
    case "run_finished":
      return next;
    case "metrics_report": {
      next.report = p as ReportPayload;
      return next;
    }
    case "visual_state": {
      next.visual = p as VisualStatePayload;
      next.mode = next.visual.mode;
      return next;
    }
    case "mode": {
      next.mode = (p as { mode: "paused" | "playing" }).mode;
      return next;
    }
    case "speed_set": {
      next.speed = (p as { speed: number }).speed;
      return next;
    }
    case "inspection": {
      next.inspection = p as InspectionPayload;
      return next;
    }
    case "noop": {
      next.lastNoop = (p as { op: string }).op;
      return next;
    }
    case "challenge_list": {
      next.challenges = [...(p as { challenges: ChallengeInfo[] }).challenges];
      return next;
    }
    case "challenge_started": {
      const c = p as {
        id: string;
        kind: string;
        prompt: string;
        gate: string | null;
        failed_attempts: number;
      };
      next.activeChallenge = {
        id: c.id,
        kind: c.kind,
        prompt: c.prompt,
        gate: c.gate,
        failedAttempts: c.failed_attempts,
      };
      next.verdict = null;
      return next;
    }
    case "verdict": {
      next.verdict = p as VerdictPayload;
      if (next.activeChallenge) {
        next.activeChallenge = {
          ...next.activeChallenge,
          failedAttempts: next.verdict.failed_attempts,
        };
      }
      return next;
    }
    case "puzzle_state": {
      next.puzzle = p as PuzzlePayload;
      next.skyGraph = next.puzzle.graph;
      next.skyEdits = next.puzzle.edits;
      next.skyVerdict = null;
      return next;
    }
    case "sky_state": {
      const s = p as { graph: GraphPayload; edits: number };
      next.skyGraph = s.graph;
      next.skyEdits = s.edits;
      return next;
    }
    case "sky_verdict": {
      next.skyVerdict = p as { status: string; reason: string | null };
      return next;
    }
    case "book_list": {
      next.bookList = [
        ...(p as { books: { id: string; title: string; quiz_items: number }[] }).books,
      ];
      return next;
    }
    case "book": {
      next.book = p as BookPayload;
      next.quizResult = null;
      return next;
    }
    case "quiz_result": {
      const r = p as QuizResultPayload;
      next.quizResult = r;
      if (r.gate_passed && !next.gates.includes(r.book_id)) {
        next.gates = [...next.gates, r.book_id].sort();
      }
      return next;
    }
    default:
      // unknown events are ignored so old UIs survive new servers
      return next;
  }
}

export function replay(events: Envelope[], base?: MirrorState): MirrorState {
  let state = base ?? initialMirror();
  for (const event of events) {
    state = reduce(state, event);
  }
  return state;
}

// -- stable hashing -----------------------------------------------------------

function stableStringify(value: unknown): string {
  if (value === null || typeof value !== "object") {
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    return "[" + value.map(stableStringify).join(",") + "]";
  }
  const entries = Object.entries(value as Record<string, unknown>)
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(([k, v]) => JSON.stringify(k) + ":" + stableStringify(v));
  return "{" + entries.join(",") + "}";
}

export function mirrorHash(state: MirrorState): string {
  // FNV-1a over the canonical serialization
  const text = stableStringify(state);
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash.toString(16).padStart(8, "0");
}
