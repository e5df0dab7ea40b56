// Wire types for the session protocol (docs/protocol.md in the repo root).
// Every message both ways is {type, seq, payload}; events echo the seq of
// the command that triggered them.

export interface Envelope {
  type: string;
  seq: number;
  payload: Record<string, unknown>;
}

export type Cell = [number, number];
export type NodeRef = [number, number, number]; // x, z, height

export interface TerrainPayload {
  bounds: { min_x: number; min_z: number; width: number; depth: number };
  revision: number;
  heights: number[][];
  blocks: string[][];
  world_version: number;
  map_id: string | null;
}

export interface TerrainUpdatePayload {
  x: number;
  z: number;
  height: number;
  block: string;
  world_version: number;
}

export interface TraceEventPayload {
  step: number;
  algo: string;
  kind: string;
  node: NodeRef;
  g: number | null;
  h: number | null;
  visited: number;
  parent: NodeRef | null;
}

export interface VisualTracePayload {
  label: string;
  color: string;
  visited: Cell[];
  frontier: Cell[];
  current: Cell | null;
  path: Cell[];
  overlay: { cell: Cell; text: string } | null;
}

export interface VisualStatePayload {
  traces: VisualTracePayload[];
  cursors: number[];
  mode: "paused" | "playing";
}

export interface MetricsPayload {
  visited: number;
  expansions: number;
  path_cost: number | null;
  path_steps: number;
}

export interface ReportPayload {
  labels: string[];
  metrics: Record<string, MetricsPayload>;
  visited_ratios: [string, string, number][];
  table: string;
}

export interface GraphPayload {
  directed: boolean;
  nodes: { id: string; x: number; y: number; z: number }[];
  edges: [string, string][];
}

export interface PuzzlePayload {
  kind: string;
  prompt: string;
  goal: string;
  budget: number | null;
  edits: number;
  graph: GraphPayload;
}

export interface ChallengeInfo {
  id: string;
  kind: string;
  prompt: string;
  gate: string | null;
  map: string;
  points: number;
}

export interface VerdictPayload {
  challenge: string;
  passed: boolean;
  reason: string | null;
  points: number;
  failed_attempts: number;
  solved: boolean;
}

export interface BookPayload {
  id: string;
  title: string;
  pages: string[];
  quiz: { question: string; options: string[] }[];
}

export interface QuizResultPayload {
  book_id: string;
  score: number;
  per_item: boolean[];
  gate_passed: boolean;
  explanations: string[];
}

export interface InspectionPayload {
  label: string;
  g_cost: number | null;
  h_value: number | null;
  status: string;
  visited_count: number;
}

export interface ErrorPayload {
  code: string;
  message: string;
}

export interface FullStatePayload {
  session_id: string;
  map_id: string | null;
  table_id: string;
  endpoints: Record<string, Cell>;
  gates: string[];
  challenge: string | null;
  run_labels: string[];
  terrain: TerrainPayload | null;
  visual: VisualStatePayload | null;
  puzzle: PuzzlePayload | null;
}

export function encode(message: Envelope): string {
  return JSON.stringify(message);
}

export function parseEvent(text: string): Envelope {
  const data = JSON.parse(text);
  if (typeof data !== "object" || data === null) {
    throw new Error("event is not an object");
  }
  if (typeof data.type !== "string" || typeof data.seq !== "number") {
    throw new Error("event is missing type/seq");
  }
  return { type: data.type, seq: data.seq, payload: data.payload ?? {} };
}
