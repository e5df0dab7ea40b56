// Sky-graph view: floating node blocks joined by chains, projected from
// 3D with a drag-to-orbit camera. Clicking a chain asks the server to
// remove that edge; the view itself never touches graph state.

import { GraphPayload } from "./protocol.js";

export interface Orbit {
  yaw: number;
  pitch: number;
  distance: number;
}

export function defaultOrbit(): Orbit {
  return { yaw: 0.7, pitch: 0.35, distance: 4 };
}

interface Projected {
  id: string;
  x: number;
  y: number;
  depth: number;
}

function projectAll(
  graph: GraphPayload,
  orbit: Orbit,
  w: number,
  h: number,
): Map<string, Projected> {
  let cx = 0;
  let cy = 0;
  let cz = 0;
  for (const n of graph.nodes) {
    cx += n.x;
    cy += n.y;
    cz += n.z;
  }
  const count = Math.max(1, graph.nodes.length);
  cx /= count;
  cy /= count;
  cz /= count;
  let radius = 1;
  for (const n of graph.nodes) {
    radius = Math.max(radius, Math.hypot(n.x - cx, n.y - cy, n.z - cz));
  }
  const sy = Math.sin(orbit.yaw);
  const cyaw = Math.cos(orbit.yaw);
  const sp = Math.sin(orbit.pitch);
  const cp = Math.cos(orbit.pitch);
  const out = new Map<string, Projected>();
  for (const n of graph.nodes) {
    const x0 = (n.x - cx) / radius;
    const y0 = (n.y - cy) / radius;
    const z0 = (n.z - cz) / radius;
    // yaw about the vertical axis, then pitch about the screen x axis
    const x1 = x0 * cyaw + z0 * sy;
    const z1 = -x0 * sy + z0 * cyaw;
    const y2 = y0 * cp - z1 * sp;
    const z2 = y0 * sp + z1 * cp;
    const persp = orbit.distance / (orbit.distance + z2);
    out.set(n.id, {
      id: n.id,
      x: w / 2 + x1 * persp * (Math.min(w, h) * 0.38),
      y: h / 2 - y2 * persp * (Math.min(w, h) * 0.38),
      depth: z2,
    });
  }
  return out;
}

function segmentDistance(px: number, py: number, a: Projected, b: Projected): number {
  const dx = b.x - a.x;
  const dy = b.y - a.y;
  const len2 = dx * dx + dy * dy;
  const t = len2 === 0 ? 0 : Math.max(0, Math.min(1, ((px - a.x) * dx + (py - a.y) * dy) / len2));
  return Math.hypot(px - (a.x + t * dx), py - (a.y + t * dy));
}

export function edgeAt(
  graph: GraphPayload,
  orbit: Orbit,
  w: number,
  h: number,
  px: number,
  py: number,
  threshold = 8,
): [string, string] | null {
  const pts = projectAll(graph, orbit, w, h);
  let best: [string, string] | null = null;
  let bestDist = threshold;
  for (const [a, b] of graph.edges) {
    const pa = pts.get(a);
    const pb = pts.get(b);
    if (!pa || !pb) continue;
    const d = segmentDistance(px, py, pa, pb);
    if (d < bestDist) {
      bestDist = d;
      best = [a, b];
    }
  }
  return best;
}

export function drawSky(
  ctx: CanvasRenderingContext2D,
  graph: GraphPayload | null,
  orbit: Orbit,
  w: number,
  h: number,
): void {
  ctx.fillStyle = "#101630";
  ctx.fillRect(0, 0, w, h);
  if (!graph || graph.nodes.length === 0) {
    ctx.fillStyle = "#8899cc";
    ctx.font = "13px system-ui";
    ctx.fillText("no sky graph loaded", 14, 24);
    return;
  }
  const pts = projectAll(graph, orbit, w, h);
  // chains first, far-to-near node blocks on top
  for (const [a, b] of graph.edges) {
    const pa = pts.get(a)!;
    const pb = pts.get(b)!;
    ctx.strokeStyle = "#9aa7b8";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(pa.x, pa.y);
    ctx.lineTo(pb.x, pb.y);
    ctx.stroke();
    if (graph.directed) {
      // arrowhead near the target
      const t = 0.8;
      const hx = pa.x + (pb.x - pa.x) * t;
      const hy = pa.y + (pb.y - pa.y) * t;
      const ang = Math.atan2(pb.y - pa.y, pb.x - pa.x);
      ctx.beginPath();
      ctx.moveTo(hx, hy);
      ctx.lineTo(hx - 9 * Math.cos(ang - 0.45), hy - 9 * Math.sin(ang - 0.45));
      ctx.lineTo(hx - 9 * Math.cos(ang + 0.45), hy - 9 * Math.sin(ang + 0.45));
      ctx.closePath();
      ctx.fillStyle = "#9aa7b8";
      ctx.fill();
    }
  }
  const ordered = [...pts.values()].sort((m, n) => n.depth - m.depth);
  for (const p of ordered) {
    const size = Math.max(8, 16 - p.depth * 4);
    ctx.fillStyle = "#f0c24b";
    ctx.fillRect(p.x - size / 2, p.y - size / 2, size, size);
    ctx.strokeStyle = "#7a5c10";
    ctx.strokeRect(p.x - size / 2, p.y - size / 2, size, size);
    ctx.fillStyle = "#dfe6f0";
    ctx.font = "11px system-ui";
    ctx.fillText(p.id, p.x + size / 2 + 3, p.y + 3);
  }
}
